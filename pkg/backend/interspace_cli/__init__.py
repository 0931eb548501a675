"""Command-line interface for interspace."""

from interspace_cli.app import app

__all__ = ["app"]
