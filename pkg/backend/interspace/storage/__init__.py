"""Artifact storage and file formats."""

from interspace.storage.base import ArtifactStore
from interspace.storage.file_store import FileArtifactStore
from interspace.storage.formats import (
    read_basis_file,
    read_coeffs,
    read_path,
    write_basis_file,
    write_coeffs,
    write_path,
)

__all__ = [
    "ArtifactStore",
    "FileArtifactStore",
    "read_basis_file",
    "read_coeffs",
    "read_path",
    "write_basis_file",
    "write_coeffs",
    "write_path",
]
