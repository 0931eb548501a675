"""Ambient helpers: settings, random streams, replicate sampling, statistics and reports."""

from interspace.core.config import InterspaceSettings, get_settings
from interspace.core.report import ExperimentReport, ReportItem
from interspace.core.rng import GaussianStream, StreamTag
from interspace.core.sampling import ReplicateSampler

__all__ = [
    "ExperimentReport",
    "GaussianStream",
    "InterspaceSettings",
    "ReplicateSampler",
    "ReportItem",
    "StreamTag",
    "get_settings",
]
