"""Abstract base class for run artifact storage."""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional

import pandas as pd

from interspace.blocks import BlockSchedule
from interspace.core.report import ExperimentReport


class ArtifactStore(ABC):
    """
    Abstract base class for run artifacts.

    A run named ``name`` owns a report, optionally a schedule, any number
    of named tables and a timing record. Implementations can keep them in:
    - Plain files (JSON and CSV)
    - An object store
    - etc.
    """

    @abstractmethod
    def save_report(self, report: ExperimentReport, name: str) -> None:
        """
        Save a report without its wall time, plus its tables.

        Args:
            report: The report to save
            name: Run name the artifacts are filed under
        """
        pass

    @abstractmethod
    def load_report(self, name: str) -> Dict[str, Any]:
        """
        Load a saved report as a plain dictionary.

        Args:
            name: Run name

        Returns:
            The report dictionary
        """
        pass

    @abstractmethod
    def save_schedule(self, schedule: BlockSchedule, name: str) -> None:
        pass

    @abstractmethod
    def load_schedule(self, name: str) -> BlockSchedule:
        pass

    @abstractmethod
    def save_table(self, name: str, table: str, rows: List[Dict[str, Any]]) -> None:
        pass

    @abstractmethod
    def load_table(self, name: str, table: str) -> pd.DataFrame:
        pass

    @abstractmethod
    def save_timing(self, name: str, wall_time_s: float, workers: Optional[int] = None) -> None:
        """Execution facts kept out of the report: wall time and worker threads."""
        pass

    @abstractmethod
    def exists(self, name: str) -> bool:
        """
        Check if a report exists for a run.

        Args:
            name: Run name

        Returns:
            True if exists, False otherwise
        """
        pass
