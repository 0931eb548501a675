"""File-based artifact storage using JSON and CSV files."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

from interspace.blocks import BlockSchedule
from interspace.core.report import ExperimentReport
from interspace.storage.base import ArtifactStore

logger = logging.getLogger(__name__)


class FileArtifactStore(ArtifactStore):
    """
    JSON/CSV file-based artifact storage.

    Stores each run as sibling files:
        {base_path}/{name}.report.json
        {base_path}/{name}.schedule.json
        {base_path}/{name}.{table}.csv
        {base_path}/{name}.timing.json

    Report files carry no wall time, so reruns of the same config and
    seed produce byte-identical reports.
    """

    def __init__(self, base_path: Path) -> None:
        self.base_path = Path(base_path)
        self.base_path.mkdir(parents=True, exist_ok=True)

    def _get_path(self, name: str, suffix: str) -> Path:
        return self.base_path / f"{name}.{suffix}"

    def _write_json(self, path: Path, data: Any) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(data, f, sort_keys=True, indent=2, allow_nan=True)
            f.write("\n")

    def _read_json(self, path: Path) -> Any:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)

    def save_report(self, report: ExperimentReport, name: str) -> None:
        path = self._get_path(name, "report.json")
        self._write_json(path, report.to_dict(include_timing=False))
        for table, rows in sorted(report.tables.items()):
            self.save_table(name, table, rows)
        logger.info("report_saved path=%s tables=%s", path, len(report.tables))

    def load_report(self, name: str) -> Dict[str, Any]:
        path = self._get_path(name, "report.json")
        if not path.exists():
            raise FileNotFoundError(path)
        return self._read_json(path)

    def save_schedule(self, schedule: BlockSchedule, name: str) -> None:
        self._write_json(self._get_path(name, "schedule.json"), schedule.to_dict())

    def load_schedule(self, name: str) -> BlockSchedule:
        path = self._get_path(name, "schedule.json")
        if not path.exists():
            raise FileNotFoundError(path)
        return BlockSchedule.from_dict(self._read_json(path))

    def save_table(self, name: str, table: str, rows: List[Dict[str, Any]]) -> None:
        frame = pd.DataFrame(rows)
        frame.to_csv(self._get_path(name, f"{table}.csv"), index=False, float_format="%.17g")

    def load_table(self, name: str, table: str) -> pd.DataFrame:
        return pd.read_csv(self._get_path(name, f"{table}.csv"), float_precision="round_trip")

    def save_timing(self, name: str, wall_time_s: float, workers: Optional[int] = None) -> None:
        data: Dict[str, Any] = {"wall_time_s": wall_time_s}
        if workers is not None:
            data["workers"] = workers
        self._write_json(self._get_path(name, "timing.json"), data)

    def exists(self, name: str) -> bool:
        return self._get_path(name, "report.json").exists()
