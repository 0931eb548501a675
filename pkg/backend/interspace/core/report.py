"""Experiment report models."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

REPORT_SCHEMA = "interspace.report/1"


def _plain(value: Any) -> Any:
    """Convert numpy scalars/arrays into JSON-ready Python values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    return value


@dataclass
class ReportItem:
    """
    One checked quantity.

    ``passed`` is None for informational items that carry no pass/fail rule.
    """

    name: str
    estimate: float
    std_error: Optional[float] = None
    bound: Optional[float] = None
    passed: Optional[bool] = None
    detail: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        result: Dict[str, Any] = {"name": self.name, "estimate": _plain(self.estimate)}
        if self.std_error is not None:
            result["std_error"] = _plain(self.std_error)
        if self.bound is not None:
            result["bound"] = _plain(self.bound)
        result["passed"] = self.passed
        if self.detail:
            result["detail"] = _plain(self.detail)
        return result

    def __repr__(self) -> str:
        flag = {True: "pass", False: "FAIL", None: "info"}[self.passed]
        return f"ReportItem({self.name}, {self.estimate:.4g}, {flag})"


@dataclass
class ExperimentReport:
    """
    Complete result of one experiment run.

    Reproducible from (config, seed); ``wall_time_s`` is the only field
    that varies between identical runs and is kept out of ``to_dict``
    unless asked for.
    """

    name: str
    config: Dict[str, Any]
    seed: int
    replicates: int
    items: List[ReportItem] = field(default_factory=list)
    tables: Dict[str, List[Dict[str, Any]]] = field(default_factory=dict)
    wall_time_s: Optional[float] = None

    def add(self, item: ReportItem) -> ReportItem:
        self.items.append(item)
        return item

    def check(
        self,
        name: str,
        estimate: float,
        bound: float,
        margin: float = 0.0,
        std_error: Optional[float] = None,
        **detail: Any,
    ) -> ReportItem:
        """Record ``estimate <= bound + margin`` as a pass/fail item."""
        passed = bool(estimate <= bound + margin) if not math.isnan(estimate) else False
        if margin:
            detail["margin"] = margin
        return self.add(ReportItem(name, estimate, std_error, bound, passed, detail))

    def note(self, name: str, estimate: float, **detail: Any) -> ReportItem:
        return self.add(ReportItem(name, estimate, detail=detail))

    def flag(self, name: str, estimate: float, passed: bool, **detail: Any) -> ReportItem:
        """Record a pass/fail outcome decided by the caller."""
        return self.add(ReportItem(name, estimate, passed=bool(passed), detail=detail))

    @property
    def checked_items(self) -> List[ReportItem]:
        return [i for i in self.items if i.passed is not None]

    @property
    def failed_items(self) -> List[ReportItem]:
        return [i for i in self.items if i.passed is False]

    @property
    def passed(self) -> bool:
        return not self.failed_items

    def to_dict(self, include_timing: bool = False) -> dict:
        result: Dict[str, Any] = {
            "schema": REPORT_SCHEMA,
            "name": self.name,
            "config": _plain(self.config),
            "seed": self.seed,
            "replicates": self.replicates,
            "passed": self.passed,
            "items": [i.to_dict() for i in self.items],
        }
        if include_timing:
            result["wall_time_s"] = self.wall_time_s
        return result

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        lines = [
            f"Experiment: {self.name} [{status}]",
            f"  Seed: {self.seed}",
            f"  Replicates: {self.replicates}",
            f"  Checks: {len(self.checked_items)} total, {len(self.failed_items)} failed",
        ]
        for item in self.failed_items:
            lines.append(f"    - {item.name}: {item.estimate:.6g} > {item.bound!r}")
        if self.wall_time_s is not None:
            lines.append(f"  Duration: {self.wall_time_s:.2f}s")
        return "\n".join(lines)

    def __repr__(self) -> str:
        status = "passed" if self.passed else "failed"
        return f"ExperimentReport({self.name}, {status}, {len(self.items)} items)"
