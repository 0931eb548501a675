"""Shared plumbing for Monte Carlo experiments."""

from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from typing import Any, Dict, Iterator, List

import numpy as np

from interspace.blocks import BlockSchedule
from interspace.core.report import ExperimentReport
from interspace.core.sampling import ReplicateSampler
from interspace.core.stats import SE_MARGIN, binomial_se
from interspace.models import BasisModel
from interspace.norms import block_profile_batch

logger = logging.getLogger(__name__)


@contextmanager
def timed(report: ExperimentReport) -> Iterator[ExperimentReport]:
    """Fill ``report.wall_time_s`` and log the outcome."""
    start = time.perf_counter()
    try:
        yield report
    finally:
        report.wall_time_s = time.perf_counter() - start
        logger.info(
            "experiment_done name=%s passed=%s items=%s duration_s=%.2f",
            report.name,
            report.passed,
            len(report.items),
            report.wall_time_s,
        )


def new_report(
    name: str, sampler: ReplicateSampler, replicates: int, **config: Any
) -> ExperimentReport:
    return ExperimentReport(name=name, config=config, seed=sampler.seed, replicates=replicates)


def weighted_blocks(
    model: BasisModel,
    schedule: BlockSchedule,
    level: int,
    replicates: int,
    sampler: ReplicateSampler,
    tag: int,
) -> np.ndarray:
    """(replicates, K) matrix of 2^(k alpha) ||W_k|| from one Gaussian stream."""
    weights = schedule.weights()
    cols = max(schedule.covered, 1)

    def kernel(g: np.ndarray, _: int) -> np.ndarray:
        return block_profile_batch(g, schedule, model, level) * weights

    return np.concatenate(sampler.map(kernel, replicates, cols, tag), axis=0)


def frequency_check(
    report: ExperimentReport,
    name: str,
    hits: int,
    replicates: int,
    bound: float,
    **detail: Any,
) -> None:
    """Record ``hits / R <= bound + 3 SE`` with the SE taken at the bound."""
    freq = hits / replicates
    se = binomial_se(min(bound, 1.0), replicates)
    report.check(name, freq, bound, margin=SE_MARGIN * se, std_error=se, hits=int(hits), **detail)


def table_rows(columns: Dict[str, Any]) -> List[Dict[str, Any]]:
    """Column dict of equal-length sequences -> list of row dicts."""
    keys = list(columns)
    length = len(columns[keys[0]]) if keys else 0
    return [{key: columns[key][i] for key in keys} for i in range(length)]
