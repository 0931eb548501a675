"""Markov bound on the block variables W_k.

With a sum-variant schedule, E||W_k||^2 <= 2^-k(3+2a), so

    P(2^(k a) ||W_k|| >= 2^-k) <= 2^(2k(1+a)) E||W_k||^2 <= 2^-k.
"""

from __future__ import annotations

import logging

import numpy as np

from interspace.blocks import BlockSchedule, Variant, live_block_count
from interspace.core.report import ExperimentReport
from interspace.core.rng import StreamTag
from interspace.core.sampling import ReplicateSampler
from interspace.errors import ExperimentError
from interspace.experiments.base import (
    frequency_check,
    new_report,
    table_rows,
    timed,
    weighted_blocks,
)
from interspace.models import BasisModel

logger = logging.getLogger(__name__)

NAME = "verify-key-inequality"


def verify_key_inequality(
    model: BasisModel,
    schedule: BlockSchedule,
    replicates: int,
    sampler: ReplicateSampler,
    level: int,
) -> ExperimentReport:
    """Empirical frequency of {2^(k a)||W_k|| >= 2^-k} per block against 2^-k."""
    if schedule.variant is not Variant.SUM:
        raise ExperimentError(NAME, "the key inequality needs a sum-variant schedule")
    report = new_report(NAME, sampler, replicates, schedule=schedule.to_dict(), level=level)
    with timed(report):
        weighted = weighted_blocks(
            model, schedule, level, replicates, sampler, StreamTag.KEY_INEQUALITY
        )
        ks = np.arange(schedule.block_count)
        bounds = 2.0**-ks
        hits = (weighted >= bounds).sum(axis=0)
        freqs = hits / replicates

        live = live_block_count(schedule, model)
        # block 0 has bound 1 and carries no information
        report.note("block_0_frequency", float(freqs[0]), bound=1.0)
        for k in ks[1:]:
            start, stop = schedule.block(int(k))
            if k >= live:
                report.note(
                    f"block_{k}_frequency",
                    float(freqs[k]),
                    bound=float(bounds[k]),
                    k=int(k),
                    block=[start + 1, stop],
                    empty_block=True,
                )
                continue
            frequency_check(
                report,
                f"block_{k}_frequency",
                int(hits[k]),
                replicates,
                float(bounds[k]),
                k=int(k),
                block=[start + 1, stop],
            )

        nonzero = freqs[1:][freqs[1:] > 0]
        if nonzero.size >= 2:
            ratios = nonzero[1:] / nonzero[:-1]
            report.note("decay_ratio", float(np.exp(np.mean(np.log(ratios)))), envelope=0.5)

        report.tables["frequencies"] = table_rows(
            {
                "k": ks.tolist(),
                "n_k": schedule.cuts[:-1],
                "n_k1": schedule.cuts[1:],
                "hits": hits.tolist(),
                "frequency": freqs.tolist(),
                "bound": bounds.tolist(),
                "mean_weighted_norm": weighted.mean(axis=0).tolist(),
                "empty": [bool(k >= live) for k in ks],
            }
        )
    return report
