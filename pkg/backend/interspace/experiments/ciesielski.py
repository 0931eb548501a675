"""Sup-block norm on the dyadic schedule against Ciesielski's sequence norm.

On block k >= 1 the tents are disjoint with height 2^(-1-k/2), so

    2^(k a) ||Q_k x|| = 2^(k a) 2^(-1-k/2) max_j |xi_{2^k+j}|
                      = 2^(a-2) max_j w_{2^k+j}(a) |xi_{2^k+j}|.
"""

from __future__ import annotations

import logging
import math
from typing import Any, Dict, Optional, Union

import numpy as np

from interspace import haar
from interspace.blocks import BlockSchedule, dyadic_schedule
from interspace.core.report import ExperimentReport
from interspace.core.rng import StreamTag
from interspace.core.sampling import ReplicateSampler
from interspace.errors import CoefficientError
from interspace.experiments.base import new_report, timed
from interspace.haar import CoeffSeq
from interspace.models import SchauderModel
from interspace.norms import block_profile_batch
from interspace.paths import DyadicPath

logger = logging.getLogger(__name__)

ALGEBRAIC_TOL = 1e-10


def equivalence_constant(alpha: float) -> float:
    return 2.0 ** (alpha - 2.0)


def depth_for(size: int) -> int:
    """Block count K of the dyadic schedule covering ``size`` coefficients."""
    return max(1, math.ceil(math.log2(max(size, 2))))


def closed_form_profile(coeffs: np.ndarray, block_count: int) -> np.ndarray:
    """Rows of coefficients -> (rows, K) block sup norms from the tent heights."""
    coeffs = np.atleast_2d(coeffs)
    padded = np.zeros((coeffs.shape[0], 2**block_count))
    padded[:, : coeffs.shape[1]] = coeffs
    out = np.empty((coeffs.shape[0], block_count))
    # block 0 is xi_1 t + xi_2 phi_2(t): extrema at t = 1/2 and t = 1
    out[:, 0] = np.maximum(np.abs(padded[:, 0]), np.abs(padded[:, 0] + padded[:, 1]) / 2.0)
    for k in range(1, block_count):
        out[:, k] = 2.0 ** (-1.0 - k / 2.0) * np.max(np.abs(padded[:, 2**k : 2 ** (k + 1)]), axis=1)
    return out


def pure_block(xi: CoeffSeq) -> Optional[int]:
    """Level k >= 1 when every non-zero coefficient sits in block k, else None."""
    nz = np.flatnonzero(xi.coeffs) + 1
    if nz.size == 0 or nz[0] < 3:
        return None
    levels = {haar.split_index(int(n))[0] for n in nz}
    return levels.pop() if len(levels) == 1 else None


def ciesielski_equivalence_check(
    x: Union[CoeffSeq, DyadicPath], alpha: float, sampler: Optional[ReplicateSampler] = None
) -> ExperimentReport:
    """Path-computed vs closed-form sup-block norm, and the pure-block ratio 2^(a-2).

    A path is first expanded in the Schauder basis through its Haar
    coefficients, so a level-L path gives 2^L coefficients.
    """
    config: Dict[str, Any] = {"alpha": alpha}
    if isinstance(x, DyadicPath):
        xi = haar.analyze(x)
        config["path_level"] = x.level
    else:
        xi = x
    block_count = depth_for(xi.size)
    schedule = dyadic_schedule(alpha, block_count)
    config.update(coefficients=xi.size, schedule=schedule.to_dict())
    report = ExperimentReport(
        name="ciesielski",
        config=config,
        seed=sampler.seed if sampler is not None else 0,
        replicates=1,
    )
    with timed(report):
        _compare(report, xi.coeffs[None, :], schedule, alpha)
        seq = haar.ciesielski_seq_norm(xi, alpha).value
        path_norm = float(
            np.max(
                block_profile_batch(xi.coeffs[None, :], schedule, SchauderModel(), block_count)[0]
                * schedule.weights()
            )
        )
        level = pure_block(xi)
        if seq == 0.0:
            report.check("zero_norms", path_norm, 0.0, sequence_norm=seq)
        elif level is not None:
            ratio = path_norm / seq
            report.check(
                "pure_block_ratio",
                abs(ratio - equivalence_constant(alpha)),
                0.0,
                margin=ALGEBRAIC_TOL,
                ratio=ratio,
                expected=equivalence_constant(alpha),
                k=level,
            )
        else:
            report.note("ratio", path_norm / seq, sup_block=path_norm, sequence_norm=seq)
    return report


def ciesielski_batch(
    alpha: float, depth: int, count: int, sampler: ReplicateSampler
) -> ExperimentReport:
    """Random coefficient vectors over blocks 1..depth, plus each of their pure blocks."""
    if depth < 1:
        raise CoefficientError(f"depth must be >= 1, got {depth}")
    block_count = depth + 1
    schedule = dyadic_schedule(alpha, block_count)
    report = new_report(
        "ciesielski", sampler, count, alpha=alpha, depth=depth, schedule=schedule.to_dict()
    )
    with timed(report):
        coeffs = sampler.gaussians(count, 2**block_count, StreamTag.CIESIELSKI)
        coeffs[:, :2] = 0.0
        _compare(report, coeffs, schedule, alpha)

        weights = haar.ciesielski_weights(2**block_count, alpha)
        worst = 0.0
        for k in range(1, block_count):
            pure = np.zeros_like(coeffs)
            pure[:, 2**k : 2 ** (k + 1)] = coeffs[:, 2**k : 2 ** (k + 1)]
            profile = block_profile_batch(pure, schedule, SchauderModel(), block_count)
            sup_block = np.max(profile * schedule.weights(), axis=1)
            seq = np.max(weights * np.abs(pure), axis=1)
            worst = max(worst, float(np.max(np.abs(sup_block / seq - equivalence_constant(alpha)))))
        report.check(
            "pure_block_ratio",
            worst,
            0.0,
            margin=ALGEBRAIC_TOL,
            expected=equivalence_constant(alpha),
        )
    return report


def _compare(
    report: ExperimentReport, coeffs: np.ndarray, schedule: BlockSchedule, alpha: float
) -> None:
    block_count = schedule.block_count
    weights = schedule.weights()
    from_paths = np.max(
        block_profile_batch(coeffs, schedule, SchauderModel(), block_count) * weights, axis=1
    )
    closed = np.max(closed_form_profile(coeffs, block_count) * weights, axis=1)
    gap = np.abs(from_paths - closed) / np.maximum(1.0, closed)
    report.check(
        "closed_form_vs_paths",
        float(gap.max()),
        0.0,
        margin=ALGEBRAIC_TOL,
        max_norm=float(closed.max()),
    )
    report.tables["norms"] = [
        {"row": i, "path_norm": float(p), "closed_form": float(c)}
        for i, (p, c) in enumerate(zip(from_paths[:1000], closed[:1000]))
    ]
