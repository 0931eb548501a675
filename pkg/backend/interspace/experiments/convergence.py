"""Finiteness of the block norms along sample paths.

Z_n = sum_{k <= n} 2^(k a) ||W_k|| (sum variant) or the running max (sup
variant). Both trajectories are nondecreasing; the sum variant's tail
jump Z_K - Z_n exceeds 2 * 2^-n with probability at most 2^-n.
"""

from __future__ import annotations

import logging
import math
from typing import Optional, Sequence

import numpy as np

from interspace.blocks import BlockSchedule, Variant, live_block_count
from interspace.core.report import ExperimentReport
from interspace.core.rng import StreamTag
from interspace.core.sampling import ReplicateSampler
from interspace.core.stats import SE_MARGIN, binomial_se
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

DEFAULT_QUANTILES = (0.01, 0.05, 0.1, 0.25, 0.5)


def trajectories(weighted: np.ndarray, variant: Variant) -> np.ndarray:
    """(R, K) weighted block norms -> (R, K) trajectories Z_0..Z_{K-1}."""
    if Variant(variant) is Variant.SUM:
        return np.cumsum(weighted, axis=1)
    return np.maximum.accumulate(weighted, axis=1)


def zn_convergence(
    model: BasisModel,
    schedule: BlockSchedule,
    replicates: int,
    sampler: ReplicateSampler,
    level: int,
    variant: Optional[Variant] = None,
    quantiles: Sequence[float] = DEFAULT_QUANTILES,
) -> ExperimentReport:
    variant = Variant(variant or schedule.variant)
    report = new_report(
        "zn-convergence",
        sampler,
        replicates,
        schedule=schedule.to_dict(),
        level=level,
        variant=variant.value,
        quantiles=list(quantiles),
    )
    with timed(report):
        weighted = weighted_blocks(model, schedule, level, replicates, sampler, StreamTag.ZN)
        z = trajectories(weighted, variant)
        final = z[:, -1]
        K = schedule.block_count

        violations = int(np.sum(np.diff(z, axis=1) < 0.0))
        report.check("monotone_trajectories", float(violations), 0.0)
        finite = np.isfinite(final)
        report.check("finite_fraction", 1.0 - float(finite.mean()), 0.0, finite=int(finite.sum()))

        jump_rows = []
        live = live_block_count(schedule, model)
        if live < K:
            logger.warning("zn_empty_blocks live=%s K=%s", live, K)
        if variant is Variant.SUM:
            for n in range(1, K - 1):
                jump = final - z[:, n]
                hits = int(np.sum(jump > 2.0 * 2.0**-n))
                # blocks n+1.. are all empty: the jump is identically zero
                empty = n + 1 >= live
                if empty:
                    report.note(
                        f"tail_jump_n{n}", hits / replicates, bound=2.0**-n, n=n, empty_tail=True
                    )
                else:
                    frequency_check(report, f"tail_jump_n{n}", hits, replicates, 2.0**-n, n=n)
                jump_rows.append(
                    {
                        "n": n,
                        "hits": hits,
                        "frequency": hits / replicates,
                        "bound": 2.0**-n,
                        "empty_tail": empty,
                    }
                )
        report.tables["tail_jump"] = jump_rows

        eps_grid = np.quantile(final, list(quantiles))
        ball_rows = []
        for q, eps in zip(quantiles, eps_grid):
            freq = float(np.mean(final < eps))
            report.flag(f"small_ball_q{q:g}", freq, freq > 0.0, eps=float(eps))
            ball_rows.append({"quantile": q, "eps": float(eps), "frequency": freq})
        report.tables["small_ball"] = ball_rows

        if variant is Variant.SUM:
            _independence_lower_bound(report, weighted, eps_grid, quantiles)
        else:
            _product_formula(report, weighted, eps_grid, quantiles)

        report.tables["trajectory"] = table_rows(
            {
                "n": list(range(K)),
                "mean": z.mean(axis=0).tolist(),
                "q50": np.quantile(z, 0.5, axis=0).tolist(),
                "q99": np.quantile(z, 0.99, axis=0).tolist(),
            }
        )
    return report


def _independence_lower_bound(
    report: ExperimentReport, weighted: np.ndarray, eps_grid: np.ndarray, quantiles: Sequence[float]
) -> None:
    # Z = Z_N + (Z - Z_N) with independent summands, split at the middle block.
    R, K = weighted.shape
    split = max(K // 2, 1)
    head = weighted[:, :split].sum(axis=1)
    rest = weighted[:, split:].sum(axis=1)
    total = head + rest
    for q, eps in zip(quantiles, eps_grid):
        joint = float(np.mean(total < eps))
        p_head = float(np.mean(head < eps / 2.0))
        p_rest = float(np.mean(rest < eps / 2.0))
        se = math.sqrt(
            binomial_se(joint, R) ** 2
            + (p_rest * binomial_se(p_head, R)) ** 2
            + (p_head * binomial_se(p_rest, R)) ** 2
        )
        report.check(
            f"independence_lower_bound_q{q:g}",
            p_head * p_rest - joint,
            0.0,
            margin=SE_MARGIN * se,
            std_error=se,
            joint=joint,
            product=p_head * p_rest,
            split=split,
        )


def _product_formula(
    report: ExperimentReport, weighted: np.ndarray, eps_grid: np.ndarray, quantiles: Sequence[float]
) -> None:
    R, _ = weighted.shape
    for q, eps in zip(quantiles, eps_grid):
        joint = float(np.mean(np.all(weighted <= eps, axis=1)))
        marginals = np.mean(weighted <= eps, axis=0)
        product = float(np.prod(marginals))
        se_terms = [binomial_se(joint, R) ** 2]
        for p in marginals:
            if p > 0:
                se_terms.append((product / p * binomial_se(float(p), R)) ** 2)
        se = math.sqrt(sum(se_terms))
        report.check(
            f"product_formula_q{q:g}",
            abs(joint - product),
            0.0,
            margin=SE_MARGIN * se,
            std_error=se,
            joint=joint,
            product=product,
        )


def borel_cantelli_check(
    model: BasisModel,
    schedule: BlockSchedule,
    eps: float,
    replicates: int,
    sampler: ReplicateSampler,
    level: int,
) -> ExperimentReport:
    """Sup variant: P(2^(k a)||W_k|| > eps) <= eps^-2 2^(-2k eta), a summable sequence."""
    if schedule.variant is not Variant.SUP:
        raise ExperimentError("borel-cantelli", "needs a sup-variant schedule")
    if eps <= 0.0:
        raise ExperimentError("borel-cantelli", f"eps must be positive, got {eps}")
    eta = float(schedule.eta or 0.0)
    report = new_report(
        "borel-cantelli", sampler, replicates, schedule=schedule.to_dict(), level=level, eps=eps
    )
    with timed(report):
        weighted = weighted_blocks(
            model, schedule, level, replicates, sampler, StreamTag.BOREL_CANTELLI
        )
        exceed = weighted > eps
        hits = exceed.sum(axis=0)
        ks = np.arange(schedule.block_count)
        bounds = np.minimum(eps**-2 * 2.0 ** (-2.0 * ks * eta), 1.0)
        # the schedule certifies no tail bound at n_0
        report.note("block_0_exceedance", float(hits[0]) / replicates, k=0)
        live = live_block_count(schedule, model)
        for k in ks[1:]:
            if k >= live:
                report.note(
                    f"block_{k}_exceedance",
                    float(hits[k]) / replicates,
                    bound=float(bounds[k]),
                    k=int(k),
                    empty_block=True,
                )
                continue
            frequency_check(
                report,
                f"block_{k}_exceedance",
                int(hits[k]),
                replicates,
                float(bounds[k]),
                k=int(k),
            )

        freqs = hits / replicates
        # sums run from k = 1; block frequencies are independent across k
        partial = np.concatenate([[0.0], np.cumsum(freqs[1:])])
        se = math.sqrt(sum(binomial_se(float(b), replicates) ** 2 for b in bounds[1:live]))
        decay = 2.0 ** (-2.0 * eta)
        series_limit = eps**-2 * decay / (1.0 - decay)
        report.check(
            "partial_sum_of_probabilities",
            float(partial[-1]),
            series_limit,
            margin=SE_MARGIN * se,
            std_error=se,
        )
        report.note(
            "mean_exceedances_per_path",
            float(exceed.sum(axis=1).mean()),
            max_exceedances=int(exceed.sum(axis=1).max()),
        )
        report.tables["exceedance"] = table_rows(
            {
                "k": ks.tolist(),
                "hits": hits.tolist(),
                "frequency": freqs.tolist(),
                "bound": bounds.tolist(),
                "partial_sum": partial.tolist(),
            }
        )
    return report
