"""Exponential square moments C_rho = E exp(rho ||X||^2)."""

from __future__ import annotations

import logging
import math
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from interspace.blocks import BlockSchedule
from interspace.core.report import ExperimentReport
from interspace.core.rng import StreamTag
from interspace.core.sampling import ReplicateSampler
from interspace.errors import ExperimentError
from interspace.experiments.base import new_report, table_rows, timed
from interspace.models import BasisModel, grid
from interspace.norms import block_profile_batch

logger = logging.getLogger(__name__)

NAME = "fernique"

DEFAULT_RHO_GRID = (0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5, 0.75)

# Half-sample vs full-sample relative change tolerated for a stable rho.
STABILITY_TOL = 0.02

ORACLE_TOL = 0.05


class NormSpec(str, Enum):
    SUP = "sup"
    SUM_BLOCK = "sum-block"
    SUP_BLOCK = "sup-block"
    RUNNING_MAX = "running-max"


def default_truncation(model: BasisModel, level: int, schedule: Optional[BlockSchedule]) -> int:
    if schedule is not None:
        return schedule.covered
    return model.active(2**level)


def norm_samples(
    model: BasisModel,
    norm_spec: NormSpec,
    replicates: int,
    sampler: ReplicateSampler,
    level: int,
    tag: int,
    schedule: Optional[BlockSchedule] = None,
    truncation: Optional[int] = None,
) -> np.ndarray:
    """One norm value per replicate of X_N = sum_{j <= N} g_j e_j."""
    norm_spec = NormSpec(norm_spec)
    if norm_spec in (NormSpec.SUM_BLOCK, NormSpec.SUP_BLOCK) and schedule is None:
        raise ExperimentError(NAME, f"norm '{norm_spec.value}' needs a block schedule")
    cols = truncation or default_truncation(model, level, schedule)
    weights = schedule.weights() if schedule is not None else None

    def kernel(g: np.ndarray, _: int) -> np.ndarray:
        if norm_spec is NormSpec.SUM_BLOCK:
            return block_profile_batch(g, schedule, model, level) @ weights
        if norm_spec is NormSpec.SUP_BLOCK:
            return np.max(block_profile_batch(g, schedule, model, level) * weights, axis=1)
        values = model.synthesize(g, level)
        if norm_spec is NormSpec.RUNNING_MAX:
            return np.max(values, axis=1)
        return np.max(np.abs(values), axis=1)

    return np.concatenate(sampler.map(kernel, replicates, cols, tag))


def exp_moment(values: np.ndarray, rho: float) -> float:
    with np.errstate(over="ignore"):
        return float(np.mean(np.exp(rho * values**2)))


def one_dimensional_scale(model: BasisModel, level: int) -> Optional[float]:
    """sup|e_1| when the model is one-dimensional, else None."""
    if model.dimension != 1:
        return None
    return float(np.max(np.abs(model.basis_values(1, grid(level)))))


def analytic_moment(rho: float, scale: float) -> float:
    """E exp(rho s^2 g^2) = (1 - 2 rho s^2)^(-1/2), infinite past 1 / (2 s^2)."""
    slack = 1.0 - 2.0 * rho * scale**2
    return math.inf if slack <= 0.0 else slack**-0.5


def estimate_fernique(
    model: BasisModel,
    norm_spec: NormSpec,
    rho_grid: Sequence[float],
    replicates: int,
    sampler: ReplicateSampler,
    level: int,
    schedule: Optional[BlockSchedule] = None,
) -> ExperimentReport:
    """Monte Carlo C_rho over a grid, with the largest stable rho."""
    norm_spec = NormSpec(norm_spec)
    rho_grid = sorted(float(r) for r in rho_grid)
    if not rho_grid or rho_grid[0] <= 0.0:
        raise ExperimentError(NAME, "rho grid must be non-empty and positive")
    report = new_report(
        NAME,
        sampler,
        replicates,
        norm=norm_spec.value,
        rho_grid=rho_grid,
        level=level,
        schedule=schedule.to_dict() if schedule is not None else None,
    )
    with timed(report):
        values = norm_samples(
            model, norm_spec, replicates, sampler, level, StreamTag.FERNIQUE, schedule
        )
        half = values[: replicates // 2]
        scale = one_dimensional_scale(model, level) if norm_spec is NormSpec.SUP else None
        rows = []
        for rho in rho_grid:
            with np.errstate(over="ignore"):
                terms = np.exp(rho * values**2)
            full_c = float(np.mean(terms))
            half_c = exp_moment(half, rho)
            finite = math.isfinite(full_c) and math.isfinite(half_c)
            change = abs(half_c - full_c) / full_c if finite else math.inf
            stable = change < STABILITY_TOL
            dominance = float(np.max(terms) / np.sum(terms)) if finite else 1.0
            row = {
                "rho": rho,
                "c_hat": full_c,
                "c_half": half_c,
                "relative_change": change,
                "stable": stable,
                "dominance": dominance,
            }
            if scale is not None:
                exact = analytic_moment(rho, scale)
                row["analytic"] = exact
                if not math.isfinite(exact):
                    report.flag(f"divergent_rho_{rho:g}_flagged", change, not stable, rho=rho)
                elif 4.0 * rho * scale**2 <= 1.0:
                    # finite-variance range: the Monte Carlo mean is trustworthy
                    report.check(
                        f"analytic_rho_{rho:g}",
                        abs(full_c - exact) / exact,
                        ORACLE_TOL,
                        rho=rho,
                        c_hat=full_c,
                        analytic=exact,
                    )
            rows.append(row)
        report.tables["moments"] = rows

        stable_rhos = [r["rho"] for r in rows if r["stable"]]
        if not stable_rhos:
            raise ExperimentError(NAME, "no grid rho is stable; refine the grid toward 0")
        rho_hat = max(stable_rhos)
        best = next(r for r in rows if r["rho"] == rho_hat)
        report.note("rho_hat", rho_hat, c_hat=best["c_hat"], dominance=best["dominance"])
        report.flag("stable_set_nonempty", float(len(stable_rhos)), True)
        report.tables["norm_quantiles"] = table_rows(
            {
                "quantile": [0.5, 0.9, 0.99, 1.0],
                "value": np.quantile(values, [0.5, 0.9, 0.99, 1.0]).tolist(),
            }
        )
        logger.info("fernique rho_hat=%s c_hat=%.4g", rho_hat, best["c_hat"])
    return report


def fernique_rho(report: ExperimentReport) -> float:
    """The largest stable rho recorded in a Fernique report."""
    for item in report.items:
        if item.name == "rho_hat":
            return float(item.estimate)
    raise ExperimentError(NAME, "report carries no stable rho")
