"""Exponential tightness of the scaled measures mu_eps = law(eps X).

p(eps) = P(||X|| > r / eps) decays like exp(-rho r^2 / eps^2). The slope
of log p against eps^-2 is fitted by weighted least squares together
with an intercept and a log(eps) term that absorbs the polynomial
prefactor of Gaussian tails.
"""

from __future__ import annotations

import logging
import math
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy import stats

from interspace.blocks import BlockSchedule
from interspace.core.report import ExperimentReport
from interspace.core.rng import StreamTag
from interspace.core.sampling import ReplicateSampler
from interspace.core.stats import SE_MARGIN, LinearFit, weighted_least_squares
from interspace.errors import ExperimentError
from interspace.experiments.base import new_report, timed
from interspace.experiments.fernique import (
    DEFAULT_RHO_GRID,
    NormSpec,
    estimate_fernique,
    fernique_rho,
    norm_samples,
    one_dimensional_scale,
)
from interspace.models import BasisModel, KLSineModel, SchauderModel

logger = logging.getLogger(__name__)

NAME = "tightness"

# Rare-event policy: grid points need at least this many hits.
MIN_HITS = 30

SLOPE_TOL = 0.10

_MIN_POINTS = 4


def default_eps_grid(radius: float = 1.0, points: int = 26) -> List[float]:
    """eps with r / eps spread over [2, 4.5]."""
    return [radius / x for x in np.linspace(2.0, 4.5, points)]


def tail_design(eps: np.ndarray) -> np.ndarray:
    return np.column_stack([np.ones_like(eps), eps**-2, np.log(eps)])


def fit_tail_slope(eps: np.ndarray, log_p: np.ndarray, weights: np.ndarray) -> LinearFit:
    """Coefficients (a, s, c) of log p = a + s eps^-2 + c log eps."""
    return weighted_least_squares(tail_design(eps), log_p, weights)


def tail_oracle(model: BasisModel, norm_spec: NormSpec, level: int) -> Optional[Callable]:
    """Exact P(||X|| > x) where one is known, else None."""
    norm_spec = NormSpec(norm_spec)
    scale = one_dimensional_scale(model, level)
    if norm_spec is NormSpec.SUP and scale is not None:
        return lambda x: 2.0 * stats.norm.sf(np.asarray(x) / scale)
    bm = isinstance(model, (SchauderModel, KLSineModel)) and model.dimension is None
    if norm_spec is NormSpec.RUNNING_MAX and bm:
        # reflection principle
        return lambda x: 2.0 * stats.norm.sf(np.asarray(x))
    return None


def tightness_experiment(
    model: BasisModel,
    norm_spec: NormSpec,
    radius: float,
    eps_grid: Sequence[float],
    replicates: int,
    sampler: ReplicateSampler,
    level: int,
    schedule: Optional[BlockSchedule] = None,
    rho_grid: Sequence[float] = DEFAULT_RHO_GRID,
    fernique_replicates: Optional[int] = None,
) -> ExperimentReport:
    norm_spec = NormSpec(norm_spec)
    if radius <= 0.0:
        raise ExperimentError(NAME, f"radius must be positive, got {radius}")
    eps = np.sort(np.asarray(list(eps_grid), dtype=float))[::-1]
    if eps.size == 0 or eps[-1] <= 0.0:
        raise ExperimentError(NAME, "eps grid must be non-empty and positive")
    report = new_report(
        NAME,
        sampler,
        replicates,
        norm=norm_spec.value,
        radius=radius,
        eps_grid=eps.tolist(),
        level=level,
        rho_grid=list(rho_grid),
        schedule=schedule.to_dict() if schedule is not None else None,
    )
    with timed(report):
        values = norm_samples(
            model, norm_spec, replicates, sampler, level, StreamTag.TIGHTNESS, schedule
        )
        thresholds = radius / eps
        hits = np.array([int(np.sum(values > x)) for x in thresholds])
        p_hat = hits / replicates

        report.check("monotone_in_eps", float(np.sum(np.diff(p_hat) > 0.0)), 0.0)

        kept = hits >= MIN_HITS
        if int(kept.sum()) < _MIN_POINTS:
            raise ExperimentError(
                NAME, f"only {int(kept.sum())} grid points reach {MIN_HITS} hits; raise eps or R"
            )
        weights = hits[kept] / (1.0 - p_hat[kept])
        fit = fit_tail_slope(eps[kept], np.log(p_hat[kept]), weights)
        slope, slope_se = float(fit.coefficients[1]), float(fit.std_errors[1])
        report.note("slope", slope, std_error=slope_se, points=int(kept.sum()))

        # rho from the Fernique estimate; the running max is dominated by the sup norm
        fern_spec = NormSpec.SUP if norm_spec is NormSpec.RUNNING_MAX else norm_spec
        fern = estimate_fernique(
            model, fern_spec, rho_grid, fernique_replicates or replicates, sampler, level, schedule
        )
        rho_hat = fernique_rho(fern)
        report.check(
            "slope_vs_fernique",
            slope,
            -rho_hat * radius**2,
            margin=SE_MARGIN * slope_se,
            std_error=slope_se,
            rho_hat=rho_hat,
        )

        # exponential Chebyshev: P(v > x) <= E exp(rho v^2) exp(-rho x^2), exact on the sample
        with np.errstate(over="ignore"):
            c_rho = float(np.mean(np.exp(rho_hat * values**2)))
        chebyshev = c_rho * np.exp(-rho_hat * thresholds**2)
        violations = int(np.sum(p_hat > chebyshev * (1.0 + 1e-12)))
        report.check("exponential_chebyshev", float(violations), 0.0, c_rho=c_rho, rho=rho_hat)

        oracle = tail_oracle(model, norm_spec, level)
        oracle_p = np.full(eps.size, math.nan)
        if oracle is not None:
            oracle_p = oracle(thresholds)
            oracle_fit = fit_tail_slope(eps[kept], np.log(oracle_p[kept]), weights)
            oracle_slope = float(oracle_fit.coefficients[1])
            tol = max(SLOPE_TOL * abs(oracle_slope), SE_MARGIN * slope_se)
            report.check(
                "slope_vs_oracle",
                abs(slope - oracle_slope),
                tol,
                std_error=slope_se,
                slope=slope,
                oracle_slope=oracle_slope,
                rate=-(radius**2) / 2.0,
            )

        report.tables["tail"] = [
            {
                "eps": float(e),
                "threshold": float(x),
                "hits": int(h),
                "p_hat": float(p),
                "eps2_log_p": float(e**2 * math.log(p)) if p > 0 else None,
                "oracle_p": None if math.isnan(o) else float(o),
                "kept": bool(k),
            }
            for e, x, h, p, o, k in zip(eps, thresholds, hits, p_hat, oracle_p, kept)
        ]
        report.tables["fernique"] = fern.tables.get("moments", [])
        logger.info("tightness slope=%.4f se=%.4f rho_hat=%s", slope, slope_se, rho_hat)
    return report
