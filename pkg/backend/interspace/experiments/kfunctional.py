"""Real-interpolation K-functional between the sup norm and H^1_0.

    K(t, p) = inf_{p = a + b} ||a|| + t |b|_H

with b ranging over level-L paths. Writing s = ||p - b||, this is
min_s s + t phi(s) where phi(s) is the least H^1 norm within sup distance
s of p. phi is convex and nonincreasing, phi(0) = |p|_H and
phi(||p||) = 0, so the outer problem is a bounded convex line search and
each inner problem a bound-constrained least squares.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from interspace import paths
from interspace.core.report import ExperimentReport
from interspace.core.rng import StreamTag
from interspace.core.sampling import ReplicateSampler
from interspace.errors import ExperimentError, SolverError
from interspace.experiments.base import new_report, timed
from interspace.models import BasisModel
from interspace.paths import DyadicPath

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 200
T_GRID_POINTS = 40
T_GRID_RANGE = (2.0**-20, 2.0**20)


def default_t_grid(points: int = T_GRID_POINTS) -> np.ndarray:
    return np.geomspace(T_GRID_RANGE[0], T_GRID_RANGE[1], points)


def _difference_operator(level: int) -> np.ndarray:
    """A with |A b|_2 = H^1 norm of the path (0, b_1, ..., b_N)."""
    size = 2**level
    a = np.eye(size) - np.eye(size, k=-1)
    return a * 2.0 ** (level / 2.0)


def min_h1_within(
    p: DyadicPath, s: float, max_iter: int = DEFAULT_MAX_ITER, t: float = float("nan")
) -> float:
    """phi(s): least H^1 norm over paths b with max_i |b_i - p_i| <= s."""
    if s <= 0.0:
        return paths.h1_seminorm(p)
    if s >= paths.sup_norm(p):
        return 0.0
    values = p.samples[1:]
    result = optimize.lsq_linear(
        _difference_operator(p.level),
        np.zeros(values.size),
        bounds=(values - s, values + s),
        method="bvls",
        max_iter=max_iter,
    )
    if result.status <= 0:
        raise SolverError(
            t, f"inner least squares at s={s:.3e} stopped with status {result.status}"
        )
    return float(np.linalg.norm(result.fun))


@dataclass(frozen=True)
class KValue:
    t: float
    value: float
    split: float

    def to_dict(self) -> dict:
        return {"t": self.t, "value": self.value, "split": self.split}


def k_functional(
    p: DyadicPath, t: float, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER
) -> KValue:
    """K(t, p), never above min(||p||, t |p|_H)."""
    if t <= 0.0:
        raise ExperimentError("kfunctional", f"t must be positive, got {t}")
    sup = paths.sup_norm(p)
    h1 = paths.h1_seminorm(p)
    candidates = [(t * h1, 0.0), (sup, sup)]
    if sup > 0.0:
        result = optimize.minimize_scalar(
            lambda s: s + t * min_h1_within(p, s, max_iter, t),
            bounds=(0.0, sup),
            method="bounded",
            options={"xatol": tol * max(sup, 1.0), "maxiter": max_iter},
        )
        if not result.success:
            raise SolverError(t, f"line search did not converge: {result.message}")
        candidates.append((float(result.fun), float(result.x)))
    value, split = min(candidates)
    return KValue(t=t, value=value, split=split)


def theta_norm(
    p: DyadicPath,
    theta: float,
    t_grid: Optional[Sequence[float]] = None,
    tol: float = DEFAULT_TOL,
) -> float:
    """max over the t grid of t^-theta K(t, p)."""
    if not 0.0 < theta < 1.0:
        raise ExperimentError("theta", f"theta must be in (0, 1), got {theta}")
    grid = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    return max(t**-theta * k_functional(p, float(t), tol).value for t in grid)


def k_functional_profile(
    p: DyadicPath, t_grid: Sequence[float], tol: float = DEFAULT_TOL
) -> list:
    return [k_functional(p, float(t), tol) for t in t_grid]


def kfunctional_experiment(
    model: BasisModel,
    level: int,
    count: int,
    sampler: ReplicateSampler,
    t_grid: Optional[Sequence[float]] = None,
    tol: float = DEFAULT_TOL,
    path: Optional[DyadicPath] = None,
) -> ExperimentReport:
    """Feasible-point bounds, monotonicity and concavity of K(., p) on random paths."""
    grid = np.sort(default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float))
    report = new_report(
        "kfunctional", sampler, count, level=level, t_grid=grid.tolist(), tol=tol
    )
    with timed(report):
        if path is not None:
            samples = [path]
        else:
            cols = model.active(2**level)
            gaussians = sampler.gaussians(count, cols, StreamTag.KFUNCTIONAL)
            samples = [DyadicPath(row) for row in model.synthesize(gaussians, level)]

        bound_violations = 0
        monotone_violations = 0
        concave_violations = 0
        rows = []
        for index, p in enumerate(samples):
            sup, h1 = paths.sup_norm(p), paths.h1_seminorm(p)
            values = np.array([k.value for k in k_functional_profile(p, grid, tol)])
            scale = max(sup, 1.0)
            bound_violations += int(np.sum(values > np.minimum(sup, grid * h1) + tol * scale))
            monotone_violations += int(np.sum(np.diff(values) < -tol * scale))
            # concavity on a non-uniform grid: slopes must not increase
            steps = np.diff(grid)
            slopes = np.diff(values) / steps
            slack = 2.0 * tol * scale * (1.0 / steps[1:] + 1.0 / steps[:-1])
            concave_violations += int(np.sum(np.diff(slopes) > slack))
            if index < 10:
                rows.extend(
                    {"path": index, "t": float(t), "k": float(v)} for t, v in zip(grid, values)
                )
        report.check("feasible_point_bound", float(bound_violations), 0.0)
        report.check("monotone_in_t", float(monotone_violations), 0.0)
        report.check("concave_in_t", float(concave_violations), 0.0)
        report.tables["k_values"] = rows
    return report


def theta_norm_experiment(
    model: BasisModel,
    theta: float,
    levels: Sequence[int],
    replicates: int,
    sampler: ReplicateSampler,
    t_grid: Optional[Sequence[float]] = None,
    tol: float = DEFAULT_TOL,
) -> ExperimentReport:
    """Distribution of ||X||_theta across resolutions; reports only, decides nothing."""
    if not 0.0 < theta < 1.0:
        raise ExperimentError("theta", f"theta must be in (0, 1), got {theta}")
    grid = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    report = new_report(
        "theta",
        sampler,
        replicates,
        theta=theta,
        levels=list(levels),
        t_grid=[float(t) for t in grid],
    )
    with timed(report):
        rows = []
        for level in levels:
            cols = model.active(2**level)
            gaussians = sampler.gaussians(replicates, cols, StreamTag.THETA)
            synthesized = model.synthesize(gaussians, level)
            values = np.array([theta_norm(DyadicPath(r), theta, grid, tol) for r in synthesized])
            quantiles = np.quantile(values, [0.1, 0.5, 0.9])
            report.note(
                f"theta_norm_L{level}",
                float(quantiles[1]),
                q10=float(quantiles[0]),
                q90=float(quantiles[2]),
                finite=int(np.isfinite(values).sum()),
            )
            counts, edges = np.histogram(values[np.isfinite(values)], bins=10)
            rows.extend(
                {"level": level, "lower": float(lo), "upper": float(hi), "count": int(c)}
                for lo, hi, c in zip(edges[:-1], edges[1:], counts)
            )
            logger.debug("theta_norm level=%s median=%.4g", level, quantiles[1])
        report.tables["histogram"] = rows
    return report
