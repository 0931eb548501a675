"""Gaussian mass of symmetric convex sets and their sections.

For B convex and centrally symmetric in R^d and F a linear subspace,
nu(B) <= nu'(F ∩ B), nu and nu' the standard Gaussians of R^d and F.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np
from scipy import stats

from interspace.blocks import BlockSchedule
from interspace.core.report import ExperimentReport
from interspace.core.rng import StreamTag
from interspace.core.sampling import ReplicateSampler
from interspace.core.stats import SE_MARGIN, binomial_se
from interspace.errors import ExperimentError
from interspace.experiments.base import new_report, timed, weighted_blocks
from interspace.haar import CoeffSeq
from interspace.models import BasisModel
from interspace.norms import rkhs_norm, sum_block_norm

logger = logging.getLogger(__name__)

_SYMMETRY_TOL = 1e-12


class BodyKind(str, Enum):
    BOX = "box"
    ELLIPSOID = "ellipsoid"
    POLYTOPE = "polytope"
    SPACE = "space"


@dataclass
class Body:
    """
    A convex body in R^d.

    box: |x_i| <= half_widths[i]
    ellipsoid: sum (x_i / half_widths[i])^2 <= 1
    polytope: normals @ x <= offsets, one row per halfspace
    space: all of R^d
    """

    kind: BodyKind
    dim: int
    half_widths: Optional[List[float]] = None
    normals: Optional[List[List[float]]] = None
    offsets: Optional[List[float]] = None
    center: Optional[List[float]] = None

    def __post_init__(self) -> None:
        self.kind = BodyKind(self.kind)
        if self.kind in (BodyKind.BOX, BodyKind.ELLIPSOID):
            if self.half_widths is None or len(self.half_widths) != self.dim:
                raise ExperimentError(
                    "concentration", f"{self.kind.value} needs {self.dim} half widths"
                )
            if min(self.half_widths) <= 0.0:
                raise ExperimentError("concentration", "half widths must be positive")
        if self.kind is BodyKind.POLYTOPE:
            if self.normals is None or self.offsets is None:
                raise ExperimentError("concentration", "polytope needs normals and offsets")
            if np.asarray(self.normals).shape != (len(self.offsets), self.dim):
                raise ExperimentError("concentration", "normals must be (halfspaces, dim)")

    def check_symmetric(self) -> None:
        if self.center is not None and np.any(np.abs(self.center) > _SYMMETRY_TOL):
            raise ExperimentError("concentration", f"body is centred at {self.center}, not at 0")
        if self.kind is BodyKind.POLYTOPE:
            normals = np.asarray(self.normals, dtype=float)
            offsets = np.asarray(self.offsets, dtype=float)
            for a, b in zip(normals, offsets):
                mirrored = np.all(np.abs(normals + a) < 1e-9, axis=1) & (np.abs(offsets - b) < 1e-9)
                if not mirrored.any():
                    raise ExperimentError(
                        "concentration", f"halfspace {a.tolist()} <= {b} has no mirror"
                    )

    def contains(self, points: np.ndarray, scale: float = 1.0) -> np.ndarray:
        """Membership of rows of ``points`` in ``scale * body``."""
        points = np.atleast_2d(points)
        shift = np.asarray(self.center, dtype=float) if self.center is not None else 0.0
        x = (points - shift) / scale
        if self.kind is BodyKind.SPACE:
            return np.ones(x.shape[0], dtype=bool)
        if self.kind is BodyKind.BOX:
            return np.all(np.abs(x) <= np.asarray(self.half_widths), axis=1)
        if self.kind is BodyKind.ELLIPSOID:
            return np.sum((x / np.asarray(self.half_widths)) ** 2, axis=1) <= 1.0
        normals = np.asarray(self.normals, dtype=float)
        return np.all(x @ normals.T <= np.asarray(self.offsets), axis=1)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "dim": self.dim,
            "half_widths": self.half_widths,
            "normals": self.normals,
            "offsets": self.offsets,
            "center": self.center,
        }


@dataclass
class Subspace:
    """F = span of the given rows, orthonormalized."""

    spans: List[List[float]] = field(default_factory=list)

    def basis(self, dim: int) -> np.ndarray:
        rows = np.asarray(self.spans, dtype=float)
        if rows.ndim != 2 or rows.shape[1] != dim or rows.shape[0] == 0:
            raise ExperimentError(
                "concentration", f"subspace rows must be non-empty vectors of length {dim}"
            )
        q, r = np.linalg.qr(rows.T)
        rank = int(np.sum(np.abs(np.diag(r)) > 1e-12))
        if rank < rows.shape[0]:
            raise ExperimentError("concentration", "subspace spanning vectors are dependent")
        return q[:, :rank]

    def coordinate_axes(self, dim: int) -> Optional[List[int]]:
        """Axis indices when F is spanned by coordinate vectors, else None."""
        rows = np.asarray(self.spans, dtype=float)
        axes = []
        for row in rows:
            nz = np.flatnonzero(row)
            if nz.size != 1:
                return None
            axes.append(int(nz[0]))
        return sorted(set(axes)) if len(set(axes)) == len(axes) else None


def box_mass(half_widths: Sequence[float]) -> float:
    return float(np.prod([2.0 * stats.norm.cdf(a) - 1.0 for a in half_widths]))


def concentration_check(
    dim: int,
    subspace: Subspace,
    body: Body,
    replicates: int,
    sampler: ReplicateSampler,
    scales: Sequence[float] = (1.0,),
) -> ExperimentReport:
    """nu(sB) <= nu'(F ∩ sB) for every scale s, by independent Monte Carlo."""
    if not 2 <= dim <= 4:
        raise ExperimentError("concentration", f"dim must be in 2..4, got {dim}")
    if body.dim != dim:
        raise ExperimentError("concentration", f"body lives in R^{body.dim}, not R^{dim}")
    body.check_symmetric()
    q = subspace.basis(dim)
    report = new_report(
        "concentration",
        sampler,
        replicates,
        dim=dim,
        subspace=subspace.spans,
        body=body.to_dict(),
        scales=list(scales),
    )
    with timed(report):
        full = sampler.gaussians(replicates, dim, StreamTag.CONCENTRATION_FULL)
        sub = sampler.gaussians(replicates, q.shape[1], StreamTag.CONCENTRATION_SUB) @ q.T
        axes = subspace.coordinate_axes(dim) if body.kind is BodyKind.BOX else None
        rows = []
        for s in scales:
            nu = float(np.mean(body.contains(full, s)))
            nu_sub = float(np.mean(body.contains(sub, s)))
            se = math.sqrt(binomial_se(nu, replicates) ** 2 + binomial_se(nu_sub, replicates) ** 2)
            report.check(
                f"section_dominates_s{s:g}",
                nu,
                nu_sub,
                margin=SE_MARGIN * se,
                std_error=se,
                scale=s,
            )
            row = {"scale": s, "nu": nu, "nu_section": nu_sub, "std_error": se}
            if axes is not None:
                widths = [s * w for w in body.half_widths]
                exact = box_mass(widths)
                exact_sub = box_mass([widths[i] for i in axes])
                report.check(
                    f"box_oracle_s{s:g}",
                    abs(nu - exact),
                    0.0,
                    margin=SE_MARGIN * binomial_se(exact, replicates),
                    analytic=exact,
                )
                report.check(
                    f"box_section_oracle_s{s:g}",
                    abs(nu_sub - exact_sub),
                    0.0,
                    margin=SE_MARGIN * binomial_se(exact_sub, replicates),
                    analytic=exact_sub,
                )
                report.check(f"box_analytic_order_s{s:g}", exact, exact_sub)
                row.update({"nu_exact": exact, "nu_section_exact": exact_sub})
            rows.append(row)
        report.tables["masses"] = rows
    return report


def line_concentration_check(
    model: BasisModel,
    schedule: BlockSchedule,
    x: CoeffSeq,
    a_grid: Sequence[float],
    replicates: int,
    sampler: ReplicateSampler,
    level: int,
) -> ExperimentReport:
    """P(||X_{n_K}||_i <= a) <= 2 Phi(a |x|_H / ||x||_i) - 1 along the line through x."""
    x_norm = sum_block_norm(x, schedule, model, level)
    x_h = rkhs_norm(x)
    if x_norm <= 0.0 or x_h <= 0.0:
        raise ExperimentError("line-concentration", "direction x must be non-zero")
    report = new_report(
        "line-concentration",
        sampler,
        replicates,
        schedule=schedule.to_dict(),
        level=level,
        x=x.coeffs.tolist(),
        a_grid=list(a_grid),
    )
    with timed(report):
        weighted = weighted_blocks(model, schedule, level, replicates, sampler, StreamTag.LINE)
        norms = weighted.sum(axis=1)
        rows = []
        for a in a_grid:
            lhs = float(np.mean(norms <= a))
            rhs = float(2.0 * stats.norm.cdf(a * x_h / x_norm) - 1.0)
            se = binomial_se(lhs, replicates)
            report.check(f"line_bound_a{a:g}", lhs, rhs, margin=SE_MARGIN * se, std_error=se, a=a)
            rows.append({"a": a, "p_ball": lhs, "p_line": rhs, "std_error": se})
        report.tables["line"] = rows
        report.note("direction_ratio", x_norm / x_h, sum_block=x_norm, rkhs=x_h)
    return report
