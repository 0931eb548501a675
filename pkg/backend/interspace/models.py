"""Gaussian measures presented as series X = sum_n g_n e_n.

Each model is an orthonormal system (e_n) of the RKHS realised as
functions on [0, 1]. ``dimension`` optionally truncates the series: a
truncated model is a Gaussian measure in its own right whose tail beyond
``dimension`` is exactly zero.

Shipped kinds:
    schauder-bm   e_n = phi_n (Lévy-Ciesielski construction of Brownian motion)
    kl-sine-bm    e_n = sqrt(2) sin((n - 1/2) pi t) / ((n - 1/2) pi)
    kl-bridge     e_n = sqrt(2) sin(n pi t) / (n pi)
    custom        basis paths read from a JSON file (see docs/formats.md)
"""

from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Dict, NamedTuple, Optional, Tuple

import numpy as np

from interspace import haar
from interspace.core.rng import GaussianStream, StreamTag
from interspace.core.sampling import ReplicateSampler
from interspace.core.stats import moments_estimate, one_sided_z
from interspace.errors import ModelError
from interspace.haar import CoeffSeq
from interspace.paths import DyadicPath

logger = logging.getLogger(__name__)

# Gauss-Legendre nodes per panel for RKHS Gram matrices.
_GRAM_NODES = 12

# Columns per segment when tracking running sup norms.
_SEGMENT = 64


def grid(level: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, 2**level + 1)


class BasisModel(ABC):
    """
    Abstract Gaussian series model.

    Subclasses provide point evaluation of e_n and of its derivative;
    everything else (grids, synthesis, tails) is derived here.
    """

    kind: str = "abstract"

    def __init__(self, dimension: Optional[int] = None) -> None:
        if dimension is not None and dimension < 1:
            raise ModelError(self.kind, f"dimension must be >= 1, got {dimension}")
        self.dimension = dimension

    # ─────────────────────────────────────────────────
    # Basis evaluation
    # ─────────────────────────────────────────────────

    @abstractmethod
    def basis_values(self, n: int, times: np.ndarray) -> np.ndarray:
        """e_n evaluated at ``times`` (ignores truncation)."""

    @abstractmethod
    def basis_derivative(self, n: int, times: np.ndarray) -> np.ndarray:
        """e_n' evaluated at ``times`` (ignores truncation)."""

    def quadrature_panels(self, count: int) -> int:
        """Panels on which the first ``count`` derivatives are smooth."""
        return max(64, 2 * count)

    def active(self, count: int) -> int:
        """Number of non-zero basis elements among the first ``count``."""
        return count if self.dimension is None else min(count, self.dimension)

    def check_level(self, count: int, level: int) -> None:
        """Raise if ``level`` cannot represent the first ``count`` elements."""
        if level < 0:
            raise ModelError(self.kind, f"grid level must be >= 0, got {level}")

    def support(self, n: int, level: int) -> slice:
        """Grid indices outside of which e_n vanishes."""
        return slice(0, 2**level + 1)

    def basis_matrix(self, count: int, level: int) -> np.ndarray:
        """Rows e_1..e_count on the level-L grid (zero rows past ``dimension``)."""
        return _basis_matrix(self, count, level)

    def synthesize(self, coeffs: np.ndarray, level: int, start: int = 0) -> np.ndarray:
        """Rows of coefficients for e_{start+1}.. -> rows of grid values."""
        coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
        stop = start + coeffs.shape[1]
        live = self.active(stop) - start
        if live <= 0:
            return np.zeros((coeffs.shape[0], 2**level + 1))
        self.check_level(start + live, level)
        block = self.basis_matrix(start + live, level)[start:]
        return coeffs[:, :live] @ block

    def evaluate(self, coeffs: np.ndarray, times: np.ndarray) -> np.ndarray:
        """Rows of coefficients -> rows of values at arbitrary times."""
        coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
        times = np.asarray(times, dtype=float)
        live = self.active(coeffs.shape[1])
        values = np.array([self.basis_values(n, times) for n in range(1, live + 1)])
        return coeffs[:, :live] @ values.reshape(live, times.size)

    def remainder_bound(self, j_max: int) -> Optional[float]:
        """Upper bound of E||sum_{j > j_max} g_j e_j||^2, or None if unknown."""
        if self.dimension is not None and j_max >= self.dimension:
            return 0.0
        return None

    def to_dict(self) -> dict:
        return {"kind": self.kind, "dimension": self.dimension}

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dimension={self.dimension})"


@lru_cache(maxsize=4)
def _basis_matrix(model: BasisModel, count: int, level: int) -> np.ndarray:
    times = grid(level)
    out = np.zeros((count, times.size))
    for n in range(1, model.active(count) + 1):
        window = model.support(n, level)
        out[n - 1, window] = model.basis_values(n, times[window])
    out.setflags(write=False)
    return out


class SchauderModel(BasisModel):
    """Brownian motion through the Schauder functions phi_n."""

    kind = "schauder-bm"

    def basis_values(self, n: int, times: np.ndarray) -> np.ndarray:
        return np.asarray(haar.schauder_eval(n, times))

    def basis_derivative(self, n: int, times: np.ndarray) -> np.ndarray:
        return np.asarray(haar.haar_eval(n, times))

    def quadrature_panels(self, count: int) -> int:
        return 2 ** haar.required_level(count)

    def check_level(self, count: int, level: int) -> None:
        super().check_level(count, level)
        needed = haar.required_level(self.active(count))
        if level < needed:
            raise ModelError(self.kind, f"{count} basis functions need grid level >= {needed}")

    def support(self, n: int, level: int) -> slice:
        if n == 1:
            return slice(0, 2**level + 1)
        k, j = haar.split_index(n)
        width = 2 ** (level - k)
        return slice((j - 1) * width, j * width + 1)

    def synthesize(self, coeffs: np.ndarray, level: int, start: int = 0) -> np.ndarray:
        coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
        rows = coeffs.shape[0]
        live = self.active(start + coeffs.shape[1]) - start
        if live <= 0:
            return np.zeros((rows, 2**level + 1))
        self.check_level(start + live, level)
        padded = np.zeros((rows, start + live))
        padded[:, start:] = coeffs[:, :live]
        return haar.synthesize_batch(padded, level)

    def remainder_bound(self, j_max: int) -> Optional[float]:
        bound = super().remainder_bound(j_max)
        if bound is not None:
            return bound
        # Beyond 2^M the series is a field of independent Brownian bridges on
        # intervals of length 2^-M, each with P(sup|b| > x) <= 2 exp(-2 x^2 / h).
        if j_max < 1 or j_max & (j_max - 1):
            return None
        m = j_max.bit_length() - 1
        return 2.0**-m * (math.log(2.0 ** (m + 1)) + 1.0) / 2.0


class SineModel(BasisModel):
    """Karhunen-Loève expansions with sine eigenfunctions."""

    def __init__(self, dimension: Optional[int] = None, shift: float = 0.5) -> None:
        super().__init__(dimension)
        self.shift = shift

    def frequency(self, n: int) -> float:
        return (n - self.shift) * math.pi

    def basis_values(self, n: int, times: np.ndarray) -> np.ndarray:
        lam = self.frequency(n)
        return math.sqrt(2.0) * np.sin(lam * np.asarray(times, dtype=float)) / lam

    def basis_derivative(self, n: int, times: np.ndarray) -> np.ndarray:
        return math.sqrt(2.0) * np.cos(self.frequency(n) * np.asarray(times, dtype=float))

    def evaluate(self, coeffs: np.ndarray, times: np.ndarray) -> np.ndarray:
        coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
        live = self.active(coeffs.shape[1])
        lam = (np.arange(1, live + 1) - self.shift) * math.pi
        phase = np.outer(lam, np.asarray(times, dtype=float))
        values = math.sqrt(2.0) * np.sin(phase) / lam[:, None]
        return coeffs[:, :live] @ values


class KLSineModel(SineModel):
    kind = "kl-sine-bm"

    def __init__(self, dimension: Optional[int] = None) -> None:
        super().__init__(dimension, shift=0.5)


class KLBridgeModel(SineModel):
    kind = "kl-bridge"

    def __init__(self, dimension: Optional[int] = None) -> None:
        super().__init__(dimension, shift=0.0)


class CustomModel(BasisModel):
    """Finite basis read from a custom basis file."""

    kind = "custom"

    def __init__(self, basis: np.ndarray, source: Optional[str] = None) -> None:
        basis = np.atleast_2d(np.asarray(basis, dtype=float))
        if basis.shape[0] < 1:
            raise ModelError(self.kind, "basis file holds no paths")
        self.paths = [DyadicPath(row) for row in basis]
        self.base_level = self.paths[0].level
        super().__init__(dimension=len(self.paths))
        self.source = source

    def basis_values(self, n: int, times: np.ndarray) -> np.ndarray:
        return np.asarray(self.paths[n - 1](np.asarray(times, dtype=float)))

    def basis_derivative(self, n: int, times: np.ndarray) -> np.ndarray:
        slopes = np.diff(self.paths[n - 1].samples) * 2**self.base_level
        cell = np.minimum(np.floor(np.asarray(times) * 2**self.base_level), slopes.size - 1)
        return slopes[cell.astype(int)]

    def quadrature_panels(self, count: int) -> int:
        return 2**self.base_level

    def check_level(self, count: int, level: int) -> None:
        super().check_level(count, level)
        if level < self.base_level:
            raise ModelError(self.kind, f"basis file is at level {self.base_level} > {level}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "dimension": self.dimension, "basis_file": self.source}


_KINDS: Dict[str, type] = {
    SchauderModel.kind: SchauderModel,
    KLSineModel.kind: KLSineModel,
    KLBridgeModel.kind: KLBridgeModel,
}


def make_model(
    kind: str, dimension: Optional[int] = None, basis_file: Optional[Path] = None
) -> BasisModel:
    """Build a model by kind name."""
    if kind == CustomModel.kind:
        if basis_file is None:
            raise ModelError(kind, "custom models need a basis file")
        from interspace.storage.formats import read_basis_file

        return CustomModel(read_basis_file(Path(basis_file)), source=str(basis_file))
    if basis_file is not None:
        raise ModelError(kind, "basis_file is only valid for custom models")
    try:
        return _KINDS[kind](dimension)
    except KeyError:
        raise ModelError(kind, f"unsupported kind; expected one of {sorted(_KINDS) + ['custom']}")


def basis_path(model: BasisModel, n: int, level: int) -> DyadicPath:
    """e_n sampled on the level-L grid (the zero path past ``dimension``)."""
    if n < 1:
        raise ModelError(model.kind, f"basis index must be >= 1, got {n}")
    model.check_level(n, level)
    samples = np.zeros(2**level + 1)
    if n <= model.active(n):
        window = model.support(n, level)
        samples[window] = model.basis_values(n, grid(level)[window])
    return DyadicPath(samples)


def h1_gram(model: BasisModel, count: int) -> np.ndarray:
    """Exact H^1_0 Gram matrix of e_1..e_count by composite Gauss-Legendre."""
    panels = model.quadrature_panels(count)
    nodes, weights = np.polynomial.legendre.leggauss(_GRAM_NODES)
    edges = np.linspace(0.0, 1.0, panels + 1)
    half = 0.5 * np.diff(edges)
    times = (0.5 * (edges[:-1] + edges[1:]))[:, None] + half[:, None] * nodes[None, :]
    w = (half[:, None] * weights[None, :]).ravel()
    live = model.active(count)
    derivs = np.zeros((count, w.size))
    for n in range(1, live + 1):
        derivs[n - 1] = model.basis_derivative(n, times.ravel())
    return (derivs * w) @ derivs.T


# ─────────────────────────────────────────────────
# Sampling
# ─────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class SampleDraw:
    """The Gaussians g_1..g_N behind one sample; regenerable from the seed."""

    seed: int
    gaussians: np.ndarray
    truncation: int

    @classmethod
    def draw(cls, seed: int, truncation: int, pinned_zero: bool = False) -> SampleDraw:
        stream = GaussianStream(seed, StreamTag.SAMPLE, pinned_zero=pinned_zero)
        return cls(seed, stream.chunk(0, 1, truncation)[0], truncation)

    def regenerate(self) -> SampleDraw:
        return SampleDraw.draw(self.seed, self.truncation)


def sample_partial_sum(
    model: BasisModel, truncation: int, level: int, seed: int, pinned_zero: bool = False
) -> Tuple[DyadicPath, CoeffSeq]:
    """X_N = sum_{j <= N} g_j e_j on the level-L grid, with its coefficients."""
    if truncation < 1:
        raise ModelError(model.kind, f"truncation must be >= 1, got {truncation}")
    draw = SampleDraw.draw(seed, truncation, pinned_zero=pinned_zero)
    samples = model.synthesize(draw.gaussians[None, :], level)[0]
    return DyadicPath(samples), CoeffSeq(draw.gaussians)


# ─────────────────────────────────────────────────
# Tail variances
# ─────────────────────────────────────────────────


@dataclass(frozen=True)
class TailParams:
    """Monte Carlo window for tail variances: cuts n in [0, j_max]."""

    replicates: int = 512
    j_max: Optional[int] = None
    level: int = 12
    confidence: float = 0.99

    def resolved_j_max(self) -> int:
        return self.j_max if self.j_max is not None else 2**self.level

    def to_dict(self) -> dict:
        return {
            "replicates": self.replicates,
            "j_max": self.resolved_j_max(),
            "level": self.level,
            "confidence": self.confidence,
        }


class TailEstimate(NamedTuple):
    estimate: float
    upper_conf: float
    std_error: float
    remainder: Optional[float]


def certify(window_upper: float, remainder: Optional[float]) -> float:
    """Fold the analytic remainder into a window bound (Minkowski in L^2)."""
    if remainder is None:
        return window_upper
    return (math.sqrt(max(window_upper, 0.0)) + math.sqrt(remainder)) ** 2


def _remainder(model: BasisModel, j_max: int) -> Optional[float]:
    bound = model.remainder_bound(j_max)
    if bound is None:
        logger.warning(
            "no_remainder_bound kind=%s j_max=%s; tails are certified for the truncated series",
            model.kind,
            j_max,
        )
    return bound


def tail_variance(
    model: BasisModel, n: int, params: TailParams, sampler: ReplicateSampler
) -> TailEstimate:
    """E||sum_{n < j <= J_max} g_j e_j||^2 with a certified upper bound."""
    j_max = params.resolved_j_max()
    if j_max <= n:
        raise ModelError(model.kind, f"J_max={j_max} must exceed the cut n={n}")
    if n < 0:
        raise ModelError(model.kind, f"cut must be >= 0, got {n}")
    remainder = _remainder(model, j_max)
    live = model.active(j_max)
    if n >= live:
        return TailEstimate(0.0, certify(0.0, remainder), 0.0, remainder)
    model.check_level(live, params.level)

    def kernel(g: np.ndarray, _: int) -> Tuple[float, float]:
        sup_sq = np.max(np.abs(model.synthesize(g[:, n:live], params.level, start=n)), axis=1) ** 2
        return float(sup_sq.sum()), float((sup_sq**2).sum())

    sums = sampler.map(kernel, params.replicates, live, StreamTag.TAIL)
    est = moments_estimate(
        sum(s for s, _ in sums), sum(q for _, q in sums), params.replicates
    )
    upper = est.mean + one_sided_z(params.confidence) * est.std_error
    return TailEstimate(est.mean, certify(upper, remainder), est.std_error, remainder)


@dataclass(frozen=True, eq=False)
class TailProfile:
    """Tail estimates for every cut n = 0..len-1 from common random numbers."""

    estimate: np.ndarray
    std_error: np.ndarray
    upper: np.ndarray
    certified: np.ndarray
    remainder: Optional[float]
    j_max: int
    finite: bool

    def certified_at(self, n: int) -> float:
        if n < self.certified.size:
            return float(self.certified[n])
        return 0.0 if self.finite else math.inf


def tail_profile(
    model: BasisModel, params: TailParams, sampler: ReplicateSampler, tag: int = StreamTag.TAIL
) -> TailProfile:
    """Certified tail bounds at every cut in one backward pass.

    For each replicate the tail sum_{j > n} g_j e_j is built from n = J
    down to 0, tracking its sup norm per grid segment so each step only
    rescans the segments touched by e_n. Raw estimates are then
    regularized by a running minimum (true tails are nonincreasing).
    """
    j_max = params.resolved_j_max()
    live = model.active(j_max)
    model.check_level(live, params.level)
    remainder = _remainder(model, j_max)
    width = 2**params.level + 1
    segment = min(_SEGMENT, width)
    n_seg = -(-width // segment)
    supports = [model.support(n, params.level) for n in range(1, live + 1)]
    times = grid(params.level)
    rows_of = [model.basis_values(n, times[supports[n - 1]]) for n in range(1, live + 1)]

    def kernel(g: np.ndarray, _: int) -> Tuple[np.ndarray, np.ndarray]:
        rows = g.shape[0]
        tail = np.zeros((rows, n_seg * segment))
        seg_max = np.zeros((rows, n_seg))
        s1 = np.zeros(live + 1)
        s2 = np.zeros(live + 1)
        for n in range(live, 0, -1):
            window = supports[n - 1]
            tail[:, window] += g[:, n - 1, None] * rows_of[n - 1]
            first = window.start // segment
            last = (window.stop - 1) // segment + 1
            seg_max[:, first:last] = (
                np.abs(tail[:, first * segment : last * segment])
                .reshape(rows, last - first, segment)
                .max(axis=2)
            )
            sup_sq = seg_max.max(axis=1) ** 2
            s1[n - 1] = sup_sq.sum()
            s2[n - 1] = (sup_sq**2).sum()
        return s1, s2

    chunks = sampler.map(kernel, params.replicates, live, tag)
    s1 = np.sum([c[0] for c in chunks], axis=0)
    s2 = np.sum([c[1] for c in chunks], axis=0)
    count = params.replicates
    mean = s1 / count
    if count > 1:
        variance = np.clip(s2 - count * mean**2, 0.0, None) / (count - 1)
    else:
        variance = np.zeros_like(mean)
    std_error = np.sqrt(variance / count)
    upper = mean + one_sided_z(params.confidence) * std_error
    regularized = np.minimum.accumulate(upper)
    certified = np.array([certify(u, remainder) for u in regularized])
    logger.info(
        "tail_profile kind=%s j_max=%s replicates=%s certified_0=%.4g",
        model.kind,
        j_max,
        count,
        certified[0],
    )
    return TailProfile(
        estimate=np.minimum.accumulate(mean),
        std_error=std_error,
        upper=upper,
        certified=certified,
        remainder=remainder,
        j_max=j_max,
        finite=model.dimension is not None and live == model.dimension,
    )
