"""Haar system, Schauder functions and Ciesielski weights.

Indexing follows the classical convention: n = 1 is the constant Haar
function (its primitive is t -> t) and n = 2^k + j, k >= 0,
1 <= j <= 2^k, is the level-k function supported on
[(j - 1) 2^-k, j 2^-k]. Level k = 0 (n = 2) is included; without it the
system is not complete in L^2.

Supports are half-open at dyadic breakpoints and closed at t = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Tuple

import numpy as np

from interspace.errors import CoefficientError, PathError
from interspace.paths import DyadicPath


def split_index(n: int) -> Tuple[int, int]:
    """Return (k, j) with n = 2^k + j, 1 <= j <= 2^k. Requires n >= 2."""
    if n < 2:
        raise CoefficientError(f"Index {n} has no (k, j) decomposition")
    k = (n - 1).bit_length() - 1
    return k, n - 2**k


def required_level(count: int) -> int:
    """Smallest grid level on which the first ``count`` Schauder functions are exact."""
    if count < 1:
        raise CoefficientError(f"Coefficient count must be >= 1, got {count}")
    if count == 1:
        return 0
    k, _ = split_index(count)
    return k + 1


@dataclass(frozen=True, eq=False)
class CoeffSeq:
    """Coefficients xi_1..xi_N with respect to an orthonormal RKHS basis."""

    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        values = np.array(self.coeffs, dtype=float)
        if values.ndim != 1 or values.size < 1:
            raise CoefficientError("Coefficient sequence must be a non-empty vector")
        values.setflags(write=False)
        object.__setattr__(self, "coeffs", values)

    @property
    def size(self) -> int:
        return int(self.coeffs.size)

    def __getitem__(self, n: int) -> float:
        """1-based access; indices past the end read as 0."""
        if n < 1:
            raise CoefficientError(f"Index {n} < 1")
        return float(self.coeffs[n - 1]) if n <= self.size else 0.0

    def padded(self, size: int) -> np.ndarray:
        if size < self.size:
            raise CoefficientError(f"Cannot pad {self.size} coefficients down to {size}")
        out = np.zeros(size)
        out[: self.size] = self.coeffs
        return out

    def to_dict(self) -> dict:
        return {"coeffs": [float(v) for v in self.coeffs]}

    @classmethod
    def from_dict(cls, data: dict) -> CoeffSeq:
        return cls(np.asarray(data["coeffs"], dtype=float))

    def __repr__(self) -> str:
        return f"CoeffSeq(size={self.size})"


def coeff_seq(values: Sequence[float] | np.ndarray) -> CoeffSeq:
    return CoeffSeq(np.asarray(values, dtype=float))


def unit_coeffs(n: int, size: int | None = None) -> CoeffSeq:
    """The coefficient vector of e_n alone."""
    out = np.zeros(max(n, size or n))
    out[n - 1] = 1.0
    return CoeffSeq(out)


def _check_args(n: int, t: float | np.ndarray) -> np.ndarray:
    if n < 1:
        raise CoefficientError(f"Basis index must be >= 1, got {n}")
    times = np.asarray(t, dtype=float)
    if np.any(times < 0.0) or np.any(times > 1.0):
        raise PathError("Evaluation time outside [0, 1]")
    return times


def haar_eval(n: int, t: float | np.ndarray) -> float | np.ndarray:
    """chi_n(t)."""
    times = _check_args(n, t)
    if n == 1:
        out = np.ones_like(times)
    else:
        k, j = split_index(n)
        slots = 2 ** (k + 1)
        cell = np.minimum(np.floor(times * slots), slots - 1)
        amplitude = np.sqrt(2.0**k)
        out = np.where(cell == 2 * j - 2, amplitude, np.where(cell == 2 * j - 1, -amplitude, 0.0))
    return float(out) if out.ndim == 0 else out


def schauder_eval(n: int, t: float | np.ndarray) -> float | np.ndarray:
    """phi_n(t), the primitive of chi_n."""
    times = _check_args(n, t)
    if n == 1:
        out = times.copy()
    else:
        k, j = split_index(n)
        center = (2 * j - 1) / 2.0 ** (k + 1)
        half_width = 2.0 ** -(k + 1)
        height = 2.0 ** (-1.0 - k / 2.0)
        out = height * np.maximum(0.0, 1.0 - np.abs(times - center) / half_width)
    return float(out) if out.ndim == 0 else out


def synthesize_batch(coeffs: np.ndarray, level: int) -> np.ndarray:
    """Rows of coefficients -> rows of level-L grid values.

    Works level by level: each refinement places the midpoint at the
    average of its neighbours plus the level's tent heights, so the total
    cost is linear in 2^L per row.
    """
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
    rows, count = coeffs.shape
    if required_level(count) > level:
        raise CoefficientError(
            f"{count} coefficients need level >= {required_level(count)}, got {level}"
        )
    padded = np.zeros((rows, 2**level))
    padded[:, :count] = coeffs
    values = np.zeros((rows, 2))
    values[:, 1] = padded[:, 0]
    for k in range(level):
        detail = padded[:, 2**k : 2 ** (k + 1)]
        mids = 0.5 * (values[:, :-1] + values[:, 1:]) + detail * 2.0 ** (-1.0 - k / 2.0)
        refined = np.empty((rows, 2 ** (k + 1) + 1))
        refined[:, ::2] = values
        refined[:, 1::2] = mids
        values = refined
    return values


def analyze_batch(samples: np.ndarray) -> np.ndarray:
    """Rows of level-L grid values -> rows of 2^L coefficients."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    rows, length = samples.shape
    level = int(round(np.log2(length - 1)))
    out = np.empty((rows, 2**level))
    out[:, 0] = samples[:, -1]
    for k in range(level):
        step = 2 ** (level - k - 1)
        left = samples[:, 0 : length - 1 : 2 * step]
        mid = samples[:, step::2 * step]
        right = samples[:, 2 * step :: 2 * step]
        out[:, 2**k : 2 ** (k + 1)] = np.sqrt(2.0**k) * (2.0 * mid - left - right)
    return out


def synthesize(xi: CoeffSeq, level: int) -> DyadicPath:
    """x = sum_m xi_m phi_m on the level-L grid."""
    return DyadicPath(synthesize_batch(xi.coeffs[None, :], level)[0])


def analyze(p: DyadicPath) -> CoeffSeq:
    """xi_n = integral of chi_n against dp, for n = 1..2^L."""
    return CoeffSeq(analyze_batch(p.samples[None, :])[0])


def ciesielski_weight(n: int, alpha: float) -> float:
    """w_{2^k+j}(alpha) = 2^(k(alpha - 1/2) + (1 - alpha)); w_1 = 1."""
    if not 0.0 < alpha < 1.0:
        raise CoefficientError(f"alpha={alpha!r} outside (0, 1)")
    if n < 1:
        raise CoefficientError(f"Basis index must be >= 1, got {n}")
    if n == 1:
        return 1.0
    k, _ = split_index(n)
    return 2.0 ** (k * (alpha - 0.5) + (1.0 - alpha))


def ciesielski_weights(count: int, alpha: float) -> np.ndarray:
    return np.array([ciesielski_weight(n, alpha) for n in range(1, count + 1)])


class SequenceNorm(NamedTuple):
    """sup_n w_n |xi_n| split into the n = 1 term and per-level maxima."""

    value: float
    head: float
    profile: np.ndarray


def ciesielski_seq_norm(xi: CoeffSeq, alpha: float) -> SequenceNorm:
    weighted = ciesielski_weights(xi.size, alpha) * np.abs(xi.coeffs)
    head = float(weighted[0])
    levels = required_level(xi.size)
    profile = np.array(
        [float(np.max(weighted[2**k : min(2 ** (k + 1), xi.size)])) for k in range(levels)]
    )
    value = max(head, float(profile.max()) if profile.size else 0.0)
    return SequenceNorm(value=value, head=head, profile=profile)
