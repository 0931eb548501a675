"""Piecewise-linear paths on [0, 1] sampled on a dyadic grid.

A ``DyadicPath`` at level L carries the values at t = i * 2^-L for
i = 0..2^L. Between grid points the path is the linear interpolant, so
every sup-type quantity below is exact: extrema of piecewise-linear
functions sit at breakpoints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d

from interspace.errors import PathError

# Default resolution for continuous-time objects (4097 samples).
DEFAULT_LEVEL = 12

_GRID_TOL = 1e-9


def level_for_length(length: int) -> int:
    """Return L such that ``length == 2**L + 1``, or raise."""
    if length < 2:
        raise PathError(f"Path length {length} is not of the form 2^L + 1")
    level = int(round(np.log2(length - 1)))
    if 2**level + 1 != length:
        raise PathError(f"Path length {length} is not of the form 2^L + 1")
    return level


@dataclass(frozen=True, eq=False)
class DyadicPath:
    """A continuous piecewise-linear path started at 0.

    Attributes:
        samples: Read-only values at the level-L dyadic grid points
    """

    samples: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        values = np.array(self.samples, dtype=float)
        if values.ndim != 1:
            raise PathError("Path samples must be a one-dimensional vector")
        level_for_length(values.size)
        if values[0] != 0.0:
            raise PathError(f"Path must start at 0, got {values[0]!r}")
        values.setflags(write=False)
        object.__setattr__(self, "samples", values)

    @property
    def level(self) -> int:
        return level_for_length(self.samples.size)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.samples.size)

    def __call__(self, t: float | np.ndarray) -> float | np.ndarray:
        """Evaluate the linear interpolant at ``t``."""
        return np.interp(t, self.times, self.samples)

    def refine(self, level: int) -> DyadicPath:
        """Resample on a finer grid; the interpolant is unchanged."""
        if level < self.level:
            raise PathError(f"Cannot refine level-{self.level} path down to level {level}")
        if level == self.level:
            return self
        return DyadicPath(self(np.linspace(0.0, 1.0, 2**level + 1)))

    def __add__(self, other: DyadicPath) -> DyadicPath:
        level = max(self.level, other.level)
        return DyadicPath(self.refine(level).samples + other.refine(level).samples)

    def __sub__(self, other: DyadicPath) -> DyadicPath:
        level = max(self.level, other.level)
        return DyadicPath(self.refine(level).samples - other.refine(level).samples)

    def __mul__(self, scalar: float) -> DyadicPath:
        return DyadicPath(self.samples * float(scalar))

    __rmul__ = __mul__

    def to_dict(self) -> dict:
        return {"level": self.level, "samples": [float(v) for v in self.samples]}

    @classmethod
    def from_dict(cls, data: dict) -> DyadicPath:
        path = cls(np.asarray(data["samples"], dtype=float))
        if "level" in data and int(data["level"]) != path.level:
            raise PathError(f"Declared level {data['level']} does not match {path.level}")
        return path

    def __repr__(self) -> str:
        return f"DyadicPath(level={self.level}, sup={sup_norm(self):.4g})"


def make_path(samples: Sequence[float] | np.ndarray) -> DyadicPath:
    """Build a path from its grid values."""
    return DyadicPath(np.asarray(samples, dtype=float))


def zero_path(level: int = DEFAULT_LEVEL) -> DyadicPath:
    return DyadicPath(np.zeros(2**level + 1))


def identity_path(level: int = DEFAULT_LEVEL) -> DyadicPath:
    """The path t -> t."""
    return DyadicPath(np.linspace(0.0, 1.0, 2**level + 1))


def sup_norm(p: DyadicPath) -> float:
    return float(np.max(np.abs(p.samples)))


def h1_seminorm(p: DyadicPath) -> float:
    """Exact H^1_0 norm of the interpolant: sqrt(sum of squared slopes * step)."""
    increments = np.diff(p.samples)
    return float(np.sqrt(np.sum(increments**2) * 2**p.level))


def grid_steps(p: DyadicPath, delta: float) -> int:
    """Translate a dyadic step ``delta`` into a number of grid intervals."""
    steps = delta * 2**p.level
    m = int(round(steps))
    if abs(steps - m) > _GRID_TOL or not 1 <= m <= 2**p.level:
        raise PathError(f"delta={delta!r} is not a positive multiple of 2^-{p.level} in (0, 1]")
    return m


def _window_oscillation(samples: np.ndarray, m: int) -> float:
    # max over windows of m+1 consecutive grid values of (max - min)
    size = m + 1
    upper = maximum_filter1d(samples, size=size, mode="nearest")
    lower = minimum_filter1d(samples, size=size, mode="nearest")
    return float(np.max(upper - lower))


def modulus_of_continuity(p: DyadicPath, delta: float) -> float:
    """sup |p(t) - p(s)| over |t - s| <= delta, exact for grid multiples."""
    return _window_oscillation(p.samples, grid_steps(p, delta))


def holder_quotient(p: DyadicPath, alpha: float) -> Tuple[float, np.ndarray]:
    """Return (max, profile) of omega(2^-l) / 2^(-l*alpha) for l = 1..L.

    A profile decaying toward 0 at fine scales is the small-Hölder
    signature; growth at fine scales indicates the path is not
    alpha-Hölder at the resolution available.
    """
    if not 0.0 < alpha < 1.0:
        raise PathError(f"alpha={alpha!r} outside (0, 1)")
    level = p.level
    profile = np.array(
        [
            _window_oscillation(p.samples, 2 ** (level - scale)) / 2.0 ** (-scale * alpha)
            for scale in range(1, level + 1)
        ]
    )
    value = float(np.max(profile)) if profile.size else 0.0
    return value, profile
