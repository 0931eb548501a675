"""Monte Carlo summaries shared by the experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import stats

# Margin, in standard errors, of every Monte Carlo pass/fail rule.
SE_MARGIN = 3.0


@dataclass(frozen=True)
class MeanEstimate:
    mean: float
    std_error: float
    count: int

    def upper(self, confidence: float = 0.99) -> float:
        return self.mean + one_sided_z(confidence) * self.std_error


def one_sided_z(confidence: float) -> float:
    return float(stats.norm.ppf(confidence))


def mean_estimate(values: np.ndarray) -> MeanEstimate:
    values = np.asarray(values, dtype=float)
    count = values.size
    spread = float(np.std(values, ddof=1)) if count > 1 else 0.0
    return MeanEstimate(float(np.mean(values)), spread / math.sqrt(count), count)


def moments_estimate(total: float, total_sq: float, count: int) -> MeanEstimate:
    """Mean and standard error from running sums of x and x^2."""
    mean = total / count
    if count < 2:
        return MeanEstimate(mean, 0.0, count)
    variance = max(total_sq - count * mean * mean, 0.0) / (count - 1)
    return MeanEstimate(mean, math.sqrt(variance / count), count)


def binomial_se(p: float, count: int) -> float:
    """Standard error of a frequency under success probability ``p``."""
    p = min(max(p, 0.0), 1.0)
    return math.sqrt(p * (1.0 - p) / count)


def wilson_interval(successes: int, total: int, confidence: float = 0.95) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if total == 0:
        return (0.0, 0.0)
    z = float(stats.norm.ppf(0.5 + confidence / 2.0))
    p_hat = successes / total
    denominator = 1 + z**2 / total
    center = (p_hat + z**2 / (2 * total)) / denominator
    spread = z * math.sqrt((p_hat * (1 - p_hat) + z**2 / (4 * total)) / total) / denominator
    return (max(0.0, center - spread), min(1.0, center + spread))


@dataclass(frozen=True)
class LinearFit:
    coefficients: np.ndarray
    std_errors: np.ndarray


def weighted_least_squares(
    design: np.ndarray, response: np.ndarray, weights: Optional[np.ndarray] = None
) -> LinearFit:
    """Solve min sum w_i (y_i - X_i b)^2 and return b with its standard errors."""
    design = np.asarray(design, dtype=float)
    response = np.asarray(response, dtype=float)
    w = np.ones_like(response) if weights is None else np.asarray(weights, dtype=float)
    root = np.sqrt(w)
    a = design * root[:, None]
    y = response * root
    coefficients, *_ = np.linalg.lstsq(a, y, rcond=None)
    dof = max(response.size - design.shape[1], 1)
    residual = y - a @ coefficients
    sigma2 = float(residual @ residual) / dof
    covariance = sigma2 * np.linalg.pinv(a.T @ a)
    return LinearFit(coefficients, np.sqrt(np.clip(np.diag(covariance), 0.0, None)))
