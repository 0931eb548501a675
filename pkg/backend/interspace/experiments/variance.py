"""Block variances of Brownian motion on the dyadic schedule.

With n_k = 2^k the block W_k = sum_j g_{2^k+j} phi_{2^k+j} is a sum of
disjoint tents of height 2^(-1-k/2), so

    E||W_k||^2 = 2^(-2-k) E max_{j <= 2^k} g_j^2

and the right side falls below 2^(-lambda k) for large k, for every
lambda < 1.
"""

from __future__ import annotations

import logging
import math
from functools import lru_cache
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, special

from interspace.core.report import ExperimentReport
from interspace.core.rng import StreamTag
from interspace.core.sampling import ReplicateSampler
from interspace.core.stats import SE_MARGIN, MeanEstimate, moments_estimate
from interspace.errors import ExperimentError
from interspace.experiments.base import new_report, timed
from interspace.models import SchauderModel

logger = logging.getLogger(__name__)

NAME = "block-variance"

DEFAULT_LAMBDA = 0.9

# Blocks past the onset that the analytic envelope check covers.
ONSET_WINDOW = 32

_ONSET_SEARCH = 256


@lru_cache(maxsize=512)
def expected_max_square(count: int) -> float:
    """E max_{j <= m} g_j^2 = integral_0^inf 1 - (2 Phi(sqrt y) - 1)^m dy."""
    if count < 1:
        raise ExperimentError(NAME, f"block size must be >= 1, got {count}")

    def survival(y: float) -> float:
        inside = -special.erfc(math.sqrt(y / 2.0))
        return -math.expm1(count * math.log1p(inside)) if inside > -1.0 else 1.0

    knee = max(2.0 * math.log(count), 1.0)
    head, _ = integrate.quad(survival, 0.0, knee, limit=200)
    tail, _ = integrate.quad(survival, knee, math.inf, limit=200)
    return head + tail


def envelope_ratio(k: int, lam: float) -> float:
    """2^(-2-k) E max / 2^(-lambda k); the envelope holds where this is <= 1."""
    return 2.0 ** (-2.0 - k + lam * k) * expected_max_square(2**k)


def envelope_onset(lam: float, search: int = _ONSET_SEARCH) -> int:
    """Smallest k* such that the envelope holds for every k in [k*, search]."""
    if not 0.0 < lam < 1.0:
        raise ExperimentError(NAME, f"lambda must be in (0, 1), got {lam}")
    onset: Optional[int] = None
    for k in range(search, 0, -1):
        if envelope_ratio(k, lam) <= 1.0:
            onset = k
        else:
            break
    if onset is None or onset == search:
        raise ExperimentError(NAME, f"no envelope onset for lambda={lam} below k={search}")
    return onset


def block_variance_profile(
    k_range: Sequence[int],
    replicates: int,
    sampler: ReplicateSampler,
    lam: float = DEFAULT_LAMBDA,
) -> ExperimentReport:
    """Path-based and direct estimates of the block variances, with exact oracle."""
    ks = sorted(int(k) for k in k_range)
    if not ks or ks[0] < 1:
        raise ExperimentError(NAME, "k range must hold block indices >= 1")
    report = new_report(NAME, sampler, replicates, k_range=ks, lam=lam)
    model = SchauderModel()
    with timed(report):
        # preliminary block {1, 2}: outside the 2^k + j pattern
        prelim = sampler.map(
            lambda g, _: _sup_square_sums(model.synthesize(g, 1)),
            replicates,
            2,
            StreamTag.VARIANCE_PATH,
        )
        est0 = _pooled(prelim, replicates)
        report.note("block_0_variance", est0.mean, std_error=est0.std_error)

        rows = []
        for k in ks:
            m = 2**k
            height_sq = 2.0 ** (-2.0 - k)
            path = sampler.map(_block_kernel(model, k), replicates, 2 * m, StreamTag.VARIANCE_PATH)
            direct = sampler.map(_max_square_sums, replicates, m, StreamTag.VARIANCE_MAX)
            path_est = _pooled(path, replicates)
            max_est = _pooled(direct, replicates)
            exact = expected_max_square(m)

            scaled = path_est.mean / height_sq
            scaled_se = path_est.std_error / height_sq
            se = math.hypot(scaled_se, max_est.std_error)
            report.check(
                f"factorization_k{k}",
                abs(scaled - max_est.mean),
                0.0,
                margin=SE_MARGIN * se,
                std_error=se,
                k=k,
                path_scaled=scaled,
                direct=max_est.mean,
            )
            report.check(
                f"oracle_k{k}",
                abs(path_est.mean - height_sq * exact),
                0.0,
                margin=SE_MARGIN * path_est.std_error,
                std_error=path_est.std_error,
                k=k,
                oracle=height_sq * exact,
            )
            envelope = 2.0 ** (-lam * k)
            report.note(
                f"envelope_k{k}",
                path_est.mean,
                envelope=envelope,
                below_envelope=bool(path_est.mean <= envelope),
            )
            rows.append(
                {
                    "k": k,
                    "variance": path_est.mean,
                    "std_error": path_est.std_error,
                    "direct_max_square": max_est.mean,
                    "exact_max_square": exact,
                    "exact_variance": height_sq * exact,
                    "envelope": envelope,
                }
            )
        report.tables["profile"] = rows

        onset = envelope_onset(lam)
        report.note("envelope_onset", float(onset), lam=lam)
        window = range(onset, onset + ONSET_WINDOW + 1)
        worst = max(envelope_ratio(k, lam) for k in window)
        report.check("envelope_from_onset", worst, 1.0, k_from=onset, k_to=onset + ONSET_WINDOW)
        report.tables["envelope"] = [
            {
                "k": k,
                "exact_variance": 2.0 ** (-2.0 - k) * expected_max_square(2**k),
                "envelope": 2.0 ** (-lam * k),
                "ratio": envelope_ratio(k, lam),
            }
            for k in range(1, onset + ONSET_WINDOW + 1)
        ]
        logger.info("block_variance onset=%s lambda=%s", onset, lam)
    return report


def _block_kernel(model: SchauderModel, k: int) -> Callable[[np.ndarray, int], Tuple[float, float]]:
    m = 2**k

    def kernel(g: np.ndarray, _: int) -> Tuple[float, float]:
        return _sup_square_sums(model.synthesize(g[:, m:], k + 1, start=m))

    return kernel


def _pooled(sums: Sequence[Tuple[float, float]], replicates: int) -> MeanEstimate:
    return moments_estimate(sum(s for s, _ in sums), sum(q for _, q in sums), replicates)


def _sup_square_sums(values: np.ndarray) -> Tuple[float, float]:
    sq = np.max(np.abs(values), axis=1) ** 2
    return float(sq.sum()), float((sq**2).sum())


def _max_square_sums(g: np.ndarray, _: int = 0) -> Tuple[float, float]:
    sq = np.max(g**2, axis=1)
    return float(sq.sum()), float((sq**2).sum())
