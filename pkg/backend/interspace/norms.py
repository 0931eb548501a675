"""Intermediate norms on finite expansions.

For a coefficient vector xi and a schedule with cuts n_0..n_K, the block
profile is ||Q_k x|| = sup norm of sum_{n_k < j <= n_{k+1}} xi_j e_j. Then

    sum-block   ||x||_i = sum_k 2^(k alpha) ||Q_k x||
    sup-block   ||x||'  = max_k 2^(k alpha) ||Q_k x||

with k = 0..K-1 in both. They relate to the sup norm through

    ||x|| <= sum_k ||Q_k x|| <= c ||x||',   c = sum_{k<K} 2^(-k alpha)
    ||x||' <= ||x||_i,   ||x|| <= ||x||_i
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from interspace import paths
from interspace.blocks import BlockSchedule, Variant, check_covered
from interspace.errors import BlockIndexError
from interspace.haar import CoeffSeq
from interspace.models import BasisModel
from interspace.paths import DyadicPath


def block_profile_batch(
    coeffs: np.ndarray, schedule: BlockSchedule, model: BasisModel, level: int
) -> np.ndarray:
    """Rows of coefficients -> (rows, K) block sup norms."""
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
    out = np.zeros((coeffs.shape[0], schedule.block_count))
    for k in range(schedule.block_count):
        start, stop = schedule.block(k)
        if start >= coeffs.shape[1] or model.active(stop) <= start:
            continue
        block = coeffs[:, start : min(stop, coeffs.shape[1])]
        out[:, k] = np.max(np.abs(model.synthesize(block, level, start=start)), axis=1)
    return out


def block_profile(
    xi: CoeffSeq, schedule: BlockSchedule, model: BasisModel, level: int
) -> np.ndarray:
    """||Q_k x|| for k = 0..K-1."""
    check_covered(xi, schedule)
    return block_profile_batch(xi.coeffs[None, : schedule.covered], schedule, model, level)[0]


def sum_block_norm(xi: CoeffSeq, schedule: BlockSchedule, model: BasisModel, level: int) -> float:
    return float(schedule.weights() @ block_profile(xi, schedule, model, level))


def sup_block_norm(xi: CoeffSeq, schedule: BlockSchedule, model: BasisModel, level: int) -> float:
    return float(np.max(schedule.weights() * block_profile(xi, schedule, model, level)))


def partial_seminorm(
    xi: CoeffSeq, schedule: BlockSchedule, model: BasisModel, level: int, k: int
) -> float:
    """sum_{j <= k} 2^(j alpha) ||Q_j x||."""
    if not 0 <= k < schedule.block_count:
        raise BlockIndexError(k, schedule.block_count)
    weighted = schedule.weights() * block_profile(xi, schedule, model, level)
    return float(weighted[: k + 1].sum())


def rkhs_norm(xi: CoeffSeq) -> float:
    """Norm in H: the l^2 norm of the coefficients."""
    return float(np.linalg.norm(xi.coeffs))


def embedding_constant(schedule: BlockSchedule) -> float:
    return float(np.sum(1.0 / schedule.weights()))


class TailBound(NamedTuple):
    tail: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.tail <= self.bound


def block_tail_bound(
    xi: CoeffSeq, schedule: BlockSchedule, k0: int, model: BasisModel, level: int
) -> TailBound:
    """sum_{k > k0} ||Q_k x|| against its bound by the schedule's own norm.

    Sum variant: 2^(-alpha k0) ||x||_i.
    Sup variant: 2^(-alpha (k0 + 1)) / (1 - 2^-alpha) ||x||'.
    """
    if not 0 <= k0 < schedule.block_count:
        raise BlockIndexError(k0, schedule.block_count)
    profile = block_profile(xi, schedule, model, level)
    tail = float(profile[k0 + 1 :].sum())
    weighted = schedule.weights() * profile
    alpha = schedule.alpha
    if schedule.variant is Variant.SUM:
        bound = 2.0 ** (-alpha * k0) * float(weighted.sum())
    else:
        bound = 2.0 ** (-alpha * (k0 + 1)) / (1.0 - 2.0**-alpha) * float(weighted.max())
    return TailBound(tail, bound)


@dataclass(frozen=True)
class NormSummary:
    """Every norm the CLI reports for one expansion."""

    sup: float
    h1: float
    rkhs: float
    holder: float
    holder_alpha: float
    sum_block: float
    sup_block: float
    embedding_constant: float

    def to_dict(self) -> dict:
        return {
            "sup": self.sup,
            "h1": self.h1,
            "rkhs": self.rkhs,
            "holder": {"alpha": self.holder_alpha, "value": self.holder},
            "sum_block": self.sum_block,
            "sup_block": self.sup_block,
            "embedding_constant": self.embedding_constant,
        }


def norm_summary(
    xi: CoeffSeq,
    schedule: BlockSchedule,
    model: BasisModel,
    level: int,
    holder_alpha: Optional[float] = None,
    path: Optional[DyadicPath] = None,
) -> NormSummary:
    """Sup, H^1, l^2, Hölder and both block norms of one expansion."""
    if path is None:
        path = DyadicPath(model.synthesize(xi.coeffs[None, :], level)[0])
    holder_alpha = schedule.alpha if holder_alpha is None else holder_alpha
    holder, _ = paths.holder_quotient(path, holder_alpha)
    profile = block_profile(xi, schedule, model, level)
    weighted = schedule.weights() * profile
    return NormSummary(
        sup=paths.sup_norm(path),
        h1=paths.h1_seminorm(path),
        rkhs=rkhs_norm(xi),
        holder=holder,
        holder_alpha=holder_alpha,
        sum_block=float(weighted.sum()),
        sup_block=float(weighted.max()),
        embedding_constant=embedding_constant(schedule),
    )
