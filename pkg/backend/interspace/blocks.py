"""Block schedules n_0 = 0 < n_1 < ... < n_K and the projectors Q_k.

Block k collects the indices (n_k, n_{k+1}]. Cuts are chosen greedily:
n_k is the least index past n_{k-1} whose certified tail bound meets the
threshold of block k (2^-k(3+2a) for the sum variant, 2^-2k(a+eta) for
the sup variant).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from interspace.core.rng import StreamTag
from interspace.core.sampling import ReplicateSampler
from interspace.errors import BlockIndexError, CoefficientError, ParameterError, ScheduleError
from interspace.haar import CoeffSeq
from interspace.models import BasisModel, TailParams, tail_profile

logger = logging.getLogger(__name__)

DEFAULT_BLOCKS = 8
DEFAULT_ETA = 0.1


class Variant(str, Enum):
    """Which intermediate norm the schedule is built for."""

    SUM = "sum"
    SUP = "sup"


def validate_alpha(alpha: float) -> float:
    if not 0.0 < alpha < 1.0:
        raise ParameterError("alpha", f"{alpha!r} outside (0, 1)")
    return float(alpha)


def threshold(k: int, alpha: float, variant: Variant, eta: Optional[float] = None) -> float:
    """Certified tail bound required at the cut n_k."""
    variant = Variant(variant)
    if variant is Variant.SUM:
        return 2.0 ** (-k * (3.0 + 2.0 * alpha))
    if eta is None or eta <= 0.0:
        raise ParameterError("eta", f"sup variant needs eta > 0, got {eta!r}")
    return 2.0 ** (-2.0 * k * (alpha + eta))


@dataclass
class BlockSchedule:
    """
    Cut indices and their certificates.

    Attributes:
        alpha: Block weight exponent, weights are 2^(k alpha)
        variant: sum or sup
        cuts: n_0 = 0 < n_1 < ... < n_K
        eta: Extra decay of the sup variant
        certified: Certified tail bound at each cut (entry 0 is at n_0 = 0)
        certified_before: Certified bound at n_k - 1 for k = 1..K
        seed: Seed of the tail estimates, None for analytic schedules
        provenance: Model and tail window the certificates refer to
    """

    alpha: float
    variant: Variant
    cuts: List[int]
    eta: Optional[float] = None
    certified: List[float] = field(default_factory=list)
    certified_before: List[float] = field(default_factory=list)
    seed: Optional[int] = None
    provenance: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        validate_alpha(self.alpha)
        self.variant = Variant(self.variant)
        self.cuts = [int(n) for n in self.cuts]
        if len(self.cuts) < 2 or self.cuts[0] != 0:
            raise ParameterError("cuts", "schedule needs n_0 = 0 and at least one more cut")
        if any(b <= a for a, b in zip(self.cuts, self.cuts[1:])):
            raise ParameterError("cuts", f"cuts must be strictly increasing: {self.cuts}")
        if self.variant is Variant.SUP and (self.eta is None or self.eta <= 0.0):
            raise ParameterError("eta", f"sup variant needs eta > 0, got {self.eta!r}")

    @property
    def block_count(self) -> int:
        return len(self.cuts) - 1

    @property
    def covered(self) -> int:
        """n_K, the last index covered by the blocks."""
        return self.cuts[-1]

    def block(self, k: int) -> Tuple[int, int]:
        """Half-open 0-based column range of block k."""
        if not 0 <= k < self.block_count:
            raise BlockIndexError(k, self.block_count)
        return self.cuts[k], self.cuts[k + 1]

    def weights(self) -> np.ndarray:
        return 2.0 ** (self.alpha * np.arange(self.block_count))

    def thresholds(self) -> List[float]:
        return [threshold(k, self.alpha, self.variant, self.eta) for k in range(1, len(self.cuts))]

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "variant": self.variant.value,
            "eta": self.eta,
            "cuts": list(self.cuts),
            "thresholds": self.thresholds(),
            "certified": [float(v) for v in self.certified],
            "certified_before": [float(v) for v in self.certified_before],
            "seed": self.seed,
            "provenance": dict(self.provenance),
        }

    @classmethod
    def from_dict(cls, data: dict) -> BlockSchedule:
        return cls(
            alpha=data["alpha"],
            variant=Variant(data["variant"]),
            cuts=list(data["cuts"]),
            eta=data.get("eta"),
            certified=list(data.get("certified", [])),
            certified_before=list(data.get("certified_before", [])),
            seed=data.get("seed"),
            provenance=dict(data.get("provenance", {})),
        )

    def summary(self) -> str:
        lines = [
            f"Schedule: {self.variant.value} variant, alpha={self.alpha}, K={self.block_count}",
            f"  Cuts: {self.cuts}",
        ]
        if self.eta is not None:
            lines.append(f"  Eta: {self.eta}")
        for k, (thr, cert) in enumerate(zip(self.thresholds(), self.certified[1:]), start=1):
            lines.append(f"    n_{k}={self.cuts[k]}: certified {cert:.3e} <= {thr:.3e}")
        return "\n".join(lines)

    def __repr__(self) -> str:
        return f"BlockSchedule({self.variant.value}, alpha={self.alpha}, cuts={self.cuts})"


def dyadic_schedule(
    alpha: float, block_count: int, variant: Variant = Variant.SUP, eta: Optional[float] = None
) -> BlockSchedule:
    """n_0 = 0, n_k = 2^k: block 0 is {1, 2}, block k >= 1 is the level-k Haar range."""
    if block_count < 1:
        raise ParameterError("block_count", f"must be >= 1, got {block_count}")
    variant = Variant(variant)
    if variant is Variant.SUP and eta is None:
        eta = DEFAULT_ETA
    cuts = [0] + [2**k for k in range(1, block_count + 1)]
    return BlockSchedule(alpha=alpha, variant=variant, cuts=cuts, eta=eta)


def build_schedule(
    model: BasisModel,
    alpha: float,
    variant: Variant = Variant.SUM,
    eta: Optional[float] = None,
    block_count: int = DEFAULT_BLOCKS,
    params: Optional[TailParams] = None,
    sampler: Optional[ReplicateSampler] = None,
) -> BlockSchedule:
    """Greedy minimal cuts certified against the 99% tail bound."""
    validate_alpha(alpha)
    variant = Variant(variant)
    if variant is Variant.SUP and eta is None:
        eta = DEFAULT_ETA
    if block_count < 1:
        raise ParameterError("block_count", f"must be >= 1, got {block_count}")
    params = params or TailParams()
    sampler = sampler or ReplicateSampler(seed=0)

    profile = tail_profile(model, params, sampler)
    cuts = [0]
    certified = [profile.certified_at(0)]
    before: List[float] = []
    for k in range(1, block_count + 1):
        target = threshold(k, alpha, variant, eta)
        prev = cuts[-1]
        last = max(profile.certified.size - 1, prev + 1)
        chosen = None
        for n in range(prev + 1, last + 1):
            if profile.certified_at(n) <= target:
                chosen = n
                break
        if chosen is None:
            raise ScheduleError(k, target, profile.certified_at(last), profile.j_max)
        cuts.append(chosen)
        certified.append(profile.certified_at(chosen))
        before.append(profile.certified_at(chosen - 1))
        logger.debug(
            "schedule_cut k=%s n=%s bound=%.3e threshold=%.3e", k, chosen, certified[-1], target
        )

    schedule = BlockSchedule(
        alpha=alpha,
        variant=variant,
        cuts=cuts,
        eta=eta if variant is Variant.SUP else None,
        certified=certified,
        certified_before=before,
        seed=sampler.seed,
        provenance={"model": model.to_dict(), "tail": params.to_dict()},
    )
    logger.info("schedule_built variant=%s alpha=%s cuts=%s", variant.value, alpha, cuts)
    live = live_block_count(schedule, model)
    if live < block_count:
        logger.warning(
            "schedule_empty_blocks live=%s K=%s dimension=%s; blocks %s.. hold no basis element",
            live,
            block_count,
            model.dimension,
            live,
        )
    return schedule


def live_block_count(schedule: BlockSchedule, model: BasisModel) -> int:
    """Blocks holding at least one non-zero basis element.

    Cuts past a truncated model's dimension give empty blocks, and since
    ``model.active`` is monotone they always form a suffix.
    """
    cuts = schedule.cuts
    return sum(1 for k in range(schedule.block_count) if model.active(cuts[k + 1]) > cuts[k])


def recertify(
    schedule: BlockSchedule, model: BasisModel, params: TailParams, sampler: ReplicateSampler
) -> List[float]:
    """Upper bounds at n_1..n_K from an independent stream of the same seed."""
    profile = tail_profile(model, params, sampler, tag=StreamTag.RECERTIFY)
    return [profile.certified_at(n) for n in schedule.cuts[1:]]


def is_greedy_minimal(schedule: BlockSchedule) -> bool:
    """Each cut n_k is the first that met its threshold, judged from the stored certificates."""
    pairs = zip(schedule.thresholds(), schedule.certified_before)
    for k, (thr, before) in enumerate(pairs, start=1):
        if schedule.cuts[k] - 1 > schedule.cuts[k - 1] and before <= thr:
            return False
    return True


def check_covered(xi: CoeffSeq, schedule: BlockSchedule) -> None:
    """Raise if ``xi`` has non-zero coefficients past n_K."""
    if xi.size > schedule.covered and np.any(xi.coeffs[schedule.covered :] != 0.0):
        raise CoefficientError(
            f"Coefficients beyond n_K={schedule.covered} are not covered by the schedule"
        )


def block_project(xi: CoeffSeq, schedule: BlockSchedule, k: int) -> CoeffSeq:
    """xi restricted to (n_k, n_{k+1}], zeros elsewhere."""
    start, stop = schedule.block(k)
    out = np.zeros(xi.size)
    out[start:stop] = xi.coeffs[start:stop]
    return CoeffSeq(out)
