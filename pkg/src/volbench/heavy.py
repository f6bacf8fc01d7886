"""Heavy-output sets and the 2/3 heavy-output-probability test."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .sim import ShotCounts

THRESHOLD = 2.0 / 3.0
SIGMAS = 2.0
PROB_SUM_TOL = 1e-9


@dataclass(frozen=True)
class HeavySet:
    median: float
    members: frozenset[str]
    ideal_heavy_mass: float


def heavy_set(ideal_probs) -> HeavySet:
    """Outcomes whose ideal probability is strictly above the median."""
    probs = np.asarray(ideal_probs, dtype=float)
    n = int(round(math.log2(probs.size)))
    if 2**n != probs.size:
        raise DomainError(f"distribution length {probs.size} is not a power of two")
    if abs(probs.sum() - 1.0) > PROB_SUM_TOL:
        raise DomainError(f"probabilities sum to {probs.sum()!r}, not 1")
    median = float(np.median(probs))
    idx = np.flatnonzero(probs > median)
    members = frozenset(format(int(i), f"0{n}b") for i in idx)
    return HeavySet(median, members, float(probs[idx].sum()))


def hop_estimate(counts: ShotCounts, hs: HeavySet) -> float:
    total = counts.total_shots
    if total < 1:
        raise DomainError("no shots to estimate from")
    heavy = sum(c for bits, c in counts.counts.items() if bits in hs.members)
    return heavy / total


@dataclass(frozen=True)
class HeavyOutputResult:
    per_circuit_hop: tuple[float, ...]
    pooled_hop: float
    ci_low: float
    shots_per_circuit: int
    threshold: float = THRESHOLD
    passed: bool = False
    degenerate: bool = False
    sigmas: float = SIGMAS

    def to_dict(self) -> dict:
        return {
            "per_circuit_hop": list(self.per_circuit_hop),
            "pooled_hop": self.pooled_hop,
            "ci_low": self.ci_low,
            "shots_per_circuit": self.shots_per_circuit,
            "threshold": self.threshold,
            "sigmas": self.sigmas,
            "passed": self.passed,
            "degenerate": self.degenerate,
        }


def evaluate_pass(per_circuit_hops, shots_per_circuit: int, sigmas: float = SIGMAS) -> HeavyOutputResult:
    """Pool per-circuit HOPs and compare the lower confidence bound with 2/3.

    The bound is ``mean - sigmas * sqrt(mean (1 - mean) / (circuits * shots))``.
    A pooled value of exactly 0 or 1 from fewer than 10 total shots has no
    meaningful interval and is reported as degenerate and not passed.
    """
    hops = tuple(float(h) for h in per_circuit_hops)
    nc = len(hops)
    if nc < 2:
        raise DomainError(f"need at least 2 circuits, got {nc}")
    if shots_per_circuit < 1:
        raise DomainError("shots per circuit must be >= 1")
    total = nc * shots_per_circuit
    pooled = sum(hops) / nc
    if pooled in (0.0, 1.0) and total < 10:
        return HeavyOutputResult(hops, pooled, 0.0, shots_per_circuit, passed=False, degenerate=True, sigmas=sigmas)
    ci_low = pooled - sigmas * math.sqrt(pooled * (1.0 - pooled) / total)
    ci_low = min(max(ci_low, 0.0), pooled)
    return HeavyOutputResult(hops, pooled, ci_low, shots_per_circuit, passed=ci_low > THRESHOLD, sigmas=sigmas)
