"""QV-k scoring: width tests on n x n^k model circuits with early termination."""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .errors import CapacityError, DomainError
from .heavy import HeavyOutputResult, evaluate_pass, heavy_set, hop_estimate
from .randomgen import SeedSpec, build_model_circuit
from .routing import TopologySpec, compile_physical
from .sim import STATEVECTOR_CAP, NoiseModel, ideal_probabilities, sample_program, ShotCounts

CLASSES = (1, 2, 3, 4, 5)
DEFAULT_N_MAX = {1: 8, 2: 8, 3: 6, 4: 5, 5: 5}

# stream tags under (k, n, circuit_index)
_CIRCUIT_STREAM, _SAMPLING_STREAM = 0, 1


@dataclass(frozen=True)
class ProtocolConfig:
    circuits: int = 100
    shots: int = 1000
    topology: TopologySpec = field(default_factory=lambda: TopologySpec("all-to-all"))
    pairing: str = "adjacent"
    jobs: int = 1

    def __post_init__(self):
        if self.circuits < 2:
            raise DomainError("a width test needs at least 2 circuits")
        if self.shots < 1:
            raise DomainError("shots must be >= 1")
        if self.jobs < 1:
            raise DomainError("jobs must be >= 1")

    def to_dict(self) -> dict:
        # jobs is deliberately absent: it never changes results
        return {
            "circuits": self.circuits,
            "shots": self.shots,
            "topology": str(self.topology),
            "pairing": self.pairing,
        }


@dataclass(frozen=True)
class WidthResult:
    n: int
    depth: int
    heavy: HeavyOutputResult
    routed_depth: int
    mean_swaps: float

    @property
    def passed(self) -> bool:
        return self.heavy.passed

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "depth": self.depth,
            "routed_depth": self.routed_depth,
            "mean_swaps": self.mean_swaps,
            **self.heavy.to_dict(),
        }


@dataclass(frozen=True)
class VolumetricScore:
    k: int
    score: int
    widths: tuple[WidthResult, ...]
    config_digest: str
    n_max: int

    def to_dict(self) -> dict:
        return {
            "class": f"QV-{self.k}",
            "k": self.k,
            "score": self.score,
            "n_max": self.n_max,
            "config_digest": self.config_digest,
            "widths": [w.to_dict() for w in self.widths],
        }


def shape(k: int, n: int) -> tuple[int, int]:
    """Circuit shape (width, depth) = (n, n^k) tested by class QV-k at width n."""
    if k not in CLASSES:
        raise DomainError(f"volumetric class must be one of {CLASSES}, got {k}")
    if n < 2:
        raise DomainError(f"width must be >= 2, got {n}")
    return n, n**k


def qv1_to_quantum_volume(score: int) -> int:
    """Quantum volume V_Q = 2^score for a QV-1 score."""
    if score < 0:
        raise DomainError("score must be non-negative")
    if score > 62:
        raise OverflowError(f"2^{score} does not fit in a signed 64-bit integer")
    return 1 << score


def _trial(args):
    k, n, i, noise, config, master_seed = args
    width, depth = shape(k, n)
    base = SeedSpec(master_seed, (k, n, i))
    circuit = build_model_circuit(width, depth, base.child(_CIRCUIT_STREAM), config.pairing)
    hs = heavy_set(ideal_probabilities(circuit))
    prog = compile_physical(circuit, config.topology.for_width(width))
    outcomes = sample_program(prog, noise, config.shots, base.child(_SAMPLING_STREAM).generator())
    hop = hop_estimate(ShotCounts.from_outcomes(outcomes, width), hs)
    return hop, prog.depth, prog.swap_count


def run_width_test(
    k: int, n: int, noise: NoiseModel, config: ProtocolConfig, seed: int, executor=None
) -> WidthResult:
    width, depth = shape(k, n)
    if width > STATEVECTOR_CAP:
        raise CapacityError(f"width {width} exceeds the state-vector cap {STATEVECTOR_CAP}")
    tasks = [(k, n, i, noise, config, seed) for i in range(config.circuits)]
    if executor is not None:
        results = list(executor.map(_trial, tasks))
    else:
        results = [_trial(t) for t in tasks]
    hops = [r[0] for r in results]
    return WidthResult(
        n=n,
        depth=depth,
        heavy=evaluate_pass(hops, config.shots),
        routed_depth=max(r[1] for r in results),
        mean_swaps=sum(r[2] for r in results) / len(results),
    )


def config_digest(k: int, noise: NoiseModel, config: ProtocolConfig, n_max: int, seed: int) -> str:
    payload = {
        "k": k,
        "n_max": n_max,
        "noise": noise.to_dict(),
        "protocol": config.to_dict(),
        "seed": seed,
    }
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def compute_score(
    k: int, noise: NoiseModel, config: ProtocolConfig, n_max: int | None = None, seed: int = 0
) -> VolumetricScore:
    """Largest n such that every width 2..n passes; ascent stops at the first failure."""
    n_max = DEFAULT_N_MAX[k] if n_max is None else n_max
    if n_max < 2:
        raise DomainError("n_max must be >= 2")
    if n_max > STATEVECTOR_CAP:
        raise CapacityError(f"n_max {n_max} exceeds the state-vector cap {STATEVECTOR_CAP}")
    widths = []
    executor = ProcessPoolExecutor(config.jobs) if config.jobs > 1 else None
    try:
        for n in range(2, n_max + 1):
            result = run_width_test(k, n, noise, config, seed, executor)
            widths.append(result)
            if not result.passed:
                break
    finally:
        if executor is not None:
            executor.shutdown()
    return VolumetricScore(
        k=k,
        score=score_from_widths(widths),
        widths=tuple(widths),
        config_digest=config_digest(k, noise, config, n_max, seed),
        n_max=n_max,
    )


def score_from_widths(widths) -> int:
    """Largest n of a contiguous passing run 2, 3, ..., n (0 if width 2 fails)."""
    score = 0
    for expected, w in enumerate(sorted(widths, key=lambda w: w.n), start=2):
        if w.n != expected or not w.passed:
            break
        score = w.n
    return score


def achieved_volumetric_value(k: int, widths) -> int:
    """max over passing widths of min(n, depth^(1/k)), evaluated on achieved shapes."""
    best = 0
    for w in widths:
        if w.passed:
            root = round(w.depth ** (1.0 / k))
            while root**k > w.depth:
                root -= 1
            while (root + 1) ** k <= w.depth:
                root += 1
            best = max(best, min(w.n, root))
    return best
