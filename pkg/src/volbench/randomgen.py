"""Seeded generation of Haar-random SU(4) gates, permutations and model circuits.

Every random draw comes from a generator keyed by ``(master_seed, stream_path)``.
Child streams are obtained by appending integers to the path, so any subset of
circuits, layers or gates can be regenerated independently and in any order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .circuit import Circuit, Gate, Layer
from .errors import DomainError

# Recorded in run reports so results can be traced to the exact generator.
RNG_ALGORITHM = "numpy.random.PCG64 seeded by SeedSequence(entropy=master_seed, spawn_key=stream_path)"

Pairing = Literal["adjacent", "random-disjoint"]

# stream tags appended below a layer's path
_PERM, _GATES, _PAIRING = 0, 1, 2


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    stream_path: tuple[int, ...] = ()

    def __post_init__(self):
        seed = int(self.master_seed)
        if not 0 <= seed < 2**64:
            raise DomainError(f"master seed must be a 64-bit unsigned integer, got {seed}")
        object.__setattr__(self, "master_seed", seed)
        object.__setattr__(self, "stream_path", tuple(int(s) for s in self.stream_path))

    def child(self, *path: int) -> "SeedSpec":
        return SeedSpec(self.master_seed, self.stream_path + tuple(path))

    def generator(self) -> np.random.Generator:
        # SeedSequence hashes (entropy, spawn_key) into the 128-bit PCG64 state
        ss = np.random.SeedSequence(entropy=self.master_seed, spawn_key=self.stream_path)
        return np.random.Generator(np.random.PCG64(ss))


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed element of U(dim) via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    # fixes the phase ambiguity of QR so the result is exactly Haar
    return q * (d / np.abs(d))


def haar_su4(seed: SeedSpec) -> np.ndarray:
    u = haar_unitary(4, seed.generator())
    det = np.linalg.det(u)
    return u / det ** 0.25


def random_permutation(n: int, seed: SeedSpec) -> tuple[int, ...]:
    if n < 1:
        raise DomainError(f"permutation size must be >= 1, got {n}")
    return tuple(int(x) for x in seed.generator().permutation(n))


def layer_pairs(n: int, pairing: Pairing, seed: SeedSpec | None = None) -> list[tuple[int, int]]:
    if pairing == "adjacent":
        order = list(range(n))
    elif pairing == "random-disjoint":
        if seed is None:
            raise DomainError("random-disjoint pairing needs a seed")
        order = list(random_permutation(n, seed))
    else:
        raise DomainError(f"unknown pairing {pairing!r}")
    return [(order[2 * i], order[2 * i + 1]) for i in range(n // 2)]


def build_model_circuit(n: int, d: int, seed: SeedSpec, pairing: Pairing = "adjacent") -> Circuit:
    """Width-``n``, depth-``d`` model circuit: each layer is a uniform random
    permutation followed by ``n // 2`` independent Haar SU(4) gates."""
    if n < 2:
        raise DomainError(f"model circuits need at least 2 qubits, got {n}")
    if d < 1:
        raise DomainError(f"depth must be >= 1, got {d}")
    layers = []
    for li in range(d):
        lseed = seed.child(li)
        perm = random_permutation(n, lseed.child(_PERM))
        pairs = layer_pairs(n, pairing, lseed.child(_PAIRING))
        gates = tuple(
            Gate(pair, haar_su4(lseed.child(_GATES, gi))) for gi, pair in enumerate(pairs)
        )
        layers.append(Layer(perm, gates))
    return Circuit(n, tuple(layers))
