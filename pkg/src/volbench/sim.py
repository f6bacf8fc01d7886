"""State-vector, density-matrix and Pauli-trajectory simulation of model circuits.

States are stored as tensors with one axis per qubit; flattening in C order
puts qubit 0 in the most significant bit, so the outcome index ``x`` has the
big-endian bitstring ``format(x, f"0{n}b")``.

Noise semantics (shared by both noisy engines): after every operation of a
given kind, with probability ``p`` the touched qubits are depolarized, i.e.
replaced by the maximally mixed state.  The trajectory engine unravels this as
a uniformly random Pauli (identity included) inserted with probability ``p``.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .circuit import Circuit
from .errors import CapacityError, DomainError
from .randomgen import SeedSpec
from .routing import PhysicalProgram, Topology, compile_physical

STATEVECTOR_CAP = 20
DENSITY_CAP = 6
NORM_TOL = 1e-9
# max amplitudes held at once by a trajectory batch
_BATCH_AMPLITUDES = 1 << 21

_PAULI_1Q = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=np.complex128,
)
_PAULI_2Q = np.array([np.kron(a, b) for a, b in product(_PAULI_1Q, repeat=2)])


@dataclass(frozen=True)
class NoiseModel:
    p1: float = 0.0
    p2: float = 0.0
    p_swap: float = 0.0
    p_readout: float = 0.0

    def __post_init__(self):
        for name in ("p1", "p2", "p_swap", "p_readout"):
            value = float(getattr(self, name))
            if not 0.0 <= value <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {value}")
            object.__setattr__(self, name, value)

    def rate(self, kind: str) -> float:
        return {"gate": self.p2, "swap": self.p_swap, "idle": self.p1}[kind]

    def is_noiseless(self) -> bool:
        return self.p1 == self.p2 == self.p_swap == self.p_readout == 0.0

    def to_dict(self) -> dict:
        return {"p1": self.p1, "p2": self.p2, "p_swap": self.p_swap, "p_readout": self.p_readout}


@dataclass
class ShotCounts:
    width: int
    counts: dict[str, int] = field(default_factory=dict)

    @property
    def total_shots(self) -> int:
        return sum(self.counts.values())

    @classmethod
    def from_outcomes(cls, outcomes, width: int) -> "ShotCounts":
        tally = Counter(int(x) for x in np.asarray(outcomes).ravel())
        return cls(width, {format(x, f"0{width}b"): c for x, c in sorted(tally.items())})

    def __add__(self, other: "ShotCounts") -> "ShotCounts":
        if self.width != other.width:
            raise DomainError("cannot merge counts of different widths")
        merged = Counter(self.counts)
        merged.update(other.counts)
        return ShotCounts(self.width, dict(sorted(merged.items())))

    def frequencies(self) -> np.ndarray:
        freq = np.zeros(2**self.width)
        for bits, c in self.counts.items():
            freq[int(bits, 2)] += c
        return freq / self.total_shots

    def to_json(self) -> str:
        return json.dumps({"shots": self.total_shots, "counts": dict(sorted(self.counts.items()))})

    @classmethod
    def from_json(cls, text: str) -> "ShotCounts":
        data = json.loads(text)
        counts = {str(k): int(v) for k, v in data["counts"].items()}
        width = len(next(iter(counts))) if counts else 0
        out = cls(width, counts)
        if out.total_shots != int(data["shots"]):
            raise DomainError("counts do not sum to the declared shot total")
        return out


def _check_width(n: int, cap: int, engine: str):
    if n > cap:
        raise CapacityError(f"{engine} simulation is capped at {cap} qubits, got {n}")


def _apply_matrix(psi: np.ndarray, u: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
    """Apply ``u`` (2^k x 2^k, or a stack of them matching the leading axis)
    to the tensor axes ``axes``; the first listed axis is the most significant."""
    k = len(axes)
    moved = np.moveaxis(psi, axes, tuple(range(-k, 0)))
    shape = moved.shape
    if u.ndim == 3:
        flat = moved.reshape(shape[0], -1, 2**k) @ np.swapaxes(u, 1, 2)
    else:
        flat = moved.reshape(-1, 2**k) @ u.T
    return np.moveaxis(flat.reshape(shape), tuple(range(-k, 0)), axes)


def zero_state(n: int) -> np.ndarray:
    psi = np.zeros(2**n, dtype=np.complex128)
    psi[0] = 1.0
    return psi


def _width_of(state: np.ndarray) -> int:
    n = int(np.log2(state.size))
    if 2**n != state.size:
        raise DomainError(f"state length {state.size} is not a power of two")
    return n


def apply_gate(state: np.ndarray, u: np.ndarray, pair) -> np.ndarray:
    """Apply a two-qubit unitary to positions ``pair`` of a flat state vector."""
    n = _width_of(state)
    a, b = pair
    if a == b or not (0 <= a < n and 0 <= b < n):
        raise IndexError(f"invalid qubit pair {pair} for width {n}")
    return _apply_matrix(state.reshape((2,) * n), np.asarray(u), (a, b)).reshape(-1)


def apply_permutation(state: np.ndarray, perm) -> np.ndarray:
    """Position ``i`` of the result holds the qubit previously at ``perm[i]``."""
    n = _width_of(state)
    return np.transpose(state.reshape((2,) * n), tuple(perm)).reshape(-1)


def _check_norm(state: np.ndarray, where: str):
    norm = float(np.vdot(state, state).real)
    if abs(norm - 1.0) > NORM_TOL:
        raise FloatingPointError(f"state norm drifted to {norm!r} {where}")


def final_state(circuit: Circuit, cap: int = STATEVECTOR_CAP) -> np.ndarray:
    n = circuit.width
    _check_width(n, cap, "state-vector")
    psi = zero_state(n).reshape((2,) * n)
    for li, layer in enumerate(circuit.layers):
        psi = np.transpose(psi, layer.perm)
        for g in layer.gates:
            psi = _apply_matrix(psi, g.u, g.pair)
        _check_norm(psi.reshape(-1), f"after layer {li}")
    return np.ascontiguousarray(psi).reshape(-1)


def ideal_probabilities(circuit: Circuit, cap: int = STATEVECTOR_CAP) -> np.ndarray:
    """Exact Born-rule output distribution from |0...0>."""
    psi = final_state(circuit, cap)
    return np.abs(psi) ** 2


def _to_logical(probs_phys: np.ndarray, layout) -> np.ndarray:
    n = len(layout)
    return np.ascontiguousarray(np.transpose(probs_phys.reshape((2,) * n), tuple(layout))).reshape(-1)


def program_probabilities(program: PhysicalProgram, cap: int = STATEVECTOR_CAP) -> np.ndarray:
    """Noiseless distribution of a compiled physical program, in logical bit order."""
    n = program.width
    _check_width(n, cap, "state-vector")
    psi = zero_state(n).reshape((2,) * n)
    for op in program.ops:
        if op.u is not None:
            psi = _apply_matrix(psi, op.u, op.qubits)
    return _to_logical(np.abs(psi.reshape(-1)) ** 2, program.layout)


def _program(circuit: Circuit, topology: Topology | None) -> PhysicalProgram:
    return compile_physical(circuit, topology)


def _readout_channel(probs: np.ndarray, n: int, p: float) -> np.ndarray:
    if p == 0.0:
        return probs
    flip = np.array([[1 - p, p], [p, 1 - p]])
    t = probs.reshape((2,) * n)
    for q in range(n):
        t = np.moveaxis(np.tensordot(flip, t, axes=([1], [q])), 0, q)
    return t.reshape(-1)


def noisy_distribution_exact(
    circuit: Circuit, noise: NoiseModel, topology: Topology | None = None, cap: int = DENSITY_CAP
) -> np.ndarray:
    """Exact noisy output distribution by density-matrix evolution."""
    n = circuit.width
    _check_width(n, cap, "density-matrix")
    prog = _program(circuit, topology)
    rho = np.zeros((2,) * (2 * n), dtype=np.complex128)
    rho[(0,) * (2 * n)] = 1.0
    for op in prog.ops:
        qs = op.qubits
        bra = tuple(q + n for q in qs)
        if op.u is not None:
            rho = _apply_matrix(rho, op.u, qs)
            rho = _apply_matrix(rho, op.u.conj(), bra)
        p = noise.rate(op.kind)
        if p > 0.0:
            rho = (1.0 - p) * rho + p * _depolarized(rho, qs, n)
    diag = np.real(np.diagonal(rho.reshape(2**n, 2**n))).copy()
    probs = _to_logical(np.clip(diag, 0.0, None), prog.layout)
    return _readout_channel(probs, n, noise.p_readout)


def _depolarized(rho: np.ndarray, qubits, n: int) -> np.ndarray:
    """Trace out ``qubits`` and replace them with the maximally mixed state."""
    k = len(qubits)
    axes = tuple(qubits) + tuple(q + n for q in qubits)
    moved = np.moveaxis(rho, axes, tuple(range(-2 * k, 0)))
    shape = moved.shape
    block = moved.reshape(shape[: -2 * k] + (2**k, 2**k))
    reduced = np.trace(block, axis1=-2, axis2=-1)
    mixed = reduced[..., None, None] * (np.eye(2**k) / 2**k)
    return np.moveaxis(mixed.reshape(shape), tuple(range(-2 * k, 0)), axes)


def _draw_events(prog: PhysicalProgram, noise: NoiseModel, shots: int, rng: np.random.Generator):
    """Per-op Pauli insertions as (shot indices, Pauli labels); identity draws dropped."""
    events = []
    for op in prog.ops:
        p = noise.rate(op.kind)
        if p == 0.0:
            events.append(None)
            continue
        hits = int(rng.binomial(shots, p))
        if hits == 0:
            events.append(None)
            continue
        rows = rng.choice(shots, size=hits, replace=False)
        labels = rng.integers(0, 4 ** len(op.qubits), size=hits)
        keep = labels != 0
        events.append((rows[keep], labels[keep]) if keep.any() else None)
    return events


def _sample_rows(probs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One outcome per row of a (batch, 2^n) probability array."""
    cdf = np.cumsum(probs, axis=1)
    u = rng.random(probs.shape[0]) * cdf[:, -1]
    idx = (cdf < u[:, None]).sum(axis=1)
    return np.minimum(idx, probs.shape[1] - 1)


def _run_batch(prog: PhysicalProgram, events, rows: np.ndarray) -> np.ndarray:
    n = prog.width
    batch = len(rows)
    slot = {int(r): i for i, r in enumerate(rows)}
    psi = np.zeros((batch,) + (2,) * n, dtype=np.complex128)
    psi[(slice(None),) + (0,) * n] = 1.0
    axes_of = lambda qs: tuple(q + 1 for q in qs)  # noqa: E731
    for op, ev in zip(prog.ops, events):
        if op.u is not None:
            psi = _apply_matrix(psi, op.u, axes_of(op.qubits))
        if ev is None:
            continue
        sel = [(slot[int(r)], lab) for r, lab in zip(*ev) if int(r) in slot]
        if not sel:
            continue
        idx = np.array([s for s, _ in sel])
        paulis = (_PAULI_1Q if len(op.qubits) == 1 else _PAULI_2Q)[[lab for _, lab in sel]]
        psi[idx] = _apply_matrix(psi[idx], paulis, axes_of(op.qubits))
    return np.abs(psi.reshape(batch, -1)) ** 2


def sample_program(
    prog: PhysicalProgram, noise: NoiseModel, shots: int, rng: np.random.Generator
) -> np.ndarray:
    """Sample ``shots`` logical outcome indices from a compiled program."""
    n = prog.width
    events = _draw_events(prog, noise, shots, rng)
    hit_rows = np.unique(np.concatenate([ev[0] for ev in events if ev is not None] or [np.empty(0, int)]))
    clean = np.setdiff1d(np.arange(shots), hit_rows, assume_unique=True)

    outcomes = np.empty(shots, dtype=np.int64)
    if clean.size:
        psi = zero_state(n).reshape((2,) * n)
        for op in prog.ops:
            if op.u is not None:
                psi = _apply_matrix(psi, op.u, op.qubits)
        probs = np.abs(psi.reshape(-1)) ** 2
        outcomes[clean] = rng.choice(2**n, size=clean.size, p=probs / probs.sum())
    chunk = max(1, _BATCH_AMPLITUDES // 2**n)
    for start in range(0, hit_rows.size, chunk):
        rows = hit_rows[start : start + chunk]
        outcomes[rows] = _sample_rows(_run_batch(prog, events, rows), rng)

    # physical bits -> logical bits (qubit 0 is the most significant bit)
    shifts = n - 1 - np.arange(n)
    phys_bits = (outcomes[:, None] >> shifts) & 1
    bits = phys_bits[:, list(prog.layout)]
    if noise.p_readout > 0.0:
        bits ^= (rng.random((shots, n)) < noise.p_readout).astype(bits.dtype)
    return (bits << shifts).sum(axis=1)


def sample_noisy_trajectory(
    circuit: Circuit,
    noise: NoiseModel,
    shots: int,
    seed: SeedSpec,
    topology: Topology | None = None,
    cap: int = STATEVECTOR_CAP,
) -> ShotCounts:
    """Monte-Carlo sampling with stochastic Pauli insertion and readout flips."""
    if shots < 1:
        raise DomainError("shots must be >= 1")
    _check_width(circuit.width, cap, "state-vector")
    prog = _program(circuit, topology)
    outcomes = sample_program(prog, noise, shots, seed.generator())
    return ShotCounts.from_outcomes(outcomes, circuit.width)
