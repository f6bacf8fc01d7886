"""Intermediate representation for layered model circuits.

A circuit of width ``n`` is a list of layers.  Each layer first permutes the
qubit positions and then applies two-qubit unitaries on disjoint pairs of
post-permutation positions.

Permutation convention: after applying ``perm``, position ``i`` holds the
content that was previously at position ``perm[i]`` (``numpy.transpose``
semantics on the ``n``-axis state tensor).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvariantError, ParseError, SchemaError

UNITARY_TOL = 1e-10


def _frozen_matrix(u) -> np.ndarray:
    arr = np.array(u, dtype=np.complex128)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Gate:
    pair: tuple[int, int]
    u: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pair", tuple(int(q) for q in self.pair))
        object.__setattr__(self, "u", _frozen_matrix(self.u))

    def __eq__(self, other):
        if not isinstance(other, Gate):
            return NotImplemented
        return (
            self.pair == other.pair
            and self.u.shape == other.u.shape
            and np.array_equal(self.u, other.u)
        )

    __hash__ = None


@dataclass(frozen=True)
class Layer:
    perm: tuple[int, ...]
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "perm", tuple(int(p) for p in self.perm))
        object.__setattr__(self, "gates", tuple(self.gates))

    def idle_positions(self, width: int) -> list[int]:
        used = {q for g in self.gates for q in g.pair}
        return [q for q in range(width) if q not in used]


@dataclass(frozen=True)
class Circuit:
    width: int
    layers: tuple[Layer, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))

    def depth(self) -> int:
        return len(self.layers)


@dataclass(frozen=True)
class Violation:
    layer: int | None
    message: str

    def __str__(self):
        where = "circuit" if self.layer is None else f"layer {self.layer}"
        return f"{where}: {self.message}"


def is_bijection(perm: Sequence[int], n: int) -> bool:
    return len(perm) == n and sorted(perm) == list(range(n))


def compose_permutations(p: Sequence[int], q: Sequence[int]) -> tuple[int, ...]:
    """Single permutation equivalent to applying ``q`` first, then ``p``."""
    return tuple(q[i] for i in p)


def invert_permutation(p: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(p)
    for i, pi in enumerate(p):
        inv[pi] = i
    return tuple(inv)


def unitary_defects(u: np.ndarray) -> tuple[float, float]:
    """Return (max |U^dag U - I|, |det U - 1|)."""
    u = np.asarray(u, dtype=np.complex128)
    gram = u.conj().T @ u
    off = float(np.max(np.abs(gram - np.eye(u.shape[0]))))
    return off, float(abs(np.linalg.det(u) - 1.0))


def _gate_violations(gate: Gate, width: int) -> list[str]:
    problems = []
    a, b = gate.pair if len(gate.pair) == 2 else (None, None)
    if len(gate.pair) != 2:
        problems.append(f"gate pair {gate.pair} does not have two entries")
    elif not (0 <= a < width and 0 <= b < width):
        problems.append(f"gate pair {gate.pair} out of range for width {width}")
    elif a == b:
        problems.append(f"gate pair {gate.pair} repeats a qubit")
    if gate.u.shape != (4, 4):
        problems.append(f"gate matrix has shape {gate.u.shape}, expected (4, 4)")
    elif not np.all(np.isfinite(gate.u)):
        problems.append("gate matrix has non-finite entries")
    else:
        off, det_err = unitary_defects(gate.u)
        if off > UNITARY_TOL:
            problems.append(f"gate matrix not unitary (max |U^dag U - I| = {off:.3g})")
        if det_err > UNITARY_TOL:
            problems.append(f"gate matrix not special (|det - 1| = {det_err:.3g})")
    return problems


def validate(circuit: Circuit) -> list[Violation]:
    """List every invariant violation; an empty list means the circuit is valid."""
    report = []
    n = circuit.width
    if not isinstance(n, int) or n < 1:
        return [Violation(None, f"width must be a positive integer, got {n!r}")]
    for li, layer in enumerate(circuit.layers):
        if not is_bijection(layer.perm, n):
            report.append(Violation(li, f"permutation {list(layer.perm)} is not a bijection on [0, {n})"))
        seen: set[int] = set()
        for gate in layer.gates:
            for msg in _gate_violations(gate, n):
                report.append(Violation(li, msg))
            overlap = seen.intersection(gate.pair)
            if overlap:
                report.append(Violation(li, f"overlapping pairs on qubit(s) {sorted(overlap)}"))
            seen.update(gate.pair)
        if len(layer.gates) != n // 2:
            report.append(Violation(li, f"expected {n // 2} gates, found {len(layer.gates)}"))
    return report


def to_dict(circuit: Circuit) -> dict:
    return {
        "width": circuit.width,
        "layers": [
            {
                "perm": list(layer.perm),
                "gates": [
                    {
                        "pair": list(g.pair),
                        "u": [[[float(z.real), float(z.imag)] for z in row] for row in g.u],
                    }
                    for g in layer.gates
                ],
            }
            for layer in circuit.layers
        ],
    }


def serialize(circuit: Circuit) -> str:
    # json writes floats with repr(), which round-trips doubles exactly
    return json.dumps(to_dict(circuit), separators=(",", ":"))


def _require(obj, key, kind, where):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"{where}: missing field {key!r}")
    value = obj[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise SchemaError(f"{where}: field {key!r} has wrong type {type(value).__name__}")
    return value


def _parse_matrix(raw, where) -> np.ndarray:
    if not isinstance(raw, list) or len(raw) != 4:
        raise SchemaError(f"{where}: matrix must have 4 rows")
    out = np.empty((4, 4), dtype=np.complex128)
    for i, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != 4:
            raise SchemaError(f"{where}: matrix row {i} must have 4 entries")
        for j, z in enumerate(row):
            if (
                not isinstance(z, list)
                or len(z) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in z)
            ):
                raise SchemaError(f"{where}: entry [{i}][{j}] must be a [re, im] pair")
            out[i, j] = complex(z[0], z[1])
    return out


def from_dict(data) -> Circuit:
    width = _require(data, "width", int, "circuit")
    raw_layers = _require(data, "layers", list, "circuit")
    layers = []
    for li, raw in enumerate(raw_layers):
        where = f"layer {li}"
        perm = _require(raw, "perm", list, where)
        if not all(isinstance(p, int) and not isinstance(p, bool) for p in perm):
            raise SchemaError(f"{where}: permutation entries must be integers")
        gates = []
        for gi, graw in enumerate(_require(raw, "gates", list, where)):
            gwhere = f"{where} gate {gi}"
            pair = _require(graw, "pair", list, gwhere)
            if len(pair) != 2 or not all(isinstance(q, int) and not isinstance(q, bool) for q in pair):
                raise SchemaError(f"{gwhere}: pair must be two integers")
            u = _parse_matrix(_require(graw, "u", list, gwhere), gwhere)
            gates.append(Gate(tuple(pair), u))
        layers.append(Layer(tuple(perm), tuple(gates)))
    circuit = Circuit(width, tuple(layers))
    problems = validate(circuit)
    if problems:
        raise InvariantError("; ".join(str(v) for v in problems))
    return circuit


def deserialize(text: str) -> Circuit:
    try:
        data = json.loads(text)
    except (json.JSONDecodeError, TypeError) as exc:
        raise ParseError(f"malformed circuit JSON: {exc}") from exc
    return from_dict(data)
