"""Realizing layer permutations on constrained qubit topologies.

Routing uses odd-even transposition sorting along lines (and rings, which
contain a line), and a three-phase column/row/column scheme on full grids.
On all-to-all devices a permutation is a free relabeling.

Grid qubits are numbered in snake (boustrophedon) order so that consecutive
indices are always physically adjacent; the adjacent gate pairs
``(0, 1), (2, 3), ...`` therefore never need extra routing.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .circuit import Circuit, compose_permutations, invert_permutation, is_bijection
from .errors import DomainError, UnsupportedTopologyError

KINDS = ("all-to-all", "line", "ring", "grid")

SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128
)


@dataclass(frozen=True)
class Topology:
    kind: str
    size: int
    w: int = 0
    h: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UnsupportedTopologyError(f"unknown topology kind {self.kind!r}")
        if self.size < 1:
            raise DomainError("topology size must be positive")
        if self.kind == "grid":
            if self.w < 1 or self.h < 1:
                raise DomainError("grid needs positive dimensions")
            if self.size > self.w * self.h:
                raise DomainError(f"{self.size} qubits do not fit on a {self.w}x{self.h} grid")

    @property
    def full_grid(self) -> bool:
        return self.kind == "grid" and self.size == self.w * self.h

    def cell(self, q: int) -> tuple[int, int]:
        r, off = divmod(q, self.w)
        return r, (off if r % 2 == 0 else self.w - 1 - off)

    def qubit_at(self, r: int, c: int) -> int:
        return r * self.w + (c if r % 2 == 0 else self.w - 1 - c)

    def edges(self) -> set[tuple[int, int]]:
        n = self.size
        if self.kind == "all-to-all":
            return {(a, b) for a in range(n) for b in range(a + 1, n)}
        out = {(q, q + 1) for q in range(n - 1)}
        if self.kind == "ring" and n > 2:
            out.add((0, n - 1))
        elif self.kind == "grid":
            for q in range(n):
                r, c = self.cell(q)
                if r + 1 < self.h:
                    below = self.qubit_at(r + 1, c)
                    if below < n:
                        out.add((min(q, below), max(q, below)))
        return out

    def adjacent(self, a: int, b: int) -> bool:
        if self.kind == "all-to-all":
            return a != b
        return (min(a, b), max(a, b)) in self.edges()


def _near_square(n: int) -> tuple[int, int]:
    h = max(d for d in range(1, math.isqrt(n) + 1) if n % d == 0)
    return n // h, h


@dataclass(frozen=True)
class TopologySpec:
    """Topology family as given on the command line, instantiated per width."""

    kind: str
    w: int = 0
    h: int = 0

    def for_width(self, n: int) -> Topology:
        if self.kind == "grid":
            if self.w:
                return Topology("grid", n, self.w, self.h)
            w, h = _near_square(n)
            return Topology("grid", n, w, h)
        return Topology(self.kind, n)

    def __str__(self):
        if self.kind == "all-to-all":
            return "all2all"
        if self.kind == "grid" and self.w:
            return f"grid:{self.w}x{self.h}"
        return self.kind


def parse_topology(text: str) -> TopologySpec:
    text = text.strip().lower()
    if text in ("all2all", "all-to-all", "all_to_all"):
        return TopologySpec("all-to-all")
    if text in ("line", "ring", "grid"):
        return TopologySpec(text)
    m = re.fullmatch(r"grid:(\d+)x(\d+)", text)
    if m:
        w, h = int(m.group(1)), int(m.group(2))
        if w < 1 or h < 1:
            raise UnsupportedTopologyError(f"bad grid dimensions in {text!r}")
        return TopologySpec("grid", w, h)
    raise UnsupportedTopologyError(f"unsupported topology {text!r}")


@dataclass(frozen=True)
class RoutedLayer:
    """Swap layers applied first, then a free relabeling of positions."""

    swap_layers: tuple[tuple[tuple[int, int], ...], ...]
    relabeling: tuple[int, ...]

    def realized_permutation(self) -> tuple[int, ...]:
        n = len(self.relabeling)
        total = tuple(range(n))
        for layer in self.swap_layers:
            step = list(range(n))
            for a, b in layer:
                step[a], step[b] = step[b], step[a]
            total = compose_permutations(step, total)
        return compose_permutations(self.relabeling, total)

    def swap_count(self) -> int:
        return sum(len(layer) for layer in self.swap_layers)


def _odd_even_layers(line: Sequence[int], targets: list[int]) -> list[list[tuple[int, int]]]:
    """Sort ``targets`` (target slot of the token at each slot of ``line``)
    by odd-even transposition; return the non-empty swap rounds as qubit pairs."""
    arr = list(targets)
    length = len(arr)
    rounds = []
    for t in range(length):
        swaps = []
        for j in range(t % 2, length - 1, 2):
            if arr[j] > arr[j + 1]:
                arr[j], arr[j + 1] = arr[j + 1], arr[j]
                swaps.append((line[j], line[j + 1]))
        if swaps:
            rounds.append(swaps)
    assert arr == sorted(arr)
    return rounds


def _merge_parallel(groups: list[list[list[tuple[int, int]]]]) -> list[tuple[tuple[int, int], ...]]:
    depth = max((len(g) for g in groups), default=0)
    return [
        tuple(pair for g in groups if t < len(g) for pair in g[t])
        for t in range(depth)
    ]


def _route_line(dest: Sequence[int]) -> list[tuple[tuple[int, int], ...]]:
    return [tuple(r) for r in _odd_even_layers(range(len(dest)), list(dest))]


def _route_grid(topo: Topology, dest: Sequence[int]) -> list[tuple[tuple[int, int], ...]]:
    w, h = topo.w, topo.h
    # token currently in cell (r, c) -> destination cell
    token_dest = {topo.cell(q): topo.cell(dest[q]) for q in range(topo.size)}

    # Phase 1 rows come from an h-edge-colouring of the column -> destination
    # column multigraph; each colour class is a perfect matching.
    pending: dict[tuple[int, int], list[int]] = {}
    for (r, c), (_, dc) in token_dest.items():
        pending.setdefault((c, dc), []).append(r)
    counts = np.zeros((w, w), dtype=int)
    for (c, dc), rows in pending.items():
        counts[c, dc] = len(rows)
    colour_of: dict[tuple[int, int], int] = {}
    for colour in range(h):
        cols, dcols = linear_sum_assignment(-(counts > 0).astype(int))
        for c, dc in zip(cols, dcols):
            assert counts[c, dc] > 0, "regular bipartite multigraph must have a perfect matching"
            counts[c, dc] -= 1
            colour_of[(pending[(c, dc)].pop(), c)] = colour
    # any colour -> row bijection works; pick the one leaving most tokens in place
    stay = np.zeros((h, h), dtype=int)
    for (r, _), colour in colour_of.items():
        stay[colour, r] += 1
    colours, rows = linear_sum_assignment(-stay)
    row_of_colour = dict(zip(colours, rows))
    mid_row = {cell: int(row_of_colour[colour]) for cell, colour in colour_of.items()}

    # source cell of the token sitting in each cell after phases 1 and 2
    after1 = {(row, c): (r, c) for (r, c), row in mid_row.items()}
    after2 = {(row, token_dest[src][1]): src for (row, _), src in after1.items()}

    phase1 = [
        _odd_even_layers([topo.qubit_at(r, c) for r in range(h)], [mid_row[(r, c)] for r in range(h)])
        for c in range(w)
    ]
    phase2 = [
        _odd_even_layers(
            [topo.qubit_at(r, c) for c in range(w)],
            [token_dest[after1[(r, c)]][1] for c in range(w)],
        )
        for r in range(h)
    ]
    phase3 = [
        _odd_even_layers(
            [topo.qubit_at(r, c) for r in range(h)],
            [token_dest[after2[(r, c)]][0] for r in range(h)],
        )
        for c in range(w)
    ]
    return _merge_parallel(phase1) + _merge_parallel(phase2) + _merge_parallel(phase3)


def route_permutation(perm: Sequence[int], topology: Topology) -> RoutedLayer:
    n = topology.size
    if len(perm) != n or not is_bijection(list(perm), n):
        raise DomainError(f"permutation of length {len(perm)} does not match topology size {n}")
    perm = tuple(int(p) for p in perm)
    identity = tuple(range(n))
    if topology.kind == "all-to-all":
        return RoutedLayer((), perm)
    # the token now at position q must end up at dest[q]
    dest = invert_permutation(perm)
    if dest == identity:
        layers = []
    elif topology.full_grid and topology.w > 1 and topology.h > 1:
        # the snake path is also valid on a grid; keep whichever is shallower
        layers = min(_route_grid(topology, dest), _route_line(dest), key=len)
    elif topology.kind in ("line", "ring", "grid"):
        layers = _route_line(dest)
    else:
        raise UnsupportedTopologyError(f"cannot route on {topology.kind!r}")
    return RoutedLayer(tuple(layers), identity)


def physical_depth(circuit: Circuit, topology: Topology) -> int:
    """Physical layer count: each logical layer costs its swap layers plus one gate layer."""
    return sum(len(route_permutation(layer.perm, topology).swap_layers) + 1 for layer in circuit.layers)


@dataclass(frozen=True)
class PhysOp:
    kind: str  # "gate", "swap" or "idle"
    qubits: tuple[int, ...]
    u: np.ndarray | None = None


@dataclass
class PhysicalProgram:
    """Flat physical op list; logical output bit i is read from physical qubit ``layout[i]``."""

    width: int
    ops: list[PhysOp] = field(default_factory=list)
    layout: tuple[int, ...] = ()
    depth: int = 0
    swap_count: int = 0


def compile_physical(circuit: Circuit, topology: Topology | None = None) -> PhysicalProgram:
    n = circuit.width
    topology = topology or Topology("all-to-all", n)
    if topology.size != n:
        raise DomainError(f"topology size {topology.size} does not match circuit width {n}")
    layout = list(range(n))
    prog = PhysicalProgram(n)
    for layer in circuit.layers:
        routed = route_permutation(layer.perm, topology)
        for swaps in routed.swap_layers:
            for a, b in swaps:
                prog.ops.append(PhysOp("swap", (layout[a], layout[b]), SWAP))
        layout = [layout[r] for r in routed.relabeling]
        for g in layer.gates:
            a, b = g.pair
            prog.ops.append(PhysOp("gate", (layout[a], layout[b]), g.u))
        for q in layer.idle_positions(n):
            prog.ops.append(PhysOp("idle", (layout[q],)))
        prog.depth += len(routed.swap_layers) + 1
        prog.swap_count += routed.swap_count()
    prog.layout = tuple(layout)
    return prog
