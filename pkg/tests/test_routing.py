from itertools import permutations

import numpy as np
import pytest

from volbench.circuit import Circuit, Layer, Gate
from volbench.errors import UnsupportedTopologyError
from volbench.randomgen import SeedSpec, build_model_circuit, random_permutation
from volbench.routing import (
    Topology,
    compile_physical,
    parse_topology,
    physical_depth,
    route_permutation,
)
from volbench.sim import ideal_probabilities, program_probabilities


def check_routed(routed, perm, topo):
    assert routed.realized_permutation() == tuple(perm)
    for layer in routed.swap_layers:
        touched = [q for pair in layer for q in pair]
        assert len(touched) == len(set(touched))
        assert all(topo.adjacent(a, b) for a, b in layer)


@pytest.mark.parametrize("kind", ["line", "ring", "all-to-all"])
def test_identity_needs_no_swaps(kind):
    topo = Topology(kind, 5)
    assert route_permutation(tuple(range(5)), topo).swap_layers == ()


def test_all_to_all_is_pure_relabeling():
    topo = Topology("all-to-all", 4)
    r = route_permutation((2, 0, 3, 1), topo)
    assert r.swap_layers == ()
    assert r.relabeling == (2, 0, 3, 1)


def test_reversal_on_line_of_four():
    topo = Topology("line", 4)
    r = route_permutation((3, 2, 1, 0), topo)
    assert len(r.swap_layers) <= 4
    check_routed(r, (3, 2, 1, 0), topo)


@pytest.mark.parametrize("n", range(1, 7))
def test_line_routing_exhaustive(n):
    topo = Topology("line", n)
    for perm in permutations(range(n)):
        r = route_permutation(perm, topo)
        assert len(r.swap_layers) <= n
        check_routed(r, perm, topo)


@pytest.mark.parametrize("w,h", [(2, 2), (3, 2), (2, 3), (3, 3), (4, 2)])
def test_grid_routing(w, h):
    n = w * h
    topo = Topology("grid", n, w, h)
    perms = permutations(range(n)) if n <= 6 else (random_permutation(n, SeedSpec(1, (i,))) for i in range(300))
    for perm in perms:
        r = route_permutation(perm, topo)
        assert len(r.swap_layers) <= 2 * h + w
        check_routed(r, perm, topo)


def test_grid_snake_numbering_keeps_neighbours_adjacent():
    topo = Topology("grid", 12, 4, 3)
    assert all(topo.adjacent(q, q + 1) for q in range(11))
    assert topo.adjacent(0, 7)  # (0,0) above (1,0)


def test_partial_grid_routes_along_snake():
    topo = Topology("grid", 5, 3, 3)
    for perm in permutations(range(5)):
        check_routed(route_permutation(perm, topo), perm, topo)


def test_parse_topology():
    assert parse_topology("all2all").for_width(3) == Topology("all-to-all", 3)
    assert parse_topology("grid:3x2").for_width(6) == Topology("grid", 6, 3, 2)
    assert parse_topology("grid").for_width(6) == Topology("grid", 6, 3, 2)
    with pytest.raises(UnsupportedTopologyError):
        parse_topology("hypercube")


def test_physical_depth_examples():
    c = build_model_circuit(4, 6, SeedSpec(1))
    assert physical_depth(c, Topology("all-to-all", 4)) == 6
    eye = np.eye(4)
    rev = Circuit(4, [Layer((3, 2, 1, 0), [Gate((0, 1), eye), Gate((2, 3), eye)])])
    assert physical_depth(rev, Topology("line", 4)) <= 5
    ident = Circuit(4, [Layer((0, 1, 2, 3), [Gate((0, 1), eye), Gate((2, 3), eye)])] * 3)
    assert physical_depth(ident, Topology("grid", 4, 2, 2)) == 3


@pytest.mark.parametrize("topo", [
    Topology("line", 5), Topology("ring", 4), Topology("grid", 4, 2, 2), Topology("all-to-all", 5),
])
def test_routed_simulation_matches_logical(topo):
    for i in range(10):
        c = build_model_circuit(topo.size, 4, SeedSpec(31, (i,)))
        prog = compile_physical(c, topo)
        for op in prog.ops:
            if op.kind in ("gate", "swap") and topo.kind != "all-to-all":
                assert topo.adjacent(*op.qubits)
        assert np.max(np.abs(program_probabilities(prog) - ideal_probabilities(c))) <= 1e-9


@pytest.mark.parametrize("w,h", [(2, 2), (3, 2), (3, 3), (4, 3)])
def test_three_phase_grid_router_directly(w, h):
    from volbench import routing
    from volbench.circuit import invert_permutation

    topo = Topology("grid", w * h, w, h)
    for i in range(100):
        perm = random_permutation(w * h, SeedSpec(5, (w, h, i)))
        layers = routing._route_grid(topo, invert_permutation(perm))
        assert len(layers) <= 2 * h + w
        check_routed(routing.RoutedLayer(tuple(layers), tuple(range(w * h))), perm, topo)
