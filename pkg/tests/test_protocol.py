import pytest

from volbench.errors import DomainError
from volbench.heavy import evaluate_pass
from volbench.protocol import (
    ProtocolConfig,
    WidthResult,
    achieved_volumetric_value,
    compute_score,
    qv1_to_quantum_volume,
    run_width_test,
    score_from_widths,
    shape,
)
from volbench.routing import TopologySpec
from volbench.sim import NoiseModel

SMALL = ProtocolConfig(circuits=20, shots=200)


@pytest.mark.parametrize("k,n,expected", [(1, 8, (8, 8)), (2, 4, (4, 16)), (3, 3, (3, 27)), (5, 2, (2, 32))])
def test_shape(k, n, expected):
    assert shape(k, n) == expected


@pytest.mark.parametrize("k,n", [(0, 4), (6, 4), (1, 1)])
def test_shape_domain(k, n):
    with pytest.raises(DomainError):
        shape(k, n)


@pytest.mark.parametrize("score,vq", [(5, 32), (0, 1), (10, 1024), (62, 2**62)])
def test_quantum_volume(score, vq):
    assert qv1_to_quantum_volume(score) == vq


def test_quantum_volume_overflow():
    with pytest.raises(OverflowError):
        qv1_to_quantum_volume(63)


def test_noiseless_width_test_passes():
    r = run_width_test(1, 4, NoiseModel(), SMALL, seed=3)
    assert r.passed and r.depth == 4 and len(r.heavy.per_circuit_hop) == 20


def test_fully_depolarized_width_test_fails():
    r = run_width_test(1, 4, NoiseModel(p2=1.0), SMALL, seed=3)
    assert not r.passed
    assert r.heavy.pooled_hop <= 0.55


def test_depth_recorded_for_class_two():
    r = run_width_test(2, 2, NoiseModel(), SMALL, seed=1)
    assert r.depth == 4 and r.routed_depth == 4


def _width(n, passed):
    hop = 0.9 if passed else 0.5
    return WidthResult(n, n, evaluate_pass([hop] * 10, 1000), n, 0.0)


def test_score_is_contiguous_prefix():
    assert score_from_widths([_width(2, True), _width(3, True), _width(4, True), _width(5, False)]) == 4
    assert score_from_widths([_width(2, False), _width(3, True)]) == 0
    assert score_from_widths([_width(2, True), _width(4, True)]) == 2


def test_noiseless_score_reaches_n_max():
    s = compute_score(2, NoiseModel(), SMALL, n_max=4, seed=5)
    assert s.score == 4
    assert [w.n for w in s.widths] == [2, 3, 4]


def test_full_noise_scores_zero_and_stops():
    s = compute_score(1, NoiseModel(p2=1.0), SMALL, n_max=6, seed=5)
    assert s.score == 0 and len(s.widths) == 1


def test_score_agrees_with_max_min_formula():
    for k in (1, 2):
        s = compute_score(k, NoiseModel(p2=0.03), SMALL, n_max=6, seed=2)
        assert achieved_volumetric_value(k, s.widths) == s.score


def test_score_is_deterministic():
    a = compute_score(1, NoiseModel(p2=0.05, p_readout=0.01), SMALL, n_max=5, seed=11)
    b = compute_score(1, NoiseModel(p2=0.05, p_readout=0.01), SMALL, n_max=5, seed=11)
    assert a == b


def test_parallel_workers_do_not_change_results():
    cfg = ProtocolConfig(circuits=6, shots=100)
    a = compute_score(1, NoiseModel(p2=0.05), cfg, n_max=4, seed=4)
    b = compute_score(1, NoiseModel(p2=0.05), ProtocolConfig(circuits=6, shots=100, jobs=3), n_max=4, seed=4)
    assert a == b


def test_line_topology_adds_routing_depth():
    cfg = ProtocolConfig(circuits=5, shots=100, topology=TopologySpec("line"))
    r = run_width_test(1, 5, NoiseModel(), cfg, seed=1)
    assert r.routed_depth > r.depth
    assert r.mean_swaps > 0


def test_swap_noise_lowers_hop_on_line():
    base = ProtocolConfig(circuits=10, shots=400, topology=TopologySpec("line"))
    clean = run_width_test(1, 5, NoiseModel(), base, seed=1)
    noisy = run_width_test(1, 5, NoiseModel(p_swap=0.2), base, seed=1)
    assert noisy.heavy.pooled_hop < clean.heavy.pooled_hop
