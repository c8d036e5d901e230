from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import bipartite_graphs
from ecsim.defective import DefectiveSpec, defective_2ec, eta_from_lambda, eta_vector
from ecsim.errors import UsageError
from ecsim.graph import Bipartition, Graph, compute_stats, generate
from ecsim.orientation import (
    OrientationParams,
    OrientationTrace,
    beta_art,
    check_phase_lemmas,
    compute_balanced_orientation,
    delta_phi,
    edge_constants,
    k_phi,
)
from ecsim.verify import check_defective_2ec, check_orientation_balance


def _params(bar, eps):
    g = Graph(2 * bar + 2, [(0, 1 + i) for i in range(bar // 2 + 1)] + [(1, bar + 2 + i) for i in range(bar // 2)])
    stats = compute_stats(g)
    assert stats.bar_delta == bar
    return OrientationParams.build(stats, [0] * g.m, eps), g


def test_phase_constants_frozen():
    params, _ = _params(64, 1)
    assert params.nu == F(1, 8)
    assert k_phi(params, 1) == 8
    assert delta_phi(params, 1) == 1


def test_edge_constant_zero_degree():
    g = Graph(2, [(0, 1)])
    params = OrientationParams.build(compute_stats(g), [0], 1)
    k_e, _ = edge_constants(g, params)
    assert k_e.tolist() == [0]


def test_beta_art_is_explicit_and_monotone():
    assert beta_art(64, F(1, 2)) > beta_art(64, 1) > beta_art(16, 1) > 0


@pytest.mark.parametrize(
    "g, bip",
    [
        (Graph(2, [(0, 1)]), Bipartition([0, 1])),
        (Graph(6, [(0, 3), (1, 4), (2, 5)]), Bipartition([0, 0, 0, 1, 1, 1])),
    ],
)
def test_trivial_orientations(g, bip):
    res = compute_balanced_orientation(g, bip, [0] * g.m, 1)
    assert check_orientation_balance(g, bip, res.u_to_v, [0] * g.m, 1, res.beta).ok
    assert check_orientation_balance(g, bip, res.u_to_v, [0] * g.m, 0, 0).ok


def test_regular_bipartite_orientation():
    g, bip = generate("regular_bipartite", 128, 3, 4)
    res = compute_balanced_orientation(g, bip, [0] * g.m, 1, validate_games=True)
    assert check_orientation_balance(g, bip, res.u_to_v, [0] * g.m, 1, res.beta).ok
    assert check_phase_lemmas(res.trace).ok
    assert all(v.ok for v in res.trace.game_verdicts)


@pytest.mark.parametrize("delta,eps", [(8, F(1, 4)), (16, F(1, 2)), (32, 1)])
def test_orientation_lemmas_on_random_graphs(delta, eps):
    g, bip = generate("random_bipartite", 6 * delta, delta, delta)
    eta = [F(int(x), 2) for x in np.random.default_rng(delta).integers(-6, 7, size=g.m)]
    res = compute_balanced_orientation(g, bip, eta, eps)
    assert check_phase_lemmas(res.trace).ok
    assert check_orientation_balance(g, bip, res.u_to_v, eta, eps, res.beta).ok


def test_forged_trace_fails_degree_decay():
    g = Graph(6, [(0, i) for i in range(1, 6)])
    bip = Bipartition([0, 1, 1, 1, 1, 1])
    params = OrientationParams.build(compute_stats(g), [0] * g.m, 1)
    trace = OrientationTrace(g, bip, params, [np.zeros(g.m, dtype=np.int8)])
    v = check_phase_lemmas(trace)
    assert not v.ok and v.first[0] == "degree_decay"
    assert check_phase_lemmas(OrientationTrace(Graph(3), Bipartition([0, 1, 1]), params)).ok


def test_orientation_rejects_bad_input():
    g = Graph(3, [(0, 1), (1, 2)])
    with pytest.raises(UsageError):
        compute_balanced_orientation(g, Bipartition([0, 1, 1]), [0, 0], 1)
    with pytest.raises(UsageError):
        compute_balanced_orientation(g, Bipartition([0, 1, 0]), [0, 0], 0)


def test_eta_examples():
    half = DefectiveSpec((F(1, 2),), F(1, 4), 5)
    # u has degree 3, v has degree 5
    g = Graph(9, [(0, 1)] + [(0, 2), (0, 3)] + [(1, k) for k in range(4, 8)])
    bip = Bipartition([0, 1, 1, 1, 0, 0, 0, 0, 1])
    assert eta_from_lambda(g, bip, 0, DefectiveSpec((F(1, 2),) * g.m, F(1, 4), 5)) == 1
    sym = Graph(4, [(0, 1), (0, 3), (1, 2)])
    assert eta_from_lambda(sym, Bipartition([0, 1, 0, 1]), 0, DefectiveSpec((F(1, 2),) * 3, 1, 7)) == 0
    g2 = Graph(6, [(0, 2), (0, 3), (1, 2), (4, 2)])
    bip2 = Bipartition([0, 0, 1, 1, 0, 1])
    spec = DefectiveSpec((F(1),) * 4, 0, 0)
    assert eta_from_lambda(g2, bip2, 0, spec) == 2
    assert eta_vector(g2, bip2, spec)[0] == 2
    assert half.lam == (F(1, 2),)


def test_defective_examples():
    g, bip = generate("random_bipartite", 40, 6, 2)
    res = defective_2ec(g, bip, [0] * g.m, F(1, 2))
    assert check_defective_2ec(g, [0] * g.m, F(1, 2), 2 * res.beta, res.red).ok
    single = Graph(2, [(0, 1)])
    for red in (True, False):
        assert check_defective_2ec(single, [F(1, 3)], 0, 0, [red]).ok


def test_defective_delta_64():
    g, bip = generate("random_bipartite", 256, 64, 9)
    lam = [F(1, 2)] * g.m
    res = defective_2ec(g, bip, lam, F(1, 2))
    assert res.verdict(g, lam, F(1, 2)).ok
    assert res.max_ratio < 2


@given(bipartite_graphs(max_side=7), st.integers(0, 4), st.sampled_from([F(1, 4), F(1, 2), F(1)]))
def test_defective_property(gb, lam_num, eps):
    g, bip = gb
    lam = [F(lam_num, 4)] * g.m
    res = defective_2ec(g, bip, lam, eps)
    assert check_defective_2ec(g, lam, eps, 2 * res.beta, res.red).ok
    assert check_orientation_balance(g, bip, res.orientation.u_to_v, eta_vector(
        g, bip, DefectiveSpec(tuple(lam), eps, res.beta)), eps, res.beta).ok


def test_defective_validator_error_case():
    p = Graph(3, [(0, 1), (1, 2)])
    assert not check_defective_2ec(p, [0, 0], 0, 0, [True, True]).ok
    assert check_defective_2ec(Graph(2), [], 0, 0, []).ok
