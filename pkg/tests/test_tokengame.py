import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import graphs
from ecsim.errors import UsageError
from ecsim.graph import Graph, generate
from ecsim.runner import random_token_instance
from ecsim.sim import ExecutionMode
from ecsim.tokengame import (
    DiGraph,
    PhaseRecord,
    TokenGameConfig,
    TokenGameState,
    game_rounds,
    run_token_game,
    validate_token_run,
)


def _edge(k, x_u):
    dg = DiGraph.from_arcs(2, [(0, 1)])
    cfg = TokenGameConfig.uniform(2, k, 1)
    return dg, cfg, run_token_game(dg, [x_u, 0], cfg)


def test_empty_graph_keeps_tokens():
    dg = DiGraph.from_arcs(3, [])
    cfg = TokenGameConfig.uniform(3, 5, 1)
    run = run_token_game(dg, [5, 2, 0], cfg)
    assert (run.state.x + run.state.y).tolist() == [5, 2, 0]
    assert not run.state.passive.any()


def test_single_edge_no_phases():
    dg, cfg, run = _edge(1, 1)
    assert cfg.phases == 0 and run.records == [] and run.metrics.rounds == 0
    assert not run.state.passive[0]
    assert validate_token_run(dg, [1, 0], cfg, run.state, run.records).ok


def test_single_edge_hand_simulation():
    dg, cfg, run = _edge(4, 4)
    assert cfg.phases == 3
    assert run.records[0].moved.tolist() == [0]
    assert run.state.passive.tolist() == [True]
    assert (run.state.x[0], run.state.y[0]) == (1, 2)
    assert run.state.tau.tolist() == [3, 1]
    assert validate_token_run(dg, [4, 0], cfg, run.state, run.records).ok


def test_frozen_seeded_run():
    g, _ = generate("random_general", 12, 3, 5)
    dg, x0, alpha, k, q = random_token_instance(g, 5, k=6, quantum=1)
    run = run_token_game(dg, x0, TokenGameConfig(k, q, alpha))
    assert x0.tolist() == [0, 2, 4, 3, 4, 4, 4, 0, 6, 3, 6, 1]
    assert run.state.x.tolist() == [1, 1, 0, 1, 1, 1, 1, 1, 1, 1, 1, 0]
    assert run.state.y.tolist() == [1, 2, 2, 2, 1, 2, 5, 0, 5, 2, 4, 1]
    assert np.flatnonzero(run.state.passive).tolist() == [0, 1, 2, 3, 5, 7, 9, 10, 11, 12, 13, 14, 15]


def test_forged_double_move_rejected():
    dg, cfg, run = _edge(4, 4)
    recs = list(run.records)
    r = recs[1]
    recs[1] = PhaseRecord(r.t, r.active, r.proposals, np.array([0]))
    v = validate_token_run(dg, [4, 0], cfg, run.state, recs)
    assert not v.ok and "single_move" in {c for c, *_ in v.violations}


def test_forged_tau_rejected():
    dg, cfg, run = _edge(4, 4)
    st_ = run.state
    forged = TokenGameState(st_.x.copy(), st_.y.copy(), st_.passive.copy(), st_.phase)
    forged.y[1] = cfg.k + 1 - forged.x[1]
    v = validate_token_run(dg, [4, 0], cfg, forged, run.records)
    assert "tau_cap" in {c for c, *_ in v.violations}


def test_config_validation():
    with pytest.raises(UsageError):
        TokenGameConfig.uniform(2, 0, 1)
    with pytest.raises(UsageError):
        TokenGameConfig.uniform(2, 4, 2, alpha=1)
    with pytest.raises(UsageError):
        run_token_game(DiGraph.from_arcs(2, [(0, 1)]), [5, 0], TokenGameConfig.uniform(2, 4, 1))


def test_alpha_is_snapped_to_grid():
    cfg = TokenGameConfig(4, 1, (1 + 1e-9, 1.5))
    assert cfg.alpha[0] == 1 and cfg.alpha[1] == 1.5


@given(graphs(max_n=14, max_m=35), st.integers(0, 10**6), st.integers(1, 12), st.integers(1, 3))
def test_random_runs_validate(g, seed, k, quantum):
    rng = np.random.default_rng(seed)
    quantum = min(quantum, k)
    alpha = tuple(quantum + rng.integers(0, 3, size=g.n) / 2)
    dg, x0, _, _, _ = random_token_instance(g, seed, k, quantum)
    cfg = TokenGameConfig(k, quantum, alpha)
    run = run_token_game(dg, x0, cfg)
    v = validate_token_run(dg, x0, cfg, run.state, run.records)
    assert v.ok, v.violations[:3]
    assert run.metrics.rounds == game_rounds(cfg) <= 6 * (k // quantum)
    assert int((run.state.x + run.state.y).sum()) == int(x0.sum())


@given(graphs(max_n=10, max_m=20), st.integers(0, 10**6), st.integers(2, 8))
def test_engine_matches_direct(g, seed, k):
    dg, x0, alpha, _, _ = random_token_instance(g, seed, k, 1)
    cfg = TokenGameConfig(k, 1, alpha)
    a = run_token_game(dg, x0, cfg)
    b = run_token_game(dg, x0, cfg, backend="engine", mode=ExecutionMode.parse("congest:64"))
    assert np.array_equal(a.state.x, b.state.x) and np.array_equal(a.state.y, b.state.y)
    assert np.array_equal(a.state.passive, b.state.passive)
    if cfg.phases and g.n:
        assert b.metrics.rounds == game_rounds(cfg)
