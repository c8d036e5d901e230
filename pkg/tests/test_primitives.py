import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import bipartite_graphs, complete, graphs, path, star
from ecsim.errors import SlackFailure, UsageError
from ecsim.graph import Bipartition, Graph, generate
from ecsim.primitives import (
    VertexColoring,
    defective_coloring_p,
    defective_const,
    greedy_edge_coloring,
    greedy_list_coloring,
    k_lin,
    line_graph_schedule,
    linial_coloring,
    port_pair_schedule,
    refine_threshold,
    refine_to_4,
)
from ecsim.sim import RoundMetrics
from ecsim.verify import check_defect_vertex, check_proper_edge_coloring, colors_used


def _proper_vertex(g, col):
    return all(col[a] != col[b] for a, b in g.edges.tolist())


def test_linial_examples():
    vc = linial_coloring(Graph(1))
    assert vc.color.tolist() == [1] and vc.palette_size == 1
    p = path(9)
    vc = linial_coloring(p)
    assert _proper_vertex(p, vc.color) and vc.palette_size <= k_lin(2)
    k6 = complete(6)
    vc = linial_coloring(k6)
    assert _proper_vertex(k6, vc.color) and len(set(vc.color.tolist())) >= 6


@given(graphs(max_n=30, max_m=80))
def test_linial_proper(g):
    met = RoundMetrics()
    vc = linial_coloring(g, metrics=met)
    assert _proper_vertex(g, vc.color)
    assert vc.palette_size <= max(k_lin(g.max_degree), 1) or vc.palette_size == g.n
    assert met.oracle_rounds == 0


def test_linial_oracle_mode_is_flagged():
    met = RoundMetrics()
    vc = linial_coloring(complete(4), mode="oracle", metrics=met)
    assert _proper_vertex(complete(4), vc.color) and met.oracle_rounds == 1


def test_linial_round_count_is_small():
    g, _ = generate("random_general", 2000, 16, 1)
    met = RoundMetrics()
    linial_coloring(g, metrics=met)
    assert met.rounds <= 4


def test_defective_p_examples():
    g = complete(4)
    base = linial_coloring(g)
    vc = defective_coloring_p(g, 3, base)
    assert vc.palette_size == 1 and check_defect_vertex(g, vc, 3).ok
    vc = defective_coloring_p(g, 1, base)
    assert check_defect_vertex(g, vc, 1).ok
    e = Graph(5)
    assert defective_coloring_p(e, 1, linial_coloring(e)).palette_size == 1


@given(graphs(max_n=25, max_m=80), st.integers(1, 6))
def test_defective_p_property(g, p):
    vc = defective_coloring_p(g, p, linial_coloring(g))
    assert check_defect_vertex(g, vc, p).ok
    assert vc.palette_size == max(1, -(-(g.max_degree + 1) // (p + 1)))


def test_refine_examples():
    e = Graph(4)
    assert check_defect_vertex(e, refine_to_4(e, 0.5, linial_coloring(e)), 0).ok
    c6 = Graph(6, [(i, (i + 1) % 6) for i in range(6)])
    assert check_defect_vertex(c6, refine_to_4(c6, 0.5, linial_coloring(c6)), 2).ok
    g, _ = generate("random_general", 400, 32, 5)
    assert g.max_degree == 32
    vc = refine_to_4(g, 1 / 8, linial_coloring(g))
    assert refine_threshold(32, 1 / 8) == 12
    assert check_defect_vertex(g, vc, 12).ok and check_defect_vertex(g, vc, 4 + 16).ok


def test_defective_const_examples():
    single = Graph(2, [(0, 1)])
    assert check_defect_vertex(single, defective_const(single, linial_coloring(single)), 1).ok
    k8 = complete(8)
    assert check_defect_vertex(k8, defective_const(k8, linial_coloring(k8)), 4).ok
    e = Graph(3)
    assert check_defect_vertex(e, defective_const(e, linial_coloring(e)), 0).ok


@given(graphs(max_n=25, max_m=90))
def test_defective_const_property(g):
    vc = defective_const(g, linial_coloring(g))
    d = g.max_degree
    assert vc.palette_size == 4
    assert check_defect_vertex(g, vc, d // 4 + d // 8).ok


def test_refine_rejects_low_bound():
    g = complete(5)
    with pytest.raises(UsageError):
        refine_to_4(g, 0.25, linial_coloring(g), degree_bound=2)


def test_greedy_edge_examples():
    m = Graph(4, [(0, 1), (2, 3)])
    col = greedy_edge_coloring(m, 1, line_graph_schedule(m))
    assert col.tolist() == [1, 1]
    p = path(3)
    col = greedy_edge_coloring(p, 3, line_graph_schedule(p))
    assert check_proper_edge_coloring(p, col, palette=3).ok
    s = star(4)
    col = greedy_edge_coloring(s, 4, line_graph_schedule(s))
    assert sorted(col.tolist()) == [1, 2, 3, 4]
    with pytest.raises(UsageError):
        greedy_edge_coloring(s, 3, line_graph_schedule(s))


@given(graphs(max_n=20, max_m=60))
def test_line_graph_schedule_is_proper(g):
    sched = line_graph_schedule(g)
    lg = g.line_graph()
    assert all(sched[a] != sched[b] for a, b in lg.edges.tolist())


@given(bipartite_graphs())
def test_port_pair_schedule_is_proper(gb):
    g, bip = gb
    sched = port_pair_schedule(g, bip)
    lg = g.line_graph()
    assert all(sched[a] != sched[b] for a, b in lg.edges.tolist())
    if g.m:
        assert sched.max() <= g.max_degree**2 + g.max_degree


@given(graphs(max_n=15, max_m=40))
def test_greedy_bar_delta_plus_one(g):
    bar = int(g.edge_degrees().max()) if g.m else 0
    col = greedy_edge_coloring(g, bar + 1, line_graph_schedule(g))
    assert check_proper_edge_coloring(g, col, palette=bar + 1).ok


def test_greedy_list_failure_names_edge():
    g = path(2)
    with pytest.raises(SlackFailure) as info:
        greedy_list_coloring(g, [(1,), (1,)], np.array([1, 2]), phase=3)
    assert info.value.edge == 1 and info.value.phase == 3


def test_vertex_coloring_range_checked():
    with pytest.raises(UsageError):
        VertexColoring(np.array([0, 1]), 2)
