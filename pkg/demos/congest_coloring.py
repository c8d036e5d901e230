"""Color edges under CONGEST bandwidth with the bipartite and general algorithms."""
import math
from fractions import Fraction

from ecsim.congest import K_EPS, bipartite_2plus_eps, chi_plan, general_8plus_eps
from ecsim.graph import compute_stats, generate
from ecsim.sim import ExecutionMode
from ecsim.verify import check_proper_edge_coloring, colors_used

mode = ExecutionMode.parse("congest")
eps = Fraction(1, 2)
for delta in (8, 32):
    g, bip = generate("random_bipartite", 8 * delta, delta, seed=delta)
    st = compute_stats(g)
    print(f"bipartite delta={st.delta}: recursion plan {chi_plan(st.delta, st.bar_delta, eps)}")
    res = bipartite_2plus_eps(g, bip, eps, mode=mode)
    print(f"  {colors_used(res.color)} colors (cap {math.floor((2 + eps) * st.delta)}), "
          f"{res.metrics.rounds} rounds, {res.metrics.max_message_bits} bits max, "
          f"proper={check_proper_edge_coloring(g, res.color).ok}")

    h, _ = generate("random_general", 8 * delta, delta, seed=delta)
    gen = general_8plus_eps(h, eps, mode=mode)
    print(f"general delta={h.max_degree}: {colors_used(gen.color)} colors "
          f"(cap {math.floor((8 + K_EPS * eps) * h.max_degree)}), {gen.metrics.rounds} rounds, "
          f"proper={check_proper_edge_coloring(h, gen.color).ok}")
    for lv in gen.levels:
        print(f"  level {lv['level']}: degree {lv['max_degree']} <= {lv['degree_bound']}")
