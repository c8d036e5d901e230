"""Degree+1 list edge coloring, then the slack solver on a dense bipartite graph."""
import math

import numpy as np

from ecsim.graph import Bipartition, Graph, generate
from ecsim.lists import ListAssignment
from ecsim.listcolor import E2, degree_plus_one_list_ec, solve_slack
from ecsim.runner import degree_lists
from ecsim.verify import check_proper_edge_coloring

g, _ = generate("random_general", 300, 16, seed=5)
lists = degree_lists(g, 4 * g.max_degree**2, seed=5)
res = degree_plus_one_list_ec(g, lists)
print(f"degree+1 lists: n={g.n} m={g.m}, proper={check_proper_edge_coloring(g, res.color, lists=lists).ok}")
for lv in res.levels:
    print(f"  level {lv.level}: degree {lv.degree} -> {lv.degree_after}, colored {lv.colored}")
print(f"  residual colored {res.residual_colored}, oracle rounds {res.metrics.oracle_rounds}")

side = 49
g = Graph(2 * side, [(a, side + b) for a in range(side) for b in range(side)])
bip = Bipartition([0] * side + [1] * side)
rng = np.random.default_rng(0)
size = math.floor(E2 * (2 * side - 2)) + 1
lists = ListAssignment((1, 2048), tuple(
    tuple(sorted((rng.choice(1024, size, replace=False) + 1).tolist())) for _ in range(g.m)))
sres = solve_slack(g, bip, lists, E2, beta_conf=8)
print(f"slack solver on K_{side},{side} with lists of {size}: split phases {sres.split_phases}, "
      f"proper={check_proper_edge_coloring(g, sres.color, lists=lists).ok}")
