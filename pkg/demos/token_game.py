"""Walk through the token dropping game on a small random digraph.

Every node starts with some tokens; tokens flow along arcs from tail to head
until no node can pass more than its quota. The validator checks the outcome.
"""
import numpy as np

from ecsim.graph import generate
from ecsim.runner import random_token_instance
from ecsim.tokengame import TokenGameConfig, run_token_game, validate_token_run

g, _ = generate("random_general", 12, 4, seed=3)
dg, x0, alpha, k, quantum = random_token_instance(g, seed=3)
cfg = TokenGameConfig(k, quantum, alpha)
print(f"graph: n={g.n} arcs={dg.m} capacity k={k} quantum={quantum}")
print("initial tokens:", x0.tolist())

run = run_token_game(dg, x0, cfg)
print("final tokens:  ", run.state.x.tolist())
print("tokens received:", run.state.y.tolist())
print(f"phases: {len(run.records)}  rounds: {run.metrics.rounds}  (budget {6 * (k // quantum)})")
for rec in run.records[:3]:
    print(f"  phase {rec.t}: {int(np.sum(rec.active))} active nodes, {len(rec.moved)} tokens moved")

v = validate_token_run(dg, x0, cfg, run.state, run.records)
print("validator:", "ok" if v.ok else v.violations[:5])
