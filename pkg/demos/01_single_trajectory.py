"""
One trajectory on a finite tree
===============================

Every infection heals at rate 1 and sends a copy along each live edge at
rate lambda.  An arriving copy kills a host already carrying k-1
infections with probability phi(k).
"""
from collections import Counter

from mvcp.engine import StopRule, run
from mvcp.graphs import FiniteOffspring, build_tree
from mvcp.model import DeathProfile, MvcpConfig

# 19 vertices, three children each, root infected twice
tree = build_tree(FiniteOffspring(3, 19))
tree.set_count(0, 2)
cfg = MvcpConfig(lam=1.5, profile=DeathProfile((0.1, 0.5, 1.0)))

traj = run(tree, cfg, StopRule(), seed=7)
print(traj.summary)

# what happened, by event kind and outcome
print(Counter((e.kind, e.outcome) for e in traj.events))

# dead vertices stay in the graph as tombstones without edges
dead = [x for x in range(tree.n) if not traj.final.alive[x]]
print("dead vertices:", dead)
print("arrivals per vertex:", traj.experienced)
