"""
The dominating random walk
==========================

A +1/-1 walk with up-probability p_W.  Absorption at 0 is certain for
p_W <= 1/2 and has probability ((1-p)/p)**start above it.
"""
from mvcp.engine import StopRule, run
from mvcp.graphs import FiniteOffspring, build_tree
from mvcp.model import DeathProfile, MvcpConfig
from mvcp.oracle import WalkSpec, absorption_probability, domination_check, p_w, simulate_walks

profile = DeathProfile((0.2, 0.3, 1.0))
for k, lam in enumerate((0.5, 1.0, 2.0, 3.0)):
    spec = WalkSpec(p_w(lam, profile))
    absorbed, _, _ = simulate_walks(spec, 10_000, 20_000, seed=k)
    print(f"lambda {lam}: p_W {spec.p_up:.3f}, absorption {absorption_probability(spec):.3f}, "
          f"simulated {absorbed.mean():.3f}")

# Up-step frequency of the tree process against p_W.  On trees the process
# steps up more often than the walk: the walk ignores vertex degree.
tree = build_tree(FiniteOffspring(3, 19))
tree.set_count(0, 1)
trajs = [run(tree, MvcpConfig(1.0, profile), StopRule(), s) for s in range(50)]
print(domination_check(trajs, 1.0, profile))
