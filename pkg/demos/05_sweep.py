"""
Racing to the boundary
======================

Truncated trees always die out, so the chance that the infection reaches
depth D before dying stands in for survival.  Below the lower bound it
should fall with depth; well above the upper bound it should not.
"""
import sys

from mvcp.analysis import lambda_sweep
from mvcp.model import DeathProfile

profile = DeathProfile((0.0, 0.1, 1.0))
result = lambda_sweep(3, profile, [0.4, 1.0, 2.5], [3, 4, 5], replicas=500, seed0=0)
print(result.markers)
result.write_csv(sys.stdout)
for lam in result.lambdas:
    print(lam, "non-increasing in depth:", result.depth_trend(lam))
