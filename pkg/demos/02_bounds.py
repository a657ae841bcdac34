"""
Threshold bounds on the d-regular tree
======================================

Closed-form lower and upper bounds on the critical infection rate, with
the hypothesis of each one reported next to the value.
"""
import json

from mvcp.bounds import bound_set, lemma2_bound_by_sweep
from mvcp.model import DeathProfile

profile = DeathProfile((0.1, 0.2, 0.4, 1.0))
for d in (3, 4, 6):
    print(d, json.dumps(bound_set(d, profile).as_dict()["lambda_star_lower"]))

# the per-level bound also comes out of a numeric sweep over rho; the
# optimum sits at the rho -> 1 end
rho, lam = lemma2_bound_by_sweep(4, profile, 2)
print(f"rho* = {rho:.6f}, lambda_2 = {lam:.6f}")
