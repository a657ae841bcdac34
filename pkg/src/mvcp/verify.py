"""Property suite behind ``mvcp verify``.

Gating checks cover the simulator and calculators.  Checks of published
claims that the exact computations contradict are still run and reported,
but flagged ``gating: false``.
"""
from __future__ import annotations

import random

from . import analysis, bounds, oracle
from .engine import EXTINCTION, Simulation, StopRule, check_rate_index, replay, run
from .graphs import (FiniteOffspring, TruncatedRegular, boundary_count, build_tree,
                     enumerate_connected_subsets)
from .model import DeathProfile, GraphState, MvcpConfig

PHI_TABLES = ((0.1, 0.5, 1.0), (0.0, 0.1, 1.0), (0.2, 0.3, 1.0))


def _result(name, passed, evidence, gating=True):
    return {"check": name, "gating": gating, "passed": bool(passed), "evidence": evidence}


def check_model_invariants(seeds: int, seed: int):
    profile = DeathProfile((0.1, 0.5, 1.0))
    worst = 0.0
    events = 0
    for lam in (0.5, 2.0):
        cfg = MvcpConfig(lam, profile)
        for s in range(seed, seed + seeds):
            init = build_tree(FiniteOffspring(3, 19))
            init.set_count(0, 1)
            init.set_count(5, 2)
            sim = Simulation(init.copy(), cfg, s)
            before = sim.state.total_infections()
            while sim.next_time() is not None and sim.n_events < 5000:
                ev = sim.fire()
                after = sim.state.total_infections()
                step = after - before
                allowed = {-1} if ev.kind == "heal" else ({1} if ev.outcome == "infected" else {-ev.pre_count})
                assert step in allowed, (ev, step)
                sim.state.check_invariants(profile.cutoff)
                check_rate_index(sim)
                worst = max(worst, abs(sim.index.total - sum(sim._rates())))
                before = after
            events += sim.n_events
            final = replay(init, cfg, sim.events)
            assert final.counts == sim.state.counts and final.alive == sim.state.alive
    return _result("model_invariants", True, {"events": events, "max_rate_drift": worst})


def check_boundary_count(samples: int, seed: int):
    d = 3
    ball = build_tree(TruncatedRegular(d, 4))
    interior = [x for x in range(ball.n) if len(ball.adj[x]) == d]
    n_conn = bad = 0
    for sub in enumerate_connected_subsets(ball, 6, within=interior):
        n_conn += 1
        if boundary_count(ball, sub).boundary_edges != d * len(sub) - 2 * (len(sub) - 1):
            bad += 1
    rng = random.Random(seed)
    bad_ineq = 0
    for _ in range(samples):
        sub = rng.sample(interior, rng.randint(1, 6))
        if boundary_count(ball, sub).boundary_edges < d * len(sub) - 2 * (len(sub) - 1):
            bad_ineq += 1
    return _result("boundary_count_oracle", bad == 0 and bad_ineq == 0,
                   {"connected_subsets": n_conn, "equality_failures": bad,
                    "random_subsets": samples, "inequality_failures": bad_ineq})


def drift_fixtures():
    """Single vertex, uniform pair, and two-class fixtures on a 3-regular ball."""
    lam1 = MvcpConfig(1.0, DeathProfile((0.0, 0.0, 0.0, 1.0)))
    single = build_tree(TruncatedRegular(3, 2))
    single.set_count(0, 1)
    pair = build_tree(TruncatedRegular(3, 3))
    pair.set_count(0, 1)
    pair.set_count(1, 1)
    two = build_tree(TruncatedRegular(3, 3))
    two.set_count(0, 1)
    two.set_count(1, 2)
    mixed = MvcpConfig(1.0, DeathProfile((0.1, 0.3, 0.6, 1.0)))
    return {"single_vertex": (single, lam1),
            "uniform_pair": (pair, MvcpConfig(1.0, DeathProfile((0.0, 0.5, 1.0)))),
            "two_class": (two, mixed)}


def check_drift(replicas: int, seed: int):
    out = []
    for k, (name, (state, cfg)) in enumerate(drift_fixtures().items()):
        res = analysis.drift_fd_check(state, cfg, 0.5, 1e-3, replicas, seed + k)
        out.append(_result(f"drift_fd_{name}", res.passed, {
            "exact": res.exact, "estimate_dt": res.estimates[1e-3],
            "estimate_half_dt": res.estimates[5e-4],
            "se_dt": res.standard_errors[1e-3], "richardson_slope": res.richardson_slope}))
    state, cfg = drift_fixtures()["single_vertex"]
    rep = bounds.drift_exact_generator(state, cfg, 0.5)
    out.append(_result("drift_closed_form_single_vertex", abs(rep.discrepancy) <= 1e-12,
                       {"exact": rep.exact_drift, "closed_form": rep.paper_formula_drift,
                        "note": "closed form counts an intra-set infection term that has no edges to act on"},
                       gating=False))
    return out


def check_immortality(replicas: int, seed: int):
    k2 = GraphState.from_edges(2, [(0, 1)], {0: 1})
    cfg = MvcpConfig(5.0, DeathProfile((0.2, 0.5, 1.0)))
    rep = analysis.immortality_test(k2, cfg, 4, replicas, seed, vertex=1)
    return _result("immortality_bound", rep.passed,
                   {"estimate": rep.estimate, "bound": rep.bound, "se": rep.standard_error,
                    "reached": rep.reached, "replicas": rep.replicas})


def check_domination(seeds: int, seed: int):
    out = []
    k2 = GraphState.from_edges(2, [(0, 1)], {0: 1})
    for lam in (0.5, 2.0):
        profile = DeathProfile((0.0, 0.0, 1.0))
        trajs = [run(k2, MvcpConfig(lam, profile), StopRule(max_events=10**6), s)
                 for s in range(seed, seed + seeds)]
        rep = oracle.domination_check(trajs, lam, profile)
        out.append(_result(f"domination_K2_lambda_{lam}", rep.passed, rep.as_dict()))
    tree = build_tree(FiniteOffspring(3, 19))
    tree.set_count(0, 1)
    for phis in PHI_TABLES:
        profile = DeathProfile(phis)
        trajs = [run(tree, MvcpConfig(1.0, profile), StopRule(max_events=10**6), s)
                 for s in range(seed, seed + seeds)]
        rep = oracle.domination_check(trajs, 1.0, profile)
        ev = rep.as_dict()
        ev["note"] = "walk up-probability ignores vertex degree; trees exceed it"
        out.append(_result(f"domination_T3_19_phi_{','.join(map(str, phis))}",
                           rep.passed, ev, gating=False))
    return out


def check_gamblers_ruin(replicas: int, horizon_scale: int, seed: int):
    worst = 0.0
    for p in (0.55, 0.6, 0.75):
        for start in (1, 2, 5):
            a = oracle.absorption_probability(oracle.WalkSpec(p, start))
            worst = max(worst, abs(a - oracle.absorption_by_linear_system(p, start, 10**4)))
    sims = {}
    ok = worst <= 1e-10
    for k, (p, horizon) in enumerate(((0.3, 10**4), (0.5, horizon_scale), (0.6, 10**4))):
        absorbed, _, _ = oracle.simulate_walks(oracle.WalkSpec(p, 1), horizon, replicas, seed + k)
        freq = float(absorbed.mean())
        exact = oracle.absorption_probability(oracle.WalkSpec(p, 1))
        se = analysis.binomial_se(freq, replicas)
        passed = abs(freq - exact) <= 4 * se
        ok = ok and passed
        sims[str(p)] = {"simulated": freq, "analytic": exact, "se": se, "horizon": horizon}
    return _result("gamblers_ruin", ok, {"max_linear_system_gap": worst, "simulation": sims})


def check_finite_extinction(seeds: int, seed: int):
    counts = {}
    ok = True
    for spec in (FiniteOffspring(3, 19), FiniteOffspring(4, 40)):
        init = build_tree(spec)
        init.set_count(0, 1)
        for lam in (0.1, 1.0, 10.0):
            cfg = MvcpConfig(lam, DeathProfile((0.1, 0.5, 1.0)))
            n = sum(run(init, cfg, StopRule(max_events=10**7), s, record=False).summary.kind
                    == EXTINCTION for s in range(seed, seed + seeds))
            counts[f"T_{spec.d},{spec.n} lambda={lam}"] = n
            ok = ok and n == seeds
    return _result("finite_extinction", ok, {"extinct": counts, "seeds": seeds})


def check_bound_values():
    p = DeathProfile((0.1, 0.2, 1.0))
    t2 = bounds.theorem2_lower_bound(4, p)
    l1 = bounds.lemma2_bound(4, p, 1)
    t3 = bounds.theorem3_upper_bound(DeathProfile((0.2, 0.3, 1.0)))
    ok = abs(t2 - 1 / 2.4) <= 1e-12 and l1 == t2 and abs(t3 - 2) <= 1e-12
    return _result("bound_values", ok, {"theorem2_lower": t2, "lemma2_i1": l1, "theorem3_upper": t3})


def check_depth_trend(replicas: int, seed: int):
    profile = DeathProfile((0.0, 0.1, 1.0))
    lam = 0.8 * bounds.theorem2_lower_bound(3, profile)
    sweep = analysis.lambda_sweep(3, profile, [lam], [3, 4, 5], replicas, seed)
    cells = {str(D): sweep.cell(lam, D).estimate for D in (3, 4, 5)}
    return _result("extinction_regime_depth_trend", sweep.depth_trend(lam),
                   {"lambda": lam, "boundary_hit": cells, "replicas": replicas})


def run_checks(quick: bool = True, seed: int = 0) -> list[dict]:
    if quick:
        sizes = dict(inv=5, subsets=2000, drift=10**5, imm=5000, dom=30,
                     walk=10**4, walk_h=10**6, ext=50, trend=1000)
    else:
        sizes = dict(inv=50, subsets=10**4, drift=10**6, imm=10**5, dom=100,
                     walk=10**5, walk_h=10**8, ext=1000, trend=10**4)
    results = [check_model_invariants(sizes["inv"], seed),
               check_boundary_count(sizes["subsets"], seed),
               check_bound_values()]
    results += check_drift(sizes["drift"], seed)
    results.append(check_immortality(sizes["imm"], seed))
    results += check_domination(sizes["dom"], seed)
    results.append(check_gamblers_ruin(sizes["walk"], sizes["walk_h"], seed))
    results.append(check_finite_extinction(sizes["ext"], seed))
    results.append(check_depth_trend(sizes["trend"], seed))
    return results
