"""Monte Carlo estimators with Wilson intervals, and the verification checks
built on them (extinction, immortality, drift, lambda sweeps)."""
from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np
from statsmodels.stats.proportion import proportion_confint

from . import bounds
from .engine import BOUNDARY, EXTINCTION, Simulation, StopRule, run_ensemble
from .graphs import TreeSpec, TruncatedRegular, build_tree
from .model import ConfigError, DeathProfile, GraphState, MvcpConfig

DEFAULT_CONFIDENCE = 0.99
MAX_EVENTS_GUARD = 10**7


@dataclass(frozen=True)
class EstimateCI:
    estimate: float
    lower: float
    upper: float
    successes: int
    replicas: int
    confidence: float = DEFAULT_CONFIDENCE

    def overlaps(self, other: "EstimateCI") -> bool:
        return self.lower <= other.upper and other.lower <= self.upper


def wilson(successes: int, n: int, confidence: float = DEFAULT_CONFIDENCE) -> EstimateCI:
    if n < 1:
        raise ConfigError("need at least one replica")
    lo, hi = proportion_confint(successes, n, alpha=1 - confidence, method="wilson")
    p = successes / n
    # guard the endpoints against round-off at 0 and 1
    return EstimateCI(p, min(float(lo), p), max(float(hi), p), successes, n, confidence)


def binomial_se(p: float, n: int) -> float:
    return math.sqrt(p * (1 - p) / n)


def replica_seeds(seed0: int, replicas: int) -> list[int]:
    return [seed0 + k for k in range(replicas)]


def seeds_hash(seeds: Sequence[int]) -> str:
    return hashlib.sha256(",".join(map(str, seeds)).encode()).hexdigest()[:16]


def default_horizon(state: GraphState) -> float:
    """50 expected single-infection lifetimes per initial infection."""
    return 50.0 * max(1, state.total_infections())


def estimate_extinction(initial: GraphState, cfg: MvcpConfig, horizon: float | None,
                        replicas: int, seed0: int = 0, workers: int | None = None,
                        max_events: int | None = None) -> EstimateCI:
    """Fraction of replicas extinct by ``horizon``."""
    if replicas < 1:
        raise ConfigError("replicas must be >= 1")
    horizon = default_horizon(initial) if horizon is None else horizon
    stop = StopRule(horizon=horizon, max_events=max_events)
    summaries = run_ensemble(initial, cfg, stop, replica_seeds(seed0, replicas), workers)
    return wilson(sum(s.kind == EXTINCTION for s in summaries), replicas)


@dataclass
class ImmortalityReport:
    vertex: int
    threshold: int
    estimate: float
    bound: float
    standard_error: float
    reached: int
    replicas: int
    passed: bool
    warning: str | None = None


def immortality_test(initial: GraphState, cfg: MvcpConfig, threshold: int, replicas: int,
                     seed0: int = 0, vertex: int = 0, sigmas: float = 3.0,
                     workers: int | None = None) -> ImmortalityReport:
    """Probability that ``vertex`` survives its first ``threshold`` arrivals.

    An arrival is every transmission targeting the vertex, the fatal one
    included, so a dead vertex survived one fewer arrival than it received.
    """
    if threshold < 1:
        raise ConfigError("threshold must be >= 1")
    stop = StopRule(max_events=MAX_EVENTS_GUARD)
    trajs = run_ensemble(initial, cfg, stop, replica_seeds(seed0, replicas), workers,
                         trajectories=True)
    survived = reached = 0
    for tr in trajs:
        got = tr.experienced[vertex]
        ok = got if tr.final.alive[vertex] else got - 1
        reached += got >= threshold
        survived += ok >= threshold
    p = survived / replicas
    bound = (1 - cfg.profile(1)) ** threshold
    se = binomial_se(p, replicas)
    warning = None if reached else f"vertex {vertex} never received {threshold} infections"
    return ImmortalityReport(vertex, threshold, p, bound, se, reached, replicas,
                             p <= bound + sigmas * se, warning)


@dataclass
class DriftCheck:
    exact: float
    estimates: dict[float, float]
    standard_errors: dict[float, float]
    richardson_slope: float
    extrapolated: float
    replicas: int
    passed: bool


def drift_fd_check(initial: GraphState, cfg: MvcpConfig, rho: float, dt: float = 1e-3,
                   replicas: int = 10**6, seed0: int = 0, sigmas: float = 3.0) -> DriftCheck:
    """Finite-difference estimate of the drift of ``rho ** I`` at ``dt`` and ``dt/2``.

    Both differences come from the same replicas (the state at ``dt/2`` is
    read off on the way to ``dt``).  First waiting times are drawn in bulk;
    only replicas with an event before ``dt`` are stepped by the engine,
    from their drawn first event time.  Passes when at both step sizes
    ``|estimate - exact| <= sigmas * SE + |C| h`` with first-order constant
    ``C = 2 (est(dt) - est(dt/2)) / dt``.
    """
    exact = bounds.drift_exact_generator(initial, cfg, rho).exact_drift
    nu0 = rho ** initial.total_infections()
    rate0 = sum(initial.counts[x] * (1 + cfg.lam * len(initial.adj[x])) for x in range(initial.n))
    half = dt / 2
    sums = {dt: 0.0, half: 0.0}
    sq = {dt: 0.0, half: 0.0}
    if rate0 > 0:
        rng = np.random.Generator(np.random.Philox(seed0))
        waits = rng.exponential(1 / rate0, replicas)
        for k in np.flatnonzero(waits <= dt):
            sim = Simulation(initial.copy(), cfg, (seed0, int(k)), record=False)
            sim.pending = float(waits[k])
            for h in (half, dt):
                sim.advance_to(h)
                delta = rho ** sim.state.total_infections() - nu0
                sums[h] += delta
                sq[h] += delta * delta
    est, se = {}, {}
    for h in (dt, half):
        mean = sums[h] / replicas
        var = max(sq[h] / replicas - mean * mean, 0.0)
        est[h] = mean / h
        se[h] = math.sqrt(var / replicas) / h
    slope = 2 * (est[dt] - est[half]) / dt
    passed = all(abs(est[h] - exact) <= sigmas * se[h] + abs(slope) * h for h in (dt, half))
    return DriftCheck(exact, est, se, slope, 2 * est[half] - est[dt], replicas, passed)


@dataclass
class SweepRow:
    lam: float
    depth: int
    estimate: EstimateCI
    seeds_hash: str


@dataclass
class SweepResult:
    d: int
    profile: DeathProfile
    lambdas: list[float]
    depths: list[int]
    rows: list[SweepRow]
    markers: dict[str, float | None] = field(default_factory=dict)

    def cell(self, lam: float, depth: int) -> EstimateCI:
        for r in self.rows:
            if r.lam == lam and r.depth == depth:
                return r.estimate
        raise KeyError((lam, depth))

    def depth_trend(self, lam: float) -> bool:
        """Boundary-hit estimates non-increasing in depth, up to CI overlap."""
        cells = [self.cell(lam, D) for D in sorted(self.depths)]
        return all(b.estimate <= a.estimate or a.overlaps(b) for a, b in zip(cells, cells[1:]))

    def write_csv(self, fh: IO[str]) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lambda", "depth", "estimate", "lower", "upper", "replicas", "seeds_hash"])
        for r in self.rows:
            e = r.estimate
            w.writerow([repr(r.lam), r.depth, repr(e.estimate), repr(e.lower),
                        repr(e.upper), e.replicas, r.seeds_hash])


def boundary_hit_probability(tree: TreeSpec, cfg: MvcpConfig, replicas: int, seed0: int = 0,
                             root_count: int = 1, workers: int | None = None) -> EstimateCI:
    if not isinstance(tree, TruncatedRegular):
        raise ConfigError("boundary-hit runs need a truncated regular tree")
    state = build_tree(tree)
    state.set_count(0, root_count)
    stop = StopRule(max_events=MAX_EVENTS_GUARD, boundary=True)
    summaries = run_ensemble(state, cfg, stop, replica_seeds(seed0, replicas), workers)
    return wilson(sum(s.kind == BOUNDARY for s in summaries), replicas)


def lambda_sweep(d: int, profile: DeathProfile, lambdas: Sequence[float],
                 depths: Sequence[int], replicas: int, seed0: int = 0,
                 workers: int | None = None) -> SweepResult:
    """Boundary-hit probability on truncated ``d``-regular balls per (lambda, depth)."""
    lambdas = [float(x) for x in lambdas]
    if any(b <= a for a, b in zip(lambdas, lambdas[1:])):
        raise ConfigError("lambda grid must be strictly increasing")
    rows = []
    h = seeds_hash(replica_seeds(seed0, replicas))
    for lam in lambdas:
        cfg = MvcpConfig(lam, profile)
        for depth in depths:
            est = boundary_hit_probability(TruncatedRegular(d, depth), cfg, replicas,
                                           seed0, workers=workers)
            rows.append(SweepRow(lam, depth, est, h))
    bs = bounds.bound_set(d, profile)
    markers = {"theorem2_lower_bound": bs.lambda_star_lower,
               "theorem3_upper_bound": bs.lambda_star_upper}
    return SweepResult(d, profile, lambdas, list(depths), rows, markers)

