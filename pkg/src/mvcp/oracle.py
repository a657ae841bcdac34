"""The +1/-1 walk that bounds the total infection count from above.

The walk is handled through its embedded jump chain: holding times do not
change absorption.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .engine import HEAL, Trajectory
from .model import INFECTED, ConfigError, DeathProfile, DomainError


@dataclass(frozen=True)
class WalkSpec:
    p_up: float
    start: int = 1

    def __post_init__(self):
        if not 0.0 <= self.p_up <= 1.0:
            raise ConfigError(f"p_up must lie in [0, 1], got {self.p_up}")
        if self.start < 1:
            raise ConfigError(f"start must be >= 1, got {self.start}")


@dataclass(frozen=True)
class WalkOutcome:
    absorbed: bool
    jumps: int
    value: int


def p_w(lam: float, profile: DeathProfile) -> float:
    """``lam (1-phi(1)) / (1 + lam (1-phi(1)) + lam phi(2))``."""
    if not lam > 0:
        raise ConfigError(f"lambda must be positive, got {lam}")
    up = lam * (1 - profile(1))
    return up / (1 + up + lam * profile(2))


def absorption_probability(spec: WalkSpec) -> float:
    """Probability of ever reaching 0 (gambler's ruin against an infinite bank)."""
    p = spec.p_up
    if p <= 0.5:
        return 1.0
    return ((1 - p) / p) ** spec.start


def absorption_by_linear_system(p_up: float, start: int, depth: int) -> float:
    """Hit 0 before ``depth`` for the chain truncated at ``depth``.

    Solves ``h(k) = p h(k+1) + (1-p) h(k-1)``, ``h(0) = 1``, ``h(depth) = 0``
    as a tridiagonal system.
    """
    if not 0 < start < depth:
        raise DomainError(f"need 0 < start < depth, got start={start}, depth={depth}")
    m = depth - 1  # unknowns h(1)..h(depth-1)
    q = 1.0 - p_up
    ab = np.zeros((3, m))
    ab[0, 1:] = -p_up      # superdiagonal
    ab[1, :] = 1.0
    ab[2, :-1] = -q        # subdiagonal
    rhs = np.zeros(m)
    rhs[0] = q
    h = solve_banded((1, 1), ab, rhs)
    return float(h[start - 1])


def simulate_walk(spec: WalkSpec, horizon_jumps: int, seed) -> WalkOutcome:
    """One walk, stopped at 0 or after ``horizon_jumps`` jumps."""
    absorbed, jumps, value = simulate_walks(spec, horizon_jumps, 1, seed)
    return WalkOutcome(bool(absorbed[0]), int(jumps[0]), int(value[0]))


def simulate_walks(spec: WalkSpec, horizon_jumps: int, replicas: int, seed,
                   chunk: int = 1024) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised replicas; returns ``(absorbed, jumps, final_value)`` arrays.

    Walks advance in blocks of ``chunk`` jumps and finished walks drop out,
    so cost scales with the jumps actually taken.
    """
    if horizon_jumps < 1:
        raise DomainError("horizon must be at least one jump")
    rng = np.random.Generator(np.random.Philox(seed))
    value = np.full(replicas, spec.start, dtype=np.int64)
    jumps = np.zeros(replicas, dtype=np.int64)
    absorbed = np.zeros(replicas, dtype=bool)
    active = np.arange(replicas)
    done = 0
    while active.size and done < horizon_jumps:
        k = min(chunk, horizon_jumps - done)
        steps = np.where(rng.random((active.size, k)) < spec.p_up, 1, -1).astype(np.int32)
        path = value[active, None] + np.cumsum(steps, axis=1)
        hit = path <= 0
        any_hit = hit.any(axis=1)
        first = np.argmax(hit, axis=1)
        rows = active[any_hit]
        absorbed[rows] = True
        jumps[rows] = done + first[any_hit] + 1
        value[rows] = 0
        alive = active[~any_hit]
        value[alive] = path[~any_hit, -1]
        jumps[alive] = done + k
        active = alive
        done += k
        # blocks grow as survivors thin out
        if active.size * chunk < 4_000_000 and chunk < 1 << 16:
            chunk *= 2
    return absorbed, jumps, value


@dataclass
class DominationReport:
    events: int
    up_steps: int
    heal_steps: int
    kill_steps: int
    up_fraction: float
    p_w: float
    standard_error: float
    passed: bool
    note: str = ("per-event up-step frequency against the walk's up probability; "
                 "a rate comparison, not a pathwise coupling")

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def classify_steps(traj: Trajectory) -> list[int]:
    """+1 per infection, -1 per heal, -i per kill of a host carrying i."""
    if traj.events is None:
        raise DomainError("domination check needs a trajectory with its event list")
    steps = []
    for ev in traj.events:
        if ev.kind == HEAL:
            steps.append(-1)
        elif ev.outcome == INFECTED:
            steps.append(1)
        else:
            steps.append(-(ev.pre_count or 0))
    return steps


def domination_check(trajectories: Trajectory | list[Trajectory], lam: float,
                     profile: DeathProfile, sigmas: float = 3.0) -> DominationReport:
    """Pooled up-step fraction must not exceed ``p_w + sigmas * SE``.

    SE is the binomial standard error at ``p_w`` over the pooled event count.
    """
    if isinstance(trajectories, Trajectory):
        trajectories = [trajectories]
    up = heal = kills = n = 0
    for traj in trajectories:
        classify_steps(traj)
        for ev in traj.events:
            n += 1
            if ev.kind == HEAL:
                heal += 1
            elif ev.outcome == INFECTED:
                up += 1
            else:
                kills += 1
    pw = p_w(lam, profile)
    frac = up / n if n else 0.0
    se = math.sqrt(pw * (1 - pw) / n) if n else 0.0
    return DominationReport(n, up, heal, kills, frac, pw, se, frac <= pw + sigmas * se)
