"""Exact event-driven simulation (Gillespie direct method).

Each event consumes uniforms from a per-replica Philox stream in a fixed
order: waiting time, vertex, heal-vs-transmit, neighbour, death draw.  Heal
events stop after the third draw.  Neighbours are indexed in ascending id
order, so a trajectory is a pure function of (initial state, config, seed).
"""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import IO, Iterable, NamedTuple, Sequence

import numpy as np

from .model import (INFECTED, KILLED, ConfigError, DomainError, GraphState,
                    MvcpConfig, apply_heal, apply_transmission, total_event_rate)

HEAL = "heal"
TRANSMIT = "transmit"

EXTINCTION = "ExtinctionAt"
HORIZON = "HorizonReached"
BOUNDARY = "BoundaryHit"
MAX_EVENTS = "MaxEvents"

REBUILD_EVERY = 1 << 16
WORKERS_ENV = "MVCP_WORKERS"


class UniformStream:
    """Buffered uniforms in [0, 1) from a Philox counter-based generator."""

    __slots__ = ("_gen", "_buf", "_pos", "_size")

    def __init__(self, seed: int | Sequence[int], size: int = 512):
        self._gen = np.random.Generator(np.random.Philox(seed))
        self._size = size
        self._buf: list[float] = []
        self._pos = 0

    def __call__(self) -> float:
        if self._pos == len(self._buf):
            self._buf = self._gen.random(self._size).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u


class RateIndex:
    """Fenwick tree over per-vertex event rates.

    Supports O(log n) point updates and proportional sampling.
    """

    def __init__(self, rates: Sequence[float]):
        self.n = len(rates)
        self.rates = [0.0] * self.n
        self._tree = [0.0] * (self.n + 1)
        self._top = 1 << max(self.n.bit_length() - 1, 0)
        self.rebuild(rates)

    def rebuild(self, rates: Sequence[float]) -> None:
        self.rates = [float(r) for r in rates]
        tree = [0.0] * (self.n + 1)
        for i, r in enumerate(self.rates, start=1):
            tree[i] += r
            j = i + (i & -i)
            if j <= self.n:
                tree[j] += tree[i]
        self._tree = tree
        self.total = math.fsum(self.rates)

    def set(self, x: int, rate: float) -> None:
        delta = rate - self.rates[x]
        if delta == 0.0:
            return
        self.rates[x] = rate
        self.total += delta
        tree = self._tree
        i = x + 1
        while i <= self.n:
            tree[i] += delta
            i += i & -i

    def find(self, target: float) -> int:
        """Smallest vertex whose cumulative rate exceeds ``target``."""
        tree = self._tree
        pos = 0
        step = self._top
        while step:
            nxt = pos + step
            if nxt <= self.n and tree[nxt] <= target:
                pos = nxt
                target -= tree[nxt]
            step >>= 1
        if pos >= self.n or self.rates[pos] <= 0.0:
            # float round-off at the upper end; fall back to the nearest positive rate
            for x in range(min(pos, self.n - 1), -1, -1):
                if self.rates[x] > 0.0:
                    return x
            raise DomainError("no positive rate to sample from")
        return pos


class Event(NamedTuple):
    t: float
    kind: str
    x: int
    y: int | None = None
    outcome: str | None = None
    pre_count: int | None = None


@dataclass(frozen=True)
class StopRule:
    """Extinction always stops a run; the other rules are optional."""

    horizon: float | None = None
    max_events: int | None = None
    boundary: bool = False


@dataclass(frozen=True)
class Summary:
    kind: str
    t: float
    infections: int = 0
    vertex: int | None = None
    events: int = 0


@dataclass
class Trajectory:
    seed: int
    config: MvcpConfig
    initial: GraphState
    summary: Summary
    experienced: list[int]
    final: GraphState
    events: list[Event] | None = None
    up_steps: int = 0
    down_steps: int = 0
    kill_steps: int = 0

    @property
    def n_events(self) -> int:
        return self.summary.events


class Simulation:
    """One replica: a state, its rate index, a clock and a uniform stream."""

    def __init__(self, state: GraphState, cfg: MvcpConfig, seed, record: bool = True):
        self.state = state
        self.cfg = cfg
        self.lam = cfg.lam
        self.draw = UniformStream(seed)
        self.t = 0.0
        self.n_events = 0
        self.pending: float | None = None
        self.experienced = [0] * state.n
        self.events: list[Event] | None = [] if record else None
        self.up = self.down = self.kills = 0
        self.index = RateIndex(self._rates())

    def _rates(self) -> list[float]:
        lam, st = self.lam, self.state
        return [st.counts[x] * (1.0 + lam * len(st.adj[x])) for x in range(st.n)]

    def _refresh(self, x: int) -> None:
        st = self.state
        self.index.set(x, st.counts[x] * (1.0 + self.lam * len(st.adj[x])))

    @property
    def total_rate(self) -> float:
        return self.index.total

    def next_time(self) -> float | None:
        """Time of the next event, drawn once and kept until fired."""
        if self.pending is None:
            if self.state.is_extinct():
                return None
            u = self.draw()
            self.pending = self.t - math.log1p(-u) / self.index.total
        return self.pending

    def fire(self) -> Event:
        """Advance to the pending event time and apply one event."""
        if self.pending is None:
            raise DomainError("fire() without a pending event time")
        self.t = self.pending
        self.pending = None
        st, draw, index = self.state, self.draw, self.index
        x = index.find(draw() * index.total)
        nbrs = st.adj[x]
        deg = len(nbrs)
        if draw() * (1.0 + self.lam * deg) < 1.0:
            apply_heal(st, x)
            self._refresh(x)
            self.down += 1
            ev = Event(self.t, HEAL, x)
        else:
            y = sorted(nbrs)[int(draw() * deg)]
            pre = st.counts[y]
            self.experienced[y] += 1
            doomed = sorted(st.adj[y])
            _, outcome = apply_transmission(st, y, draw(), self.cfg.profile)
            self._refresh(y)
            if outcome == KILLED:
                self.kills += 1
                for z in doomed:
                    self._refresh(z)
            else:
                self.up += 1
            ev = Event(self.t, TRANSMIT, x, y, outcome, pre)
        self.n_events += 1
        if self.n_events % REBUILD_EVERY == 0:
            self.index.rebuild(self._rates())
        if self.events is not None:
            self.events.append(ev)
        return ev

    def advance_to(self, until: float) -> None:
        """Fire every event with time <= ``until``."""
        while True:
            nt = self.next_time()
            if nt is None or nt > until:
                return
            self.fire()

    def run(self, stop: StopRule) -> Summary:
        st = self.state
        boundary = st.boundary if stop.boundary else frozenset()
        if stop.boundary and not st.boundary:
            raise ConfigError("boundary stop rule needs a graph with boundary vertices")
        for v in boundary:
            if st.counts[v] > 0:
                return Summary(BOUNDARY, self.t, st.total_infections(), v, 0)
        horizon = math.inf if stop.horizon is None else stop.horizon
        max_events = stop.max_events
        while True:
            if max_events is not None and self.n_events >= max_events:
                return Summary(MAX_EVENTS, self.t, st.total_infections(), None, self.n_events)
            nt = self.next_time()
            if nt is None:
                return Summary(EXTINCTION, self.t, 0, None, self.n_events)
            if nt > horizon:
                self.t = horizon
                return Summary(HORIZON, horizon, st.total_infections(), None, self.n_events)
            ev = self.fire()
            if boundary and ev.outcome == INFECTED and ev.y in boundary:
                return Summary(BOUNDARY, self.t, st.total_infections(), ev.y, self.n_events)


def next_event(sim: Simulation) -> Event | None:
    """Draw and apply the next event; None once the process has died out."""
    if sim.next_time() is None:
        return None
    return sim.fire()


def run(initial: GraphState, cfg: MvcpConfig, stop: StopRule, seed: int,
        record: bool = True) -> Trajectory:
    """Simulate one replica from a copy of ``initial``."""
    sim = Simulation(initial.copy(), cfg, seed, record=record)
    summary = sim.run(stop)
    return Trajectory(seed, cfg, initial, summary, sim.experienced, sim.state,
                      sim.events, sim.up, sim.down, sim.kills)


def _run_summary(args):
    initial, cfg, stop, seed, keep = args
    traj = run(initial, cfg, stop, seed, record=False)
    if keep:
        traj.initial = None
        return traj
    return traj.summary


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def run_ensemble(initial: GraphState, cfg: MvcpConfig, stop: StopRule,
                 seeds: Iterable[int], workers: int | None = None,
                 trajectories: bool = False) -> list:
    """Summaries (or unrecorded trajectories) in seed order.

    Replicas are independent; running them in worker processes gives the
    same result as a sequential loop.
    """
    seeds = list(seeds)
    if len(set(seeds)) != len(seeds):
        raise ConfigError("ensemble seeds must be distinct")
    workers = default_workers() if workers is None else workers
    jobs = [(initial, cfg, stop, s, trajectories) for s in seeds]
    if workers <= 1 or len(seeds) < 2:
        return [_run_summary(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_summary, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def replay(initial: GraphState, cfg: MvcpConfig, events: Iterable[Event]) -> GraphState:
    """Re-apply a recorded event list; death draws are implied by outcomes."""
    state = initial.copy()
    for ev in events:
        if ev.kind == HEAL:
            apply_heal(state, ev.x)
        else:
            draw = 0.0 if ev.outcome == KILLED else 1.0
            _, outcome = apply_transmission(state, ev.y, draw, cfg.profile)
            if outcome != ev.outcome:
                raise DomainError(f"replay diverged at t={ev.t}: {ev}")
    return state


def check_rate_index(sim: Simulation, tol: float = 1e-9) -> None:
    exact = total_event_rate(sim.state, sim.cfg)
    if abs(sim.index.total - exact) > tol:
        raise AssertionError(f"rate index total {sim.index.total} != {exact}")


# -- JSON-lines export ---------------------------------------------------------

def event_record(ev: Event) -> dict:
    return {"t": ev.t, "kind": ev.kind, "x": ev.x, "y": ev.y, "outcome": ev.outcome}


def summary_record(traj: Trajectory) -> dict:
    return {"summary": asdict(traj.summary), "seed": traj.seed,
            "experienced": traj.experienced}


def write_jsonl(traj: Trajectory, fh: IO[str], thin: bool = False) -> None:
    if not thin:
        if traj.events is None:
            raise DomainError("trajectory was run without event recording")
        for ev in traj.events:
            fh.write(json.dumps(event_record(ev)) + "\n")
    fh.write(json.dumps(summary_record(traj)) + "\n")


def read_jsonl(fh: IO[str]) -> tuple[list[Event], dict | None]:
    events, summary = [], None
    for line in fh:
        if not line.strip():
            continue
        rec = json.loads(line)
        if "header" in rec:
            continue
        if "summary" in rec:
            summary = rec
        else:
            events.append(Event(rec["t"], rec["kind"], rec["x"], rec["y"], rec["outcome"]))
    return events, summary
