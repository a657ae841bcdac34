import io
import math

import numpy as np
import pytest

import oracles
from mvcp.engine import (BOUNDARY, EXTINCTION, HEAL, HORIZON, MAX_EVENTS, RateIndex,
                         Simulation, StopRule, TRANSMIT, UniformStream, check_rate_index,
                         next_event, read_jsonl, replay, run, run_ensemble, write_jsonl)
from mvcp.graphs import FiniteOffspring, TruncatedRegular, build_tree
from mvcp.model import (ConfigError, DeathProfile, GraphState, MvcpConfig,
                        total_event_rate)

PHI = DeathProfile((0.1, 0.5, 1.0))


def t319(root=1):
    t = build_tree(FiniteOffspring(3, 19))
    t.set_count(0, root)
    return t


def test_uniform_stream_reproducible():
    a, b = UniformStream(5), UniformStream(5)
    xs = [a() for _ in range(1500)]
    assert xs == [b() for _ in range(1500)]
    assert all(0 <= x < 1 for x in xs)


def test_rate_index_sampling_and_updates():
    rates = [0.0, 2.0, 0.0, 1.0, 5.0]
    idx = RateIndex(rates)
    assert idx.total == 8.0
    assert idx.find(0.0) == 1 and idx.find(1.999) == 1
    assert idx.find(2.0) == 3 and idx.find(3.5) == 4 and idx.find(7.999) == 4
    idx.set(4, 0.0)
    idx.set(0, 1.0)
    assert idx.total == 4.0 and idx.find(0.5) == 0 and idx.find(3.9) == 3


def test_rate_index_upper_edge_falls_back():
    idx = RateIndex([1.0, 1.0, 0.0])
    assert idx.find(2.0) == 1


def empirical_choice(state, lam, n=40000):
    counts = {}
    for s in range(n):
        sim = Simulation(state.copy(), MvcpConfig(lam, DeathProfile((0.0, 0.0, 0.0, 1.0))), s,
                         record=False)
        ev = next_event(sim)
        key = HEAL if ev.kind == HEAL else ev.y
        counts[key] = counts.get(key, 0) + 1
    return {k: v / n for k, v in counts.items()}


def test_next_event_single_vertex_heals():
    lone = GraphState.from_edges(1, [], {0: 1})
    waits = []
    for s in range(4000):
        sim = Simulation(lone.copy(), MvcpConfig(1.0, PHI), s)
        ev = next_event(sim)
        assert ev.kind == HEAL
        waits.append(ev.t)
    assert np.mean(waits) == pytest.approx(1.0, abs=4 / math.sqrt(4000))


def test_next_event_split_one_neighbour():
    g = GraphState.from_edges(2, [(0, 1)], {0: 1})
    freq = empirical_choice(g, 1.0, 20000)
    assert freq[HEAL] == pytest.approx(0.5, abs=4 * math.sqrt(0.25 / 20000))


def test_next_event_split_three_neighbours():
    # rate table 2 : 3 * (2 * 0.5), uniform over neighbours
    star = GraphState.from_edges(4, [(0, 1), (0, 2), (0, 3)], {0: 2})
    n = 40000
    freq = empirical_choice(star, 0.5, n)
    assert freq[HEAL] == pytest.approx(2 / 5, abs=4 * math.sqrt(0.24 / n))
    for y in (1, 2, 3):
        assert freq[y] == pytest.approx(1 / 5, abs=4 * math.sqrt(0.16 / n))


def test_next_event_none_when_extinct():
    g = GraphState.from_edges(2, [(0, 1)])
    assert next_event(Simulation(g, MvcpConfig(1.0, PHI), 0)) is None


def test_single_vertex_mean_extinction_time():
    lone = GraphState.from_edges(1, [], {0: 1})
    n = 10**4
    times = [run(lone, MvcpConfig(1.0, PHI), StopRule(), s, record=False).summary.t
             for s in range(n)]
    assert np.mean(times) == pytest.approx(1.0, abs=3 / math.sqrt(n))


@pytest.mark.parametrize("lam", [0.5, 1.0, 3.0])
def test_two_vertex_fatal_profile_against_ctmc(lam):
    # M = 1: every transmission kills its target
    phi = DeathProfile((1.0,))
    g = GraphState.from_edges(2, [(0, 1)], {0: 1})
    exact_mean = oracles.mean_extinction_time((1, 0), [[1], [0]], lam, phi)
    if lam == 1.0:
        assert exact_mean == pytest.approx(1.0)
    n = 20000
    times = np.array([run(g, MvcpConfig(lam, phi), StopRule(), s, record=False).summary.t
                      for s in range(n)])
    assert times.mean() == pytest.approx(exact_mean, abs=4 * times.std() / math.sqrt(n))
    cdf = oracles.extinction_cdf((1, 0), [[1], [0]], lam, phi, 0.7)
    assert (times <= 0.7).mean() == pytest.approx(cdf, abs=4 * math.sqrt(cdf * (1 - cdf) / n))


def test_small_ctmc_extinction_time_multi_infection():
    phi = DeathProfile((0.2, 0.5, 1.0))
    adj = [[1], [0, 2], [1]]
    g = GraphState.from_edges(3, [(0, 1), (1, 2)], {1: 1})
    exact = oracles.mean_extinction_time((0, 1, 0), adj, 1.5, phi)
    n = 20000
    times = np.array([run(g, MvcpConfig(1.5, phi), StopRule(), s, record=False).summary.t
                      for s in range(n)])
    assert times.mean() == pytest.approx(exact, abs=4 * times.std() / math.sqrt(n))


def test_finite_tree_runs_die_out():
    cfg = MvcpConfig(1.0, PHI)
    for s in range(200):
        tr = run(t319(), cfg, StopRule(max_events=10**7), s, record=False)
        assert tr.summary.kind == EXTINCTION
        assert tr.final.total_infections() == 0


def test_rate_index_tracks_exact_total_every_event():
    cfg = MvcpConfig(2.0, PHI)
    for s in range(20):
        sim = Simulation(t319(2), cfg, s)
        while next_event(sim) is not None:
            check_rate_index(sim)
            sim.state.check_invariants(PHI.cutoff)
        assert total_event_rate(sim.state, cfg) == 0


def test_event_times_increase_and_replay():
    cfg = MvcpConfig(1.5, PHI)
    init = t319(2)
    for s in range(30):
        tr = run(init, cfg, StopRule(), s)
        ts = [e.t for e in tr.events]
        assert all(b > a for a, b in zip(ts, ts[1:]))
        assert ts[0] > 0 if ts else True
        final = replay(init, cfg, tr.events)
        assert final.counts == tr.final.counts and final.alive == tr.final.alive


def test_no_edges_is_pure_death():
    g = GraphState.from_edges(3, [], {0: 2, 1: 1, 2: 3})
    tr = run(g, MvcpConfig(4.0, DeathProfile((0.0, 0.0, 0.0, 0.0, 1.0))), StopRule(), 1)
    assert all(e.kind == HEAL for e in tr.events)
    assert len(tr.events) == 6


def test_stop_rules():
    cfg = MvcpConfig(1.0, DeathProfile((0.0, 0.0, 0.0, 0.0, 1.0)))
    tr = run(t319(3), cfg, StopRule(horizon=0.01), 3)
    assert tr.summary.kind in (HORIZON, EXTINCTION)
    tr = run(t319(3), cfg, StopRule(max_events=5), 3)
    assert tr.summary.kind == MAX_EVENTS and tr.n_events == 5
    ball = build_tree(TruncatedRegular(3, 2))
    ball.set_count(0, 1)
    kinds = {run(ball, MvcpConfig(3.0, cfg.profile), StopRule(boundary=True), s).summary.kind
             for s in range(50)}
    assert BOUNDARY in kinds
    with pytest.raises(ConfigError):
        run(t319(), cfg, StopRule(boundary=True), 0)


def test_boundary_hit_records_boundary_vertex():
    ball = build_tree(TruncatedRegular(3, 2))
    ball.set_count(0, 1)
    for s in range(50):
        tr = run(ball, MvcpConfig(3.0, PHI), StopRule(boundary=True), s)
        if tr.summary.kind == BOUNDARY:
            assert tr.summary.vertex in ball.boundary
            assert tr.final.counts[tr.summary.vertex] > 0


def test_experienced_counts_every_arrival():
    cfg = MvcpConfig(2.0, PHI)
    tr = run(t319(2), cfg, StopRule(), 11)
    arrivals = [0] * 19
    for e in tr.events:
        if e.kind == TRANSMIT:
            arrivals[e.y] += 1
    assert arrivals == tr.experienced


def test_determinism_and_ensemble():
    cfg = MvcpConfig(1.0, PHI)
    a = run(t319(), cfg, StopRule(), 42)
    b = run(t319(), cfg, StopRule(), 42)
    assert a.events == b.events and a.summary == b.summary
    seq = [run(t319(), cfg, StopRule(), s, record=False).summary for s in (3, 1, 2)]
    assert run_ensemble(t319(), cfg, StopRule(), [3, 1, 2], workers=1) == seq
    assert run_ensemble(t319(), cfg, StopRule(), [3, 1, 2], workers=2) == seq
    assert run_ensemble(t319(), cfg, StopRule(), []) == []
    with pytest.raises(ConfigError):
        run_ensemble(t319(), cfg, StopRule(), [1, 1])


def test_jsonl_round_trip():
    cfg = MvcpConfig(1.0, PHI)
    tr = run(t319(), cfg, StopRule(), 8)
    buf = io.StringIO()
    write_jsonl(tr, buf)
    lines = buf.getvalue().splitlines()
    assert len(lines) == len(tr.events) + 1
    events, summary = read_jsonl(io.StringIO(buf.getvalue()))
    assert summary["summary"]["kind"] == EXTINCTION
    assert [(e.t, e.kind, e.x, e.y, e.outcome) for e in events] == \
        [(e.t, e.kind, e.x, e.y, e.outcome) for e in tr.events]
    final = replay(t319(), cfg, events)
    assert final.counts == tr.final.counts
    thin = io.StringIO()
    write_jsonl(run(t319(), cfg, StopRule(), 8, record=False), thin, thin=True)
    assert len(thin.getvalue().splitlines()) == 1
