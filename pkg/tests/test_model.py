import io

import pytest
from hypothesis import given, settings, strategies as st

from mvcp.model import (INFECTED, KILLED, ConfigError, DeathProfile, DomainError,
                        GraphState, MvcpConfig, apply_heal, apply_transmission,
                        neighbor_infection_load, read_edge_list, read_infections,
                        total_event_rate, write_edge_list, write_infections)


def path3(counts=(1, 0, 2)):
    return GraphState.from_edges(3, [(0, 1), (1, 2)], dict(enumerate(counts)))


def test_profile_lookup():
    p = DeathProfile((0.1, 0.5, 1.0))
    assert p.cutoff == 3
    assert p(1) == 0.1 and p(2) == 0.5 and p(3) == 1.0
    assert p(10) == 1.0
    with pytest.raises(DomainError):
        p(0)


@pytest.mark.parametrize("probs", [(0.5, 0.2, 1.0), (0.1, 0.5), (0.1, 1.2, 1.0), ()])
def test_profile_rejects(probs):
    with pytest.raises(ConfigError):
        DeathProfile(probs)


def test_profile_parse():
    assert DeathProfile.parse("0.1,0.5,1.0").probs == (0.1, 0.5, 1.0)
    with pytest.raises(ConfigError):
        DeathProfile.parse("0.1,0.5,0.9")


def test_config_needs_positive_lambda():
    with pytest.raises(ConfigError):
        MvcpConfig(0.0, DeathProfile((1.0,)))


def test_neighbor_load():
    assert neighbor_infection_load(path3(), 1) == 3
    lone = GraphState.from_edges(1, [], {0: 2})
    assert neighbor_infection_load(lone, 0) == 0
    star = GraphState.from_edges(5, [(0, k) for k in range(1, 5)], {k: 2 for k in range(1, 5)})
    assert neighbor_infection_load(star, 0) == sum(star.counts[y] for y in (1, 2, 3, 4)) == 8


def test_neighbor_load_dead_vertex():
    s = path3()
    apply_transmission(s, 1, 0.0, DeathProfile((1.0,)))
    with pytest.raises(DomainError):
        neighbor_infection_load(s, 1)
    with pytest.raises(DomainError):
        neighbor_infection_load(s, 7)


def test_heal():
    s = GraphState.from_edges(1, [], {0: 2})
    apply_heal(s, 0)
    assert s.counts[0] == 1 and s.generation == 1
    apply_heal(s, 0)
    assert s.counts[0] == 0 and s.alive[0]
    with pytest.raises(DomainError):
        apply_heal(s, 0)


def test_transmission_at_cutoff_always_kills():
    p = DeathProfile((0.0, 0.0, 1.0))
    s = GraphState.from_edges(2, [(0, 1)], {0: 1, 1: 2})
    _, out = apply_transmission(s, 1, 0.999999, p)
    assert out == KILLED
    assert not s.alive[1] and s.counts[1] == 0 and not s.adj[0]


def test_transmission_threshold():
    p = DeathProfile((0.0, 0.3, 1.0))
    s = GraphState.from_edges(2, [(0, 1)], {0: 1})
    _, out = apply_transmission(s, 1, 0.99, p)
    assert out == INFECTED and s.counts[1] == 1
    t = s.copy()
    assert apply_transmission(t, 1, 0.29, p)[1] == KILLED
    assert apply_transmission(s, 1, 0.31, p)[1] == INFECTED and s.counts[1] == 2


def test_transmission_to_dead_target():
    p = DeathProfile((1.0,))
    s = GraphState.from_edges(2, [(0, 1)], {0: 1})
    apply_transmission(s, 1, 0.5, p)
    with pytest.raises(DomainError):
        apply_transmission(s, 1, 0.5, p)


def test_total_event_rate():
    cfg = MvcpConfig(0.5, DeathProfile((1.0,)))
    assert total_event_rate(path3(), cfg) == pytest.approx(4.5)
    assert total_event_rate(path3((0, 0, 0)), cfg) == 0
    lone = GraphState.from_edges(1, [], {0: 3})
    assert total_event_rate(lone, MvcpConfig(7.0, DeathProfile((1.0,)))) == 3


def test_edge_list_round_trip():
    s = path3()
    buf = io.StringIO()
    write_edge_list(s, buf)
    assert buf.getvalue() == "vertices 3\n0 1\n1 2\n"
    back = read_edge_list(io.StringIO(buf.getvalue()))
    out = io.StringIO()
    write_edge_list(back, out)
    assert out.getvalue() == buf.getvalue()
    inf = io.StringIO()
    write_infections(s, inf)
    assert read_infections(io.StringIO(inf.getvalue())) == {0: 1, 2: 2}


def test_edge_list_rejects_garbage():
    with pytest.raises(ConfigError):
        read_edge_list(io.StringIO("0 1\n"))
    with pytest.raises(ConfigError):
        read_edge_list(io.StringIO("vertices 2\n0 0\n"))


@settings(max_examples=60, deadline=None)
@given(ops=st.lists(st.tuples(st.booleans(), st.integers(0, 5), st.floats(0, 0.999)), max_size=60))
def test_random_ops_keep_invariants(ops):
    profile = DeathProfile((0.1, 0.4, 0.7, 1.0))
    s = GraphState.from_edges(6, [(0, 1), (1, 2), (2, 3), (1, 4), (4, 5), (0, 5)], {0: 1})
    for heal, x, u in ops:
        if not s.alive[x]:
            continue
        before = s.total_infections()
        if heal:
            if s.counts[x] == 0:
                continue
            apply_heal(s, x)
            assert s.total_infections() == before - 1
        else:
            prior = s.counts[x]
            _, out = apply_transmission(s, x, u, profile)
            assert s.total_infections() == before + (1 if out == INFECTED else -prior)
        s.check_invariants(profile.cutoff)
    cfg = MvcpConfig(1.3, profile)
    assert (total_event_rate(s, cfg) == 0) == s.is_extinct()
