"""Independent oracles for tests: exhaustive CTMC enumeration on tiny graphs.

Nothing here touches the engine; transitions are built straight from the
rate definitions.
"""
import numpy as np
from scipy.linalg import expm, solve

HEAL, UP, KILL = "heal", "up", "kill"


def key(counts, alive):
    return tuple(c if a else None for c, a in zip(counts, alive))


def transitions(state_key, adj, lam, phi):
    """Yield (rate, next_key, kind, target) from a state key.

    ``state_key[x]`` is the count or None for dead; ``phi(k)`` with k >= 1.
    """
    n = len(state_key)
    for x in range(n):
        c = state_key[x]
        if not c:
            continue
        nxt = list(state_key)
        nxt[x] = c - 1
        yield c, tuple(nxt), HEAL, x
        for y in adj[x]:
            if state_key[y] is None:
                continue
            i = state_key[y]
            p = phi(i + 1)
            if p < 1:
                nxt = list(state_key)
                nxt[y] = i + 1
                yield lam * c * (1 - p), tuple(nxt), UP, y
            if p > 0:
                nxt = list(state_key)
                nxt[y] = None
                yield lam * c * p, tuple(nxt), KILL, y


def live_adj(adj, state_key):
    return [[y for y in adj[x] if state_key[y] is not None and state_key[x] is not None]
            for x in range(len(adj))]


def enumerate_chain(start, adj, lam, phi, augment=None):
    """Reachable states and a list of (rate, i, j, kind, target).

    ``augment(aug, kind, target, next_key) -> aug`` threads extra state
    (e.g. arrival counters) through transitions; states are (key, aug).
    """
    index = {start: 0}
    order = [start]
    edges = []
    k = 0
    while k < len(order):
        s = order[k]
        skey, aug = s
        la = live_adj(adj, skey)
        for rate, nkey, kind, tgt in transitions(skey, la, lam, phi):
            naug = augment(aug, kind, tgt, nkey) if augment else aug
            t = (nkey, naug)
            if t not in index:
                index[t] = len(order)
                order.append(t)
            edges.append((rate, k, index[t], kind, tgt))
        k += 1
    return order, edges


def generator(order, edges):
    n = len(order)
    q = np.zeros((n, n))
    for rate, i, j, _, _ in edges:
        q[i, j] += rate
        q[i, i] -= rate
    return q


def extinct(skey):
    return not any(skey)


def mean_extinction_time(start_key, adj, lam, phi):
    order, edges = enumerate_chain((start_key, None), adj, lam, phi)
    q = generator(order, edges)
    trans = [i for i, (s, _) in enumerate(order) if not extinct(s)]
    m = solve(-q[np.ix_(trans, trans)], np.ones(len(trans)))
    return m[trans.index(0)]


def extinction_cdf(start_key, adj, lam, phi, t):
    order, edges = enumerate_chain((start_key, None), adj, lam, phi)
    q = generator(order, edges)
    p = expm(q * t)[0]
    return sum(p[i] for i, (s, _) in enumerate(order) if extinct(s))


def up_fraction(start_key, adj, lam, phi):
    """E[# successful infections] / E[# events] until extinction."""
    order, edges = enumerate_chain((start_key, None), adj, lam, phi)
    n = len(order)
    out = np.zeros(n)
    up = np.zeros(n)
    p = np.zeros((n, n))
    for rate, i, j, kind, _ in edges:
        out[i] += rate
        if kind == UP:
            up[i] += rate
    for rate, i, j, _, _ in edges:
        p[i, j] += rate / out[i]
    trans = [i for i in range(n) if out[i] > 0]
    visits = solve(np.eye(len(trans)) - p[np.ix_(trans, trans)].T,
                   np.eye(len(trans))[:, trans.index(0)])
    e_up = sum(v * up[i] / out[i] for v, i in zip(visits, trans))
    return e_up / visits.sum()


def survive_arrivals_probability(start_key, adj, lam, phi, vertex, threshold):
    """P(``vertex`` survives at least ``threshold`` arrivals) by hitting probabilities."""
    def augment(aug, kind, tgt, nkey):
        if tgt != vertex or kind == HEAL or aug >= threshold:
            return aug
        return aug + 1 if kind == UP else -1  # -1 marks death of the vertex

    order, edges = enumerate_chain((start_key, 0), adj, lam, phi, augment)
    n = len(order)
    goal = [aug == threshold for _, aug in order]
    out = np.zeros(n)
    for rate, i, _, _, _ in edges:
        out[i] += rate
    p = np.zeros((n, n))
    for rate, i, j, _, _ in edges:
        p[i, j] += rate / out[i]
    free = [i for i in range(n) if not goal[i] and out[i] > 0 and order[i][1] != -1]
    b = np.array([sum(p[i, j] for j in range(n) if goal[j]) for i in free])
    h = solve(np.eye(len(free)) - p[np.ix_(free, free)], b)
    return h[free.index(0)]


def brute_force_drift(counts, alive, adj, lam, phi, rho):
    """Sum over single events of rate * change in rho ** (total infections)."""
    skey = key(counts, alive)
    base = rho ** sum(c for c in skey if c)
    total = 0.0
    for rate, nkey, _, _ in transitions(skey, live_adj(adj, skey), lam, phi):
        total += rate * (rho ** sum(c for c in nkey if c) - base)
    return total
