"""Tree generators and combinatorial helpers on live subgraphs."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator

from .model import ConfigError, DomainError, GraphState

SUBSET_GUARD = 64


@dataclass(frozen=True)
class FiniteOffspring:
    """``T_{d,n}``: every non-leaf has ``d`` children, ``n`` vertices filled BFS."""

    d: int
    n: int


@dataclass(frozen=True)
class TruncatedRegular:
    """Ball of radius ``depth`` around the root of the ``d``-regular tree."""

    d: int
    depth: int


TreeSpec = FiniteOffspring | TruncatedRegular


@dataclass(frozen=True)
class SubsetBoundary:
    subset: frozenset[int]
    boundary_edges: int
    internal_edges: int


def parse_tree_spec(text: str) -> TreeSpec:
    """``finite:d:n`` or ``regular:d:depth``."""
    parts = text.split(":")
    if len(parts) != 3 or parts[0] not in ("finite", "regular"):
        raise ConfigError(f"tree spec must be finite:d:n or regular:d:depth, got {text!r}")
    try:
        a, b = int(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"bad tree spec {text!r}") from exc
    return FiniteOffspring(a, b) if parts[0] == "finite" else TruncatedRegular(a, b)


def build_tree(spec: TreeSpec) -> GraphState:
    """All-healthy tree labelled breadth-first from root 0.

    Truncated balls carry per-vertex depths and flag depth-``D`` vertices as
    the boundary.
    """
    if isinstance(spec, FiniteOffspring):
        if spec.d < 2 or spec.n < 1:
            raise ConfigError(f"finite tree needs d >= 2 and n >= 1, got {spec}")
        edges = [((v - 1) // spec.d, v) for v in range(1, spec.n)]
        state = GraphState.from_edges(spec.n, edges)
        state.depth = _depths(state)
        return state
    if isinstance(spec, TruncatedRegular):
        if spec.d < 3 or spec.depth < 1:
            raise ConfigError(f"regular ball needs d >= 3 and depth >= 1, got {spec}")
        edges = []
        depth = [0]
        frontier = [0]
        for level in range(1, spec.depth + 1):
            nxt = []
            for parent in frontier:
                for _ in range(spec.d if parent == 0 else spec.d - 1):
                    v = len(depth)
                    depth.append(level)
                    edges.append((parent, v))
                    nxt.append(v)
            frontier = nxt
        state = GraphState.from_edges(len(depth), edges)
        state.depth = depth
        state.boundary = frozenset(frontier)
        return state
    raise ConfigError(f"unknown tree spec {spec!r}")


def _depths(state: GraphState, root: int = 0) -> list[int]:
    depth = [-1] * state.n
    depth[root] = 0
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in state.adj[u]:
            if depth[v] < 0:
                depth[v] = depth[u] + 1
                queue.append(v)
    return depth


def _check_live(state: GraphState, vertices: Iterable[int]) -> frozenset[int]:
    out = frozenset(vertices)
    for x in out:
        state._check_alive(x)
    return out


def boundary_count(state: GraphState, subset: Iterable[int]) -> SubsetBoundary:
    a = _check_live(state, subset)
    boundary = internal2 = 0
    for x in a:
        for y in state.adj[x]:
            if y in a:
                internal2 += 1
            else:
                boundary += 1
    return SubsetBoundary(a, boundary, internal2 // 2)


def cross_pairs(state: GraphState, b: Iterable[int], c: Iterable[int]) -> int:
    """Number of live edges joining ``b`` to ``c``."""
    bs, cs = _check_live(state, b), _check_live(state, c)
    if bs & cs:
        raise DomainError(f"subsets overlap on {sorted(bs & cs)}")
    return sum(1 for x in bs for y in state.adj[x] if y in cs)


def components_after_death(state: GraphState) -> list[frozenset[int]]:
    """Connected components of the live subgraph, ordered by smallest id."""
    seen = [False] * state.n
    comps = []
    for s in range(state.n):
        if seen[s] or not state.alive[s]:
            continue
        seen[s] = True
        comp = [s]
        stack = [s]
        while stack:
            u = stack.pop()
            for v in state.adj[u]:
                if not seen[v]:
                    seen[v] = True
                    comp.append(v)
                    stack.append(v)
        comps.append(frozenset(comp))
    return comps


def enumerate_connected_subsets(state: GraphState, max_size: int,
                                within: Iterable[int] | None = None
                                ) -> Iterator[frozenset[int]]:
    """Every connected vertex set of size ``<= max_size``, each exactly once.

    Uses the ESU extension scheme: a subset is grown only from its smallest
    member and only through vertices that are exclusive neighbours of the
    newest member.  ``within`` restricts to the induced subgraph on a vertex
    set (live vertices by default).
    """
    pool = set(state.live_vertices()) if within is None else set(_check_live(state, within))
    if len(pool) > SUBSET_GUARD:
        raise DomainError(f"{len(pool)} vertices exceeds the enumeration guard of {SUBSET_GUARD}")
    nbrs = {x: {y for y in state.adj[x] if y in pool} for x in pool}

    def extend(sub: frozenset[int], closed: set[int], ext: set[int], root: int):
        yield sub
        if len(sub) == max_size:
            return
        ext = set(ext)
        while ext:
            w = min(ext)
            ext.discard(w)
            fresh = {u for u in nbrs[w] if u > root and u not in closed}
            yield from extend(sub | {w}, closed | fresh, ext | fresh, root)

    if max_size < 1:
        return
    for v in sorted(pool):
        start = {u for u in nbrs[v] if u > v}
        yield from extend(frozenset([v]), start | {v}, start, v)
