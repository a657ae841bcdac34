"""State space and atomic transitions of the multi-virus contact process.

A vertex is either alive with some number of infections or dead.  Every
infection heals at rate 1 and fires at rate ``lambda`` along each live
incident edge.  An infection arriving at a host that already carries ``i``
infections kills the host with probability ``phi(i + 1)``; a killed host
loses its infections and all of its edges.

Randomness never enters this module: transitions take their draws as
arguments so the engine controls the stream.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, TextIO

INFECTED = "infected"
KILLED = "killed"


class MvcpError(ValueError):
    """Base class for errors raised by this package."""


class DomainError(MvcpError):
    """An operation was applied outside its precondition."""


class ConfigError(MvcpError):
    """An invalid model or experiment configuration."""


@dataclass(frozen=True)
class DeathProfile:
    """Death probabilities ``phi(1), ..., phi(M)`` with ``phi(M) == 1``.

    ``phi(0)`` is 0 and ``phi(k)`` is 1 for every ``k >= M``.
    """

    probs: tuple[float, ...]

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        if not probs:
            raise ConfigError("death profile needs at least one entry")
        for p in probs:
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"death probability {p} outside [0, 1]")
        for a, b in zip(probs, probs[1:]):
            if b < a:
                raise ConfigError(f"death profile is not non-decreasing: {probs}")
        if probs[-1] != 1.0:
            raise ConfigError(f"last entry phi(M) must be 1.0, got {probs[-1]}")

    @classmethod
    def parse(cls, text: str) -> "DeathProfile":
        """Build from a comma list ``"0.1,0.5,1.0"``."""
        try:
            values = [float(tok) for tok in text.split(",") if tok.strip()]
        except ValueError as exc:
            raise ConfigError(f"cannot parse death profile {text!r}") from exc
        return cls(tuple(values))

    @property
    def cutoff(self) -> int:
        return len(self.probs)

    def __call__(self, k: int) -> float:
        if k < 1:
            raise DomainError(f"phi is only queried at k >= 1, got {k}")
        if k >= len(self.probs):
            return 1.0
        return self.probs[k - 1]

    def __str__(self):
        return ",".join(repr(p) for p in self.probs)


@dataclass(frozen=True)
class MvcpConfig:
    """Infection rate and death profile; the healing rate is fixed at 1."""

    lam: float
    profile: DeathProfile

    def __post_init__(self):
        if not self.lam > 0:
            raise ConfigError(f"infection rate must be positive, got {self.lam}")


@dataclass
class GraphState:
    """Mutable graph with per-vertex infection counts.

    Dead vertices stay in place (``alive[x]`` is False, ``counts[x]`` is 0)
    so vertex ids remain stable.  ``adj`` only holds live edges.
    """

    counts: list[int]
    alive: list[bool]
    adj: list[set[int]]
    generation: int = 0
    boundary: frozenset[int] = field(default_factory=frozenset)
    depth: list[int] | None = None

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]],
                   infections: Mapping[int, int] | None = None) -> "GraphState":
        adj: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise ConfigError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ConfigError(f"edge ({u}, {v}) outside 0..{n - 1}")
            adj[u].add(v)
            adj[v].add(u)
        state = cls(counts=[0] * n, alive=[True] * n, adj=adj)
        for x, k in (infections or {}).items():
            state.set_count(x, k)
        return state

    @property
    def n(self) -> int:
        return len(self.counts)

    def copy(self) -> "GraphState":
        return GraphState(list(self.counts), list(self.alive),
                          [set(s) for s in self.adj], self.generation,
                          self.boundary, self.depth)

    def set_count(self, x: int, k: int) -> None:
        self._check_alive(x)
        if k < 0:
            raise ConfigError(f"negative infection count {k} at vertex {x}")
        self.counts[x] = int(k)

    def status(self, x: int) -> int | None:
        """Infection count of ``x``, or None if ``x`` is dead."""
        return self.counts[x] if self.alive[x] else None

    def edges(self) -> list[tuple[int, int]]:
        return sorted((u, v) for u in range(self.n) for v in self.adj[u] if u < v)

    def live_vertices(self) -> list[int]:
        return [x for x in range(self.n) if self.alive[x]]

    def infected(self) -> list[int]:
        return [x for x in range(self.n) if self.alive[x] and self.counts[x] > 0]

    def total_infections(self) -> int:
        return sum(self.counts)

    def is_extinct(self) -> bool:
        return not any(self.counts)

    def check_invariants(self, cutoff: int | None = None) -> None:
        for x in range(self.n):
            if not self.alive[x]:
                if self.adj[x] or self.counts[x]:
                    raise AssertionError(f"dead vertex {x} keeps edges or infections")
                continue
            if cutoff is not None and self.counts[x] >= cutoff:
                raise AssertionError(f"vertex {x} carries {self.counts[x]} >= M")
            for y in self.adj[x]:
                if y == x or x not in self.adj[y] or not self.alive[y]:
                    raise AssertionError(f"bad edge ({x}, {y})")

    def _check_alive(self, x: int) -> None:
        if not 0 <= x < self.n:
            raise DomainError(f"vertex {x} out of range")
        if not self.alive[x]:
            raise DomainError(f"vertex {x} is dead")


def neighbor_infection_load(state: GraphState, x: int) -> int:
    state._check_alive(x)
    return sum(state.counts[y] for y in state.adj[x])


def apply_heal(state: GraphState, x: int) -> GraphState:
    state._check_alive(x)
    if state.counts[x] < 1:
        raise DomainError(f"vertex {x} is healthy, nothing to heal")
    state.counts[x] -= 1
    state.generation += 1
    return state


def kill(state: GraphState, x: int) -> int:
    """Remove ``x`` with its infections and edges; returns the infections lost."""
    lost = state.counts[x]
    for y in state.adj[x]:
        state.adj[y].discard(x)
    state.adj[x] = set()
    state.counts[x] = 0
    state.alive[x] = False
    return lost


def apply_transmission(state: GraphState, target: int, death_draw: float,
                       profile: DeathProfile) -> tuple[GraphState, str]:
    """Deliver one infection to ``target``.

    The host dies when ``death_draw < phi(i + 1)``; the arriving infection
    dies with it.
    """
    state._check_alive(target)
    i = state.counts[target]
    state.generation += 1
    if death_draw < profile(i + 1):
        kill(state, target)
        return state, KILLED
    state.counts[target] = i + 1
    return state, INFECTED


def vertex_rate(state: GraphState, x: int, lam: float) -> float:
    return state.counts[x] * (1.0 + lam * len(state.adj[x]))


def total_event_rate(state: GraphState, cfg: MvcpConfig) -> float:
    return sum(vertex_rate(state, x, cfg.lam)
               for x in range(state.n) if state.counts[x])


# -- plain-text graph format -------------------------------------------------

def write_edge_list(state: GraphState, fh: TextIO) -> None:
    """Header ``vertices N`` then one ``u v`` line per live edge."""
    fh.write(f"vertices {state.n}\n")
    for u, v in state.edges():
        fh.write(f"{u} {v}\n")


def read_edge_list(fh: TextIO) -> GraphState:
    lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    if not lines or not lines[0].startswith("vertices"):
        raise ConfigError("edge list must start with 'vertices N'")
    try:
        n = int(lines[0].split()[1])
        edges = [tuple(int(t) for t in ln.split()) for ln in lines[1:]]
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"malformed edge list: {exc}") from exc
    if any(len(e) != 2 for e in edges):
        raise ConfigError("each edge line needs exactly two vertex ids")
    return GraphState.from_edges(n, edges)


def write_infections(state: GraphState, fh: TextIO) -> None:
    for x in state.infected():
        fh.write(f"{x} {state.counts[x]}\n")


def read_infections(fh: TextIO) -> dict[int, int]:
    out: dict[int, int] = {}
    for ln in fh:
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        parts = ln.split()
        if len(parts) != 2:
            raise ConfigError(f"infection line needs 'id count': {ln!r}")
        out[int(parts[0])] = int(parts[1])
    return out


def seed_infections(state: GraphState, infections: Mapping[int, int],
                    profile: DeathProfile | None = None) -> GraphState:
    for x, k in infections.items():
        if profile is not None and k >= profile.cutoff:
            raise ConfigError(f"initial count {k} at {x} must be below M={profile.cutoff}")
        state.set_count(x, k)
    return state


__all__: Sequence[str] = [
    "INFECTED", "KILLED", "MvcpError", "DomainError", "ConfigError",
    "DeathProfile", "MvcpConfig", "GraphState", "neighbor_infection_load",
    "apply_heal", "apply_transmission", "kill", "vertex_rate",
    "total_event_rate", "write_edge_list", "read_edge_list",
    "write_infections", "read_infections", "seed_infections",
]
