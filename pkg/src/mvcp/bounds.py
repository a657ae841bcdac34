"""Closed-form lambda bounds on d-regular trees and drift of ``rho ** I_A``.

The published bound formulas and drift expressions are evaluated verbatim.
``drift_exact_generator`` applies the exact process generator to the
functional instead, so the two can be compared term by term.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

from .graphs import boundary_count
from .model import (DeathProfile, DomainError, GraphState,
                    MvcpConfig, MvcpError)


class AssumptionError(MvcpError):
    """A bound was requested where its hypothesis or denominator fails."""


def _check_d(d: int) -> None:
    if d < 3:
        raise DomainError(f"regular-tree bounds need d >= 3, got {d}")


def _check_rho(rho: float) -> None:
    if not 0.0 < rho < 1.0:
        raise DomainError(f"rho must lie in (0, 1), got {rho}")


def _geometric(rho: float, i: int) -> float:
    """``rho**(i-1) + ... + rho + 1``."""
    return sum(rho ** k for k in range(i))


# -- bound calculators -------------------------------------------------------

def theorem2_assumption(d: int, profile: DeathProfile) -> bool:
    """``(1 - phi(1)) (d - 2) + 1 - M > 0``."""
    _check_d(d)
    return (1 - profile(1)) * (d - 2) + 1 - profile.cutoff > 0


def theorem2_denominator(d: int, profile: DeathProfile) -> float:
    _check_d(d)
    return (1 - profile(1)) * (d - 2) + (1 - 2 * profile(2))


def theorem2_lower_bound(d: int, profile: DeathProfile, *,
                         require_assumption: bool = False) -> float:
    """Die-out threshold ``1 / ((1 - phi(1))(d - 2) + 1 - 2 phi(2))``.

    The formula is evaluated whenever its denominator is positive; pass
    ``require_assumption=True`` to also insist on the extinction theorem's
    hypothesis on ``M``.
    """
    den = theorem2_denominator(d, profile)
    if require_assumption and not theorem2_assumption(d, profile):
        raise AssumptionError(f"(1-phi(1))(d-2)+1-M > 0 fails for d={d}, M={profile.cutoff}")
    if den <= 0:
        raise AssumptionError(f"denominator {den} <= 0")
    return 1.0 / den


def lemma2_hypothesis(d: int, profile: DeathProfile, i: int) -> bool:
    _check_d(d)
    return (1 - profile(1)) * (d - 2) + 1 - (i + 1) * profile(i + 1) > 0


def lemma2_bound(d: int, profile: DeathProfile, i: int) -> float:
    """Bound for ``i`` infections per site; equals the i=1 theorem bound at i=1."""
    if not 1 <= i <= profile.cutoff - 1:
        raise DomainError(f"i must lie in 1..M-1={profile.cutoff - 1}, got {i}")
    if not lemma2_hypothesis(d, profile, i):
        raise AssumptionError(f"hypothesis fails for d={d}, i={i}")
    # (1 - phi) - i phi written as 1 - (i+1) phi so that i=1 reproduces the
    # theorem's denominator bit for bit
    return 1.0 / ((1 - profile(1)) * (d - 2) + (1 - (i + 1) * profile(i + 1)))


def theorem3_assumption(profile: DeathProfile) -> bool:
    return 1 - profile(1) - profile(2) > 0


def theorem3_upper_bound(profile: DeathProfile) -> float:
    if not theorem3_assumption(profile):
        raise AssumptionError("1 - phi(1) - phi(2) > 0 fails")
    return 1.0 / (1 - profile(1) - profile(2))


def dead_branch_bound(profile: DeathProfile) -> float:
    """Bound left over when node removal has cut every boundary edge."""
    den = 1 - 2 * profile(2)
    if den <= 0:
        raise AssumptionError(f"1 - 2 phi(2) = {den} <= 0")
    return 1.0 / den


def lemma2_rho_objective(d: int, profile: DeathProfile, i: int, rho: float) -> float:
    """``rho [(1-phi(1))(d-2) + (1-phi(i+1)) - phi(i+1) S_i(rho) / rho**i]``.

    ``lambda`` times this must stay <= 1 for every rho; it increases in rho
    and reaches the lemma's denominator at rho = 1.
    """
    phi_next = profile(i + 1)
    inner = (1 - profile(1)) * (d - 2) + (1 - phi_next) - phi_next * _geometric(rho, i) / rho ** i
    return rho * inner


def maximize_on_unit_interval(f, grid_step: float = 1e-3, tol: float = 1e-9) -> tuple[float, float]:
    """Grid search then bisection on the sign of a central difference.

    Returns ``(argmax, max)`` over the open interval (0, 1), treating the
    endpoints as limits.
    """
    n = int(round(1 / grid_step))
    xs = [k * grid_step for k in range(1, n)]
    vals = [f(x) for x in xs]
    k = max(range(len(xs)), key=vals.__getitem__)
    lo = xs[k - 1] if k > 0 else tol
    hi = xs[k + 1] if k + 1 < len(xs) else 1 - tol
    h = tol / 4
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid + h) > f(mid - h):
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    return x, f(x)


def lemma2_bound_by_sweep(d: int, profile: DeathProfile, i: int) -> tuple[float, float]:
    """Numeric route to the lemma bound: ``(rho*, 1 / sup_rho objective)``."""
    rho, best = maximize_on_unit_interval(lambda r: lemma2_rho_objective(d, profile, i, r))
    if best <= 0:
        raise AssumptionError("objective never positive on (0, 1)")
    return rho, 1.0 / best


@dataclass
class BoundSet:
    d: int
    profile: DeathProfile
    lambda_star_lower: float | None
    lambda_i_bounds: dict[int, float]
    lambda_star_upper: float | None
    dead_branch: float | None
    theorem2_assumption: bool
    theorem3_assumption: bool
    lemma2_conditions: dict[int, bool] = field(default_factory=dict)

    def as_dict(self) -> dict:
        def cmp(a, b):
            return None if a is None or b is None else a < b
        return {
            "inputs": {"d": self.d, "phi": list(self.profile.probs), "M": self.profile.cutoff},
            "lambda_star_lower": {"value": self.lambda_star_lower,
                                  "theorem_assumption": self.theorem2_assumption},
            "lambda_i": {str(i): {"value": self.lambda_i_bounds.get(i), "condition": ok}
                         for i, ok in self.lemma2_conditions.items()},
            "lambda_star_upper": {"value": self.lambda_star_upper,
                                  "theorem_assumption": self.theorem3_assumption},
            "dead_branch": {"value": self.dead_branch},
            "comparisons": {
                "lower_below_dead_branch": cmp(self.lambda_star_lower, self.dead_branch),
                "lower_below_upper": cmp(self.lambda_star_lower, self.lambda_star_upper),
            },
        }


def bound_set(d: int, profile: DeathProfile) -> BoundSet:
    def maybe(fn, *args):
        try:
            return fn(*args)
        except AssumptionError:
            return None

    conditions = {i: lemma2_hypothesis(d, profile, i) for i in range(1, profile.cutoff)}
    lam_i = {i: lemma2_bound(d, profile, i) for i, ok in conditions.items() if ok}
    return BoundSet(
        d=d, profile=profile,
        lambda_star_lower=maybe(theorem2_lower_bound, d, profile),
        lambda_i_bounds=lam_i,
        lambda_star_upper=maybe(theorem3_upper_bound, profile),
        dead_branch=maybe(dead_branch_bound, profile),
        theorem2_assumption=theorem2_assumption(d, profile),
        theorem3_assumption=theorem3_assumption(profile),
        lemma2_conditions=conditions,
    )


# -- the rho functional and its drift -------------------------------------

def nu_rho(state: GraphState, subset: Iterable[int], rho: float) -> float:
    _check_rho(rho)
    total = 0
    for x in subset:
        state._check_alive(x)
        total += state.counts[x]
    return rho ** total


@dataclass
class DriftReport:
    rho: float
    lam: float
    counts: dict[int, int]
    exact_drift: float
    terms: dict[str, float]
    paper_formula_drift: float | None = None

    @property
    def discrepancy(self) -> float | None:
        if self.paper_formula_drift is None:
            return None
        return self.paper_formula_drift - self.exact_drift


def drift_exact_generator(state: GraphState, cfg: MvcpConfig, rho: float,
                          d: int | None = None) -> DriftReport:
    """Generator of the process applied to ``rho ** I`` over infected vertices.

    Sums rate times change in the functional over every heal and every
    directed live edge out of an infected vertex.  When all infected vertices
    carry the same count the uniform closed form is attached for comparison.
    """
    _check_rho(rho)
    phi = cfg.profile
    lam = cfg.lam
    infected = state.infected()
    nu = rho ** state.total_infections()
    terms = {"healing": 0.0, "infecting_surrounding": 0.0, "infecting_within": 0.0,
             "killing_within": 0.0}
    for x in infected:
        k = state.counts[x]
        terms["healing"] += k * (nu / rho - nu)
        for y in state.adj[x]:
            i = state.counts[y]
            rate = lam * k
            p_kill = phi(i + 1)
            if i == 0:
                # killing a healthy vertex leaves the functional unchanged
                terms["infecting_surrounding"] += rate * (1 - p_kill) * (nu * rho - nu)
            else:
                terms["infecting_within"] += rate * (1 - p_kill) * (nu * rho - nu)
                terms["killing_within"] += rate * p_kill * (nu / rho ** i - nu)
    exact = math.fsum(terms.values())
    paper = None
    levels = {state.counts[x] for x in infected}
    if len(levels) == 1:
        (i,) = levels
        nb = boundary_count(state, infected).boundary_edges
        paper = drift_paper_uniform(len(infected), nb, i, cfg, rho, d)
    return DriftReport(rho, lam, {x: state.counts[x] for x in infected}, exact, terms, paper)


def drift_paper_uniform(size: int, n_boundary: int, i: int, cfg: MvcpConfig,
                        rho: float, d: int | None = None) -> float:
    """Closed-form drift for ``size`` sites each carrying ``i`` infections.

    ``(1-rho) nu { i|A|/rho + lam i|A| S_i phi(i+1)/rho**i
    - lam i N_A (1-phi(1)) - lam i|A| (1-phi(i+1)) }`` with ``nu = rho**(i|A|)``.
    ``d`` is accepted for call-site symmetry and not used.
    """
    _check_rho(rho)
    if i < 1 or size < 0 or n_boundary < 0:
        raise DomainError(f"need i >= 1 and non-negative counts, got i={i}, |A|={size}, N_A={n_boundary}")
    phi, lam = cfg.profile, cfg.lam
    nu = rho ** (i * size)
    phi_next = phi(i + 1)
    brace = (i * size / rho
             + lam * i * size * _geometric(rho, i) * phi_next / rho ** i
             - lam * i * n_boundary * (1 - phi(1))
             - lam * i * size * (1 - phi_next))
    return (1 - rho) * nu * brace


def drift_paper_two_class(size_b: int, size_c: int, n_b: int, n_c: int, n_cross: int,
                          i: int, j: int, cfg: MvcpConfig, rho: float,
                          breakdown: bool = False):
    """Two-level closed-form drift, class B at ``i`` and class C at ``j``.

    ``n_b`` and ``n_c`` count all edges leaving each class (edges into the
    other class included); ``n_cross`` counts B-C edges.  With
    ``breakdown=True`` returns ``(value, terms)`` keyed by interaction.
    """
    _check_rho(rho)
    if not 1 <= i <= j:
        raise DomainError(f"need 1 <= i <= j, got i={i}, j={j}")
    if min(size_b, size_c, n_b, n_c, n_cross) < 0 or n_cross > min(n_b, n_c):
        raise DomainError("inconsistent class sizes or edge counts")
    phi, lam = cfg.profile, cfg.lam
    nu = rho ** (i * size_b + j * size_c)
    pi, pj, p1 = phi(i + 1), phi(j + 1), phi(1)
    si, sj = _geometric(rho, i), _geometric(rho, j)
    terms = {
        "B_infects_surrounding": -lam * i * (n_b - n_cross) * (1 - p1),
        "B_infects_itself": -lam * i * size_b * (1 - pi),
        "B_kills_itself": lam * i * size_b * pi * si / rho ** i,
        "B_heals": size_b * i / rho,
        "C_infects_surrounding": -lam * j * (n_c - n_cross) * (1 - p1),
        "C_infects_itself": -lam * j * size_c * (1 - pj),
        "C_kills_itself": lam * j * size_c * pj * sj / rho ** j,
        "C_heals": size_c * j / rho,
        "B_infects_C": -lam * i * n_cross * (1 - pj),
        "C_infects_B": -lam * j * n_cross * (1 - pi),
        "B_kills_C": lam * n_cross * i * pj * sj / rho ** j,
        "C_kills_B": lam * n_cross * j * pi * si / rho ** i,
    }
    scale = (1 - rho) * nu
    terms = {k: scale * v for k, v in terms.items()}
    value = math.fsum(terms.values())
    return (value, terms) if breakdown else value


def uniform_sign_change(size: int, d: int, cfg_profile: DeathProfile, rho: float) -> float:
    """Lambda where the i=1 uniform drift vanishes for a connected interior set.

    Uses ``N_A = d|A| - 2(|A| - 1)``; tends to ``1 / (rho K)`` as |A| grows,
    with ``K = (1-phi(1))(d-2) + (1-phi(2)) - phi(2)/rho``.
    """
    _check_rho(rho)
    p1, p2 = cfg_profile(1), cfg_profile(2)
    k = (1 - p1) * (d - 2) + (1 - p2) - p2 / rho
    den = size * k + 2 * (1 - p1)
    if den <= 0:
        raise AssumptionError("drift never changes sign")
    return (size / rho) / den

