"""Vertex-growth construction of optimal 0/1 tours.

Start from a 4-vertex sub-problem with positive optimum, then absorb one
vertex at a time: predict the new optimum from the insertion context and
the current optimizing edges, build a tour realizing the prediction, and
rebuild the optimizing edges (closure or exact oracle).
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import asdict, dataclass, field
from typing import Sequence

from .graph import CostFn, Edge, Graph, InvalidInput, Tour, canonicalize, reduce_to_tsp, splice, tour_cost, tour_edges
from .moves import DEFAULT_MAX_TOURS, InvariantViolation, moer_closure, oer_closure
from .oracle import (
    ENUMERATION_CAP,
    CapacityError,
    OptimizingEdgeSet,
    all_tours,
    exact_optimizing_edges,
)
from .rng import SplitMix64


class Provider(enum.Enum):
    CLOSURE = "closure"
    ORACLE = "oracle"


class Verdict(enum.Enum):
    HAMILTONIAN = "HAMILTONIAN"
    NOT_HAMILTONIAN = "NOT HAMILTONIAN"
    QUAD_SHORTCUT = "HAMILTONIAN (all-zero quad shortcut)"


@dataclass(frozen=True)
class InitialQuad:
    quad: tuple[int, ...]
    optimum: int
    edge_set: OptimizingEdgeSet


class _Shortcut:
    def __repr__(self):
        return "ALL_ZERO_SHORTCUT"


ALL_ZERO_SHORTCUT = _Shortcut()


@dataclass(frozen=True)
class InsertionContext:
    new_vertex: int
    d_star: int
    omega: frozenset[Edge]
    omega_s: frozenset[Edge] | None
    zero_partners: tuple[int, ...]


@dataclass
class TraceRow:
    m: int
    vertex: int
    d_star: int
    omega_size: int
    c_star: int
    h_size: int
    case: str
    predicted: int
    constructed: int
    h_next_size: int
    construction_mismatch: bool
    fallback: bool
    closure_complete: bool
    exact_optimum: int | None = None
    oracle_mismatch: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class GrowthState:
    subset: list[int]
    optimum: int
    edge_set: OptimizingEdgeSet | None
    tour: Tour | None
    provider: Provider
    trace: list[TraceRow] = field(default_factory=list)
    shortcut: bool = False


@dataclass
class Decision:
    verdict: Verdict
    witness: Tour | None
    final_cost: int | None
    final_state: GrowthState | None = None


# -- Initial quad ---------------------------------------------------------


def quad_edge_set(c: CostFn, quad: Sequence[int]) -> OptimizingEdgeSet:
    return exact_optimizing_edges(c, quad)


def select_initial_quad(c: CostFn, n: int):
    """First 4-subset (lexicographic) whose optimum is positive, with its
    exact optimizing edges; ``ALL_ZERO_SHORTCUT`` when every quad has a
    cost-0 tour."""
    if n < 4:
        raise InvalidInput(f"need at least 4 vertices, got {n}")
    for quad in itertools.combinations(range(n), 4):
        best = min(tour_cost(c, t) for t in all_tours(quad))
        if best >= 1:
            es = quad_edge_set(c, quad)
            return InitialQuad(quad, best, es)
    return ALL_ZERO_SHORTCUT


def default_order(c: CostFn, n: int) -> list[int] | None:
    sel = select_initial_quad(c, n)
    if sel is ALL_ZERO_SHORTCUT:
        return None
    quad = list(sel.quad)
    return quad + [v for v in range(n) if v not in sel.quad]


def shuffled_order(c: CostFn, n: int, seed: int) -> list[int] | None:
    """The selected quad followed by the remaining vertices in seeded random
    order."""
    order = default_order(c, n)
    if order is None:
        return None
    rest = order[4:]
    SplitMix64(seed).shuffle(rest)
    return order[:4] + rest


# -- Insertion ------------------------------------------------------------


def insertion_context(state: GrowthState, c: CostFn, v_new: int) -> InsertionContext:
    if v_new in state.subset:
        raise InvalidInput(f"vertex {v_new} already absorbed")
    verts = sorted(state.subset)
    zero = tuple(v for v in verts if c(v_new, v) == 0)
    d_star = 2 - min(len(zero), 2)
    if d_star == 1:
        assert len(zero) == 1, "single-partner case needs exactly one zero-cost partner"
    omega, omega_s = set(), set()
    want_s = state.optimum >= 1 and d_star == 0
    for a, b in itertools.combinations(verts, 2):
        d = c(v_new, a) + c(v_new, b)
        if d == d_star:
            omega.add((a, b))
        elif want_s and d == d_star + 1:
            omega_s.add((a, b))
    return InsertionContext(v_new, d_star, frozenset(omega), frozenset(omega_s) if want_s else None, zero)


def predict_cost(c_m: int, edge_set: OptimizingEdgeSet, ctx: InsertionContext) -> int:
    """Optimum of the grown sub-problem as tabulated by the growth rule."""
    h = edge_set.edges
    hit = bool(h & ctx.omega)
    if ctx.d_star == 0:
        if c_m == 0:
            return 0 if hit else 1
        if hit:
            return c_m - 1
        if h & (ctx.omega_s or frozenset()):
            return c_m
        return c_m + 1
    if ctx.d_star == 1:
        if c_m == 0:
            return 1
        return c_m if hit else c_m + 1
    return 2 if c_m == 0 else c_m + 1


@dataclass(frozen=True)
class Construction:
    tour: Tour
    cost: int
    case: str
    fallback: bool


def _optimal_tours(state: GrowthState, c: CostFn) -> list[Tour]:
    out: list[Tour] = []
    for _, t in sorted(state.edge_set.witnesses.items()):
        if t not in out and tour_cost(c, t) == state.optimum:
            out.append(t)
    if not out and state.tour is not None and tour_cost(c, state.tour) == state.optimum:
        out.append(state.tour)
    return out


def _neighbours(t: Tour, v: int) -> list[int]:
    i = t.index(v)
    return sorted({t[i - 1], t[(i + 1) % len(t)]})


def construct_tour(state: GrowthState, c: CostFn, v_new: int, ctx: InsertionContext, predicted: int) -> Construction:
    """Splice ``v_new`` into a stored witness according to the insertion
    case. Among the case's candidate splices the cheapest is taken, first
    in canonical order on ties; when the case finds no candidate, the
    cheapest splice into any stored tour is used and flagged."""
    es = state.edge_set
    h = es.edges
    c_m = state.optimum
    wit = es.witnesses
    candidates: list[Tour] = []

    def at_edges(edges):
        for a, b in sorted(edges):
            candidates.append(splice(wit[(a, b)], a, b, v_new))

    def beside(pivots):
        for t in _optimal_tours(state, c):
            for vi in pivots:
                for x in _neighbours(t, vi):
                    candidates.append(splice(t, vi, x, v_new))

    if ctx.d_star == 2:
        case = "one"
        if c_m == 0:
            tours = _optimal_tours(state, c)
            if tours:
                a, b = min(tour_edges(tours[0]))
                candidates.append(splice(tours[0], a, b, v_new))
        elif h:
            at_edges([min(h)])
    elif ctx.d_star == 1:
        (vl,) = ctx.zero_partners
        hit = h & ctx.omega
        if c_m >= 1 and hit:
            case = "two-optimizing"
            at_edges(hit)
        else:
            case = "two-plain"
            beside([vl])
    else:
        hit = h & ctx.omega
        if hit:
            case = "three-omega"
            at_edges(hit)
        elif c_m == 0:
            case = "three-zero-partner"
            beside(ctx.zero_partners)
        elif h & ctx.omega_s:
            case = "three-omega-s"
            at_edges(h & ctx.omega_s)
        else:
            case = "three-plain"
            beside(ctx.zero_partners)

    fallback = not candidates
    if fallback:
        pool = [t for _, t in sorted(wit.items())]
        if state.tour is not None:
            pool.append(state.tour)
        for t in pool:
            for a, b in sorted(tour_edges(t)):
                candidates.append(splice(t, a, b, v_new))
    if not candidates:
        raise InvariantViolation("no stored tour to splice into")
    candidates = [canonicalize(t) for t in candidates]
    costs = [tour_cost(c, t) for t in candidates]
    best = min(range(len(candidates)), key=costs.__getitem__)
    return Construction(candidates[best], costs[best], case, fallback)


# -- Edge-set rebuild -----------------------------------------------------


def rebuild_edge_set(
    state: GrowthState,
    c: CostFn,
    new_tour: Tour,
    max_tours: int = DEFAULT_MAX_TOURS,
) -> tuple[OptimizingEdgeSet, bool]:
    """Optimizing edges of the grown sub-problem and whether the closure
    reached its fixpoint (always True for the exact provider).

    The closure runs at the constructed tour's own cost, which is the
    best level the construction can certify.
    """
    if state.provider is Provider.ORACLE:
        subset = set(new_tour)
        if len(subset) > ENUMERATION_CAP:
            raise CapacityError(f"exact provider capped at {ENUMERATION_CAP} vertices")
        return exact_optimizing_edges(c, subset), True
    if tour_cost(c, new_tour) >= 1:
        res = oer_closure(c, new_tour, max_tours=max_tours)
    else:
        res = moer_closure(c, new_tour, max_tours=max_tours)
    return res.edge_set, res.complete


# -- Growth loop ----------------------------------------------------------


def _first_tour(es: OptimizingEdgeSet, c: CostFn) -> Tour:
    for _, t in sorted(es.witnesses.items()):
        if tour_cost(c, t) == es.optimum:
            return t
    raise InvariantViolation("edge set has no witness at its optimum")


def initial_state(c: CostFn, quad: Sequence[int], provider: Provider) -> GrowthState:
    es = quad_edge_set(c, quad)
    return GrowthState(list(quad), es.optimum, es, _first_tour(es, c), provider)


def absorb(state: GrowthState, c: CostFn, v: int, max_tours: int = DEFAULT_MAX_TOURS) -> TraceRow:
    ctx = insertion_context(state, c, v)
    predicted = predict_cost(state.optimum, state.edge_set, ctx)
    built = construct_tour(state, c, v, ctx, predicted)
    es, complete = rebuild_edge_set(state, c, built.tour, max_tours)
    exact = None
    if state.provider is Provider.ORACLE:
        exact = es.optimum
    row = TraceRow(
        m=len(state.subset),
        vertex=v,
        d_star=ctx.d_star,
        omega_size=len(ctx.omega),
        c_star=state.optimum,
        h_size=len(state.edge_set.witnesses),
        case=built.case,
        predicted=predicted,
        constructed=built.cost,
        h_next_size=len(es.witnesses),
        construction_mismatch=built.cost != predicted,
        fallback=built.fallback,
        closure_complete=complete,
        exact_optimum=exact,
        oracle_mismatch=exact is not None and built.cost != exact,
    )
    state.subset.append(v)
    state.optimum = es.optimum
    state.edge_set = es
    state.tour = built.tour if state.provider is Provider.CLOSURE else _first_tour(es, c)
    state.trace.append(row)
    return row


def grow(
    g: Graph,
    order: Sequence[int] | None = None,
    provider: Provider = Provider.CLOSURE,
    max_tours: int = DEFAULT_MAX_TOURS,
) -> GrowthState:
    """Run the growth loop over ``order`` (default: selected quad, then the
    remaining vertices ascending). With the default order and every quad
    at cost 0, returns a state flagged ``shortcut`` without growing."""
    c = reduce_to_tsp(g)
    if g.n < 4:
        raise InvalidInput(f"growth needs at least 4 vertices, got {g.n}")
    if order is None:
        order = default_order(c, g.n)
        if order is None:
            return GrowthState([], 0, None, None, provider, shortcut=True)
    order = list(order)
    if sorted(order) != list(range(g.n)):
        raise InvalidInput(f"order must be a permutation of 0..{g.n - 1}")
    state = initial_state(c, order[:4], provider)
    for v in order[4:]:
        absorb(state, c, v, max_tours)
    return state


def _verified(g: Graph, t: Tour) -> Tour:
    if len(t) != g.n or set(t) != set(range(g.n)) or any(not g.has_edge(*e) for e in tour_edges(t)):
        raise InvariantViolation(f"claimed Hamiltonian cycle {t} is not one")
    return t


def decide_hamiltonian(
    g: Graph,
    order: Sequence[int] | None = None,
    provider: Provider = Provider.CLOSURE,
    max_tours: int = DEFAULT_MAX_TOURS,
) -> Decision:
    """Hamiltonicity verdict. Positive verdicts carry a re-verified cycle;
    negative verdicts are the algorithm's claim only."""
    if g.n < 3:
        return Decision(Verdict.NOT_HAMILTONIAN, None, None)
    if g.n == 3:
        c = reduce_to_tsp(g)
        cost = tour_cost(c, (0, 1, 2))
        if cost == 0:
            return Decision(Verdict.HAMILTONIAN, _verified(g, (0, 1, 2)), 0)
        return Decision(Verdict.NOT_HAMILTONIAN, None, cost)
    state = grow(g, order, provider, max_tours)
    if state.shortcut:
        return Decision(Verdict.QUAD_SHORTCUT, None, 0, state)
    c = reduce_to_tsp(g)
    if state.optimum == 0:
        t = state.tour if tour_cost(c, state.tour) == 0 else _first_tour(state.edge_set, c)
        return Decision(Verdict.HAMILTONIAN, _verified(g, t), 0, state)
    return Decision(Verdict.NOT_HAMILTONIAN, None, state.optimum, state)
