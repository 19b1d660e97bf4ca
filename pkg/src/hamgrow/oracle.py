"""Exact ground-truth engines.

Everything here is exponential and capped: Held-Karp handles subsets up to
``HELD_KARP_CAP`` vertices, tour enumeration up to ``ENUMERATION_CAP``.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

from .graph import CostFn, Edge, Graph, InvalidInput, Tour, canonicalize, edge, tour_cost, tour_edges

HELD_KARP_CAP = 18
ENUMERATION_CAP = 11

_INF = 1 << 20


class CapacityError(ValueError):
    pass


class Regime(enum.Enum):
    POSITIVE = "positive"
    ZERO = "zero"


@dataclass(frozen=True)
class OptimizingEdgeSet:
    """Optimizing edges of a sub-problem, one witness tour per edge.

    ``POSITIVE`` (optimum >= 1): cost-1 edges lying on some optimal tour.
    ``ZERO`` (optimum == 0): cost-0 edges on some cost-0 tour plus cost-1
    edges on some tour of cost exactly 1.
    """

    regime: Regime
    subset: frozenset[int]
    optimum: int
    witnesses: Mapping[Edge, Tour]

    @property
    def edges(self) -> frozenset[Edge]:
        return frozenset(self.witnesses)

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.witnesses)

    def witness_target(self, c: CostFn, e: Edge) -> int:
        if self.regime is Regime.POSITIVE:
            return self.optimum
        return c(*e)

    def invalid_witnesses(self, c: CostFn) -> list[Edge]:
        """Edges whose witness fails re-validation (empty when sound)."""
        bad = []
        expected_regime = Regime.POSITIVE if self.optimum >= 1 else Regime.ZERO
        for e, t in sorted(self.witnesses.items()):
            ok = (
                self.regime is expected_regime
                and canonicalize(t) == tuple(t)
                and len(t) == len(self.subset)
                and set(t) == self.subset
                and e in tour_edges(t)
                and tour_cost(c, t) == self.witness_target(c, e)
                and (self.regime is Regime.ZERO or c(*e) == 1)
            )
            if not ok:
                bad.append(e)
        return bad


def regime_for(optimum: int) -> Regime:
    return Regime.POSITIVE if optimum >= 1 else Regime.ZERO


# -- Hamiltonian cycles ---------------------------------------------------


def _hc_search(g: Graph, count_all: bool) -> tuple[int, Tour | None]:
    n = g.n
    if n < 3:
        return 0, None
    adj = g.adj
    if any(a.bit_count() < 2 for a in adj) or not g.is_connected():
        return 0, None
    deg = [a.bit_count() for a in adj]
    start = min(range(n), key=lambda v: (deg[v], v))
    full = (1 << n) - 1
    order = [sorted(g.neighbors(v), key=lambda w: (deg[w], w)) for v in range(n)]
    path = [start]
    found = 0
    witness = None

    def dead_end(visited: int) -> bool:
        # an unvisited vertex needs two usable neighbours (unvisited, the
        # path head or the start)
        head = path[-1]
        open_ = ~visited & full
        bits = open_
        allowed = open_ | (1 << head) | (1 << start)
        while bits:
            low = bits & -bits
            if (adj[low.bit_length() - 1] & allowed).bit_count() < 2:
                return True
            bits ^= low
        return False

    def extend(v: int, visited: int) -> bool:
        nonlocal found, witness
        if visited == full:
            if adj[v] >> start & 1:
                found += 1
                if witness is None:
                    witness = canonicalize(path)
                return not count_all
            return False
        if dead_end(visited):
            return False
        for w in order[v]:
            if visited >> w & 1:
                continue
            path.append(w)
            if extend(w, visited | 1 << w):
                return True
            path.pop()
        return False

    extend(start, 1 << start)
    # each undirected cycle is met once per direction from the start
    return (found // 2 if count_all else found), witness


def find_hamiltonian_cycle(g: Graph) -> Tour | None:
    """A Hamiltonian cycle of ``g`` as a canonical tour, or None.

    Graphs with fewer than 3 vertices have no Hamiltonian cycle by
    convention.
    """
    return _hc_search(g, count_all=False)[1]


def hc_exists(g: Graph) -> bool:
    return find_hamiltonian_cycle(g) is not None


def count_hamiltonian_cycles(g: Graph) -> int:
    return _hc_search(g, count_all=True)[0]


# -- Held-Karp ------------------------------------------------------------


def _check_subset(c: CostFn, subset: Iterable[int], lo: int, cap: int) -> list[int]:
    verts = sorted(set(subset))
    if len(verts) < lo:
        raise InvalidInput(f"subset needs at least {lo} vertices, got {len(verts)}")
    if len(verts) > cap:
        raise CapacityError(f"subset of {len(verts)} vertices exceeds cap {cap}")
    if verts[0] < 0 or verts[-1] >= c.n:
        raise InvalidInput(f"subset {verts} out of range for n={c.n}")
    return verts


class _PathTable:
    """Held-Karp table over (visited set, endpoint), anchored at the
    smallest vertex of the subset.

    ``best[mask, j]`` is the cheapest path from the anchor through exactly
    the non-anchor vertices in ``mask`` ending at non-anchor ``j``.
    """

    def __init__(self, c: CostFn, verts: list[int]):
        self.verts = verts
        cm = np.array(c.matrix(verts), dtype=np.int32)
        self.cost = cm
        k = len(verts) - 1
        self.k = k
        size = 1 << k
        best = np.full((size, k), _INF, dtype=np.int32)
        bits = 1 << np.arange(k)
        best[bits, np.arange(k)] = cm[0, 1:]
        inner = cm[1:, 1:]
        masks = np.arange(size)
        popcount = np.zeros(size, dtype=np.int64)
        for j in range(k):
            popcount += (masks >> j) & 1
        self.popcount = popcount
        for p in range(1, k):
            layer = masks[popcount == p]
            # arrive[s, j] = cheapest extension of a path over layer[s] to j
            arrive = (best[layer][:, :, None] + inner[None, :, :]).min(axis=1)
            for j in range(k):
                free = ((layer >> j) & 1) == 0
                best[layer[free] | (1 << j), j] = arrive[free, j]
        self.best = best
        self.full = size - 1

    def optimum(self) -> int:
        return int((self.best[self.full] + self.cost[1:, 0]).min())

    def path(self, mask: int, j: int) -> list[int]:
        """Vertices of a cheapest anchor->j path over ``mask`` (anchor first)."""
        best, inner = self.best, self.cost[1:, 1:]
        out = [j]
        while mask != 1 << j:
            prev = mask ^ (1 << j)
            target = best[mask, j]
            for i in range(self.k):
                if prev >> i & 1 and best[prev, i] + inner[i, j] == target:
                    break
            else:  # pragma: no cover - table is self-consistent
                raise AssertionError("broken Held-Karp table")
            mask, j = prev, i
            out.append(j)
        return [self.verts[0]] + [self.verts[i + 1] for i in reversed(out)]

    def through_edge(self) -> np.ndarray:
        """``through[a, b]`` = cheapest tour containing edge (a, b), indexed
        by position in ``verts``."""
        k, full, best, cm = self.k, self.full, self.best, self.cost
        m = k + 1
        through = np.full((m, m), _INF, dtype=np.int64)
        closing = best[full] + cm[1:, 0]
        through[0, 1:] = closing
        through[1:, 0] = closing
        if k >= 2:
            masks = np.arange(full + 1)
            left = best.astype(np.int64)
            right = best[full ^ masks].astype(np.int64)
            split = (left[:, :, None] + right[:, None, :]).min(axis=0)
            through[1:, 1:] = split + cm[1:, 1:]
            np.fill_diagonal(through, _INF)
        return through

    def tour_through(self, a: int, b: int) -> Tour:
        """A cheapest tour containing the edge between positions a < b."""
        if a == 0:
            return canonicalize(self.path(self.full, b - 1))
        ia, ib = a - 1, b - 1
        best, full = self.best, self.full
        masks = np.arange(full + 1)
        totals = best[:, ia].astype(np.int64) + best[full ^ masks, ib]
        mask = int(np.argmin(totals))
        left = self.path(mask, ia)
        right = self.path(full ^ mask, ib)
        return canonicalize(left + right[:0:-1])


def held_karp(c: CostFn, subset: Iterable[int]) -> int:
    """Exact minimum tour cost over ``subset``."""
    verts = _check_subset(c, subset, 3, HELD_KARP_CAP)
    return _PathTable(c, verts).optimum()


def exact_optimizing_edges(c: CostFn, subset: Iterable[int]) -> OptimizingEdgeSet:
    """Exact optimizing-edge set of the sub-problem on ``subset``.

    Uses the Held-Karp table: an edge lies on a tour of cost exactly X iff
    the cheapest tour through it costs X, for every X the definitions ask
    about (the optimum, or the edge's own cost in the zero regime).
    """
    verts = _check_subset(c, subset, 4, ENUMERATION_CAP)
    table = _PathTable(c, verts)
    optimum = table.optimum()
    regime = regime_for(optimum)
    through = table.through_edge()
    cm = table.cost
    witnesses = {}
    for a, b in itertools.combinations(range(len(verts)), 2):
        ce = int(cm[a, b])
        target = optimum if regime is Regime.POSITIVE else ce
        if regime is Regime.POSITIVE and ce == 0:
            continue
        if through[a, b] == target:
            witnesses[(verts[a], verts[b])] = table.tour_through(a, b)
    return OptimizingEdgeSet(regime, frozenset(verts), optimum, witnesses)


# -- Enumeration ----------------------------------------------------------


def all_tours(subset: Iterable[int]) -> Iterator[Tour]:
    """Every canonical tour over ``subset``, (m-1)!/2 of them."""
    verts = sorted(set(subset))
    first, rest = verts[0], verts[1:]
    for perm in itertools.permutations(rest):
        if perm[0] < perm[-1]:
            yield (first,) + perm


def enumerate_optimal_tours(c: CostFn, subset: Iterable[int]) -> tuple[int, set[Tour]]:
    """Optimum and every canonical optimal tour, by depth-first search with
    cost pruning against the incumbent."""
    verts = _check_subset(c, subset, 3, ENUMERATION_CAP)
    anchor = verts[0]
    adj = c.graph.adj
    best = len(verts) + 1
    found: set[Tour] = set()
    path = [anchor]
    remaining = set(verts[1:])

    def dfs(last: int, cost: int):
        nonlocal best, found
        if not remaining:
            if path[1] > path[-1]:
                return
            total = cost + (0 if adj[last] >> anchor & 1 else 1)
            if total < best:
                best, found = total, set()
            if total == best:
                found.add(tuple(path))
            return
        for v in sorted(remaining):
            step = cost + (0 if adj[last] >> v & 1 else 1)
            if step > best:
                continue
            remaining.discard(v)
            path.append(v)
            dfs(v, step)
            path.pop()
            remaining.add(v)

    dfs(anchor, 0)
    return best, found


def exact_optimizing_edges_by_enumeration(c: CostFn, subset: Iterable[int]) -> OptimizingEdgeSet:
    """Same contract as :func:`exact_optimizing_edges`, computed by scanning
    every tour. Witness = first qualifying tour in enumeration order."""
    verts = _check_subset(c, subset, 4, ENUMERATION_CAP)
    costed = [(t, tour_cost(c, t)) for t in all_tours(verts)]
    optimum = min(cost for _, cost in costed)
    regime = regime_for(optimum)
    witnesses: dict[Edge, Tour] = {}
    for t, cost in costed:
        for e in sorted(tour_edges(t)):
            if e in witnesses:
                continue
            ce = c(*e)
            if regime is Regime.POSITIVE:
                keep = ce == 1 and cost == optimum
            else:
                keep = cost == ce
            if keep:
                witnesses[e] = t
    return OptimizingEdgeSet(regime, frozenset(verts), optimum, witnesses)


# -- Optimizing-vertex graph ----------------------------------------------


@dataclass(frozen=True)
class OptGraph:
    vertices: frozenset[int]
    links: frozenset[Edge]


def opt_graph(es: OptimizingEdgeSet) -> OptGraph:
    links = es.edges
    return OptGraph(frozenset(v for e in links for v in e), links)


def is_connected(og: OptGraph) -> bool:
    """Empty graphs count as connected."""
    if not og.vertices:
        return True
    parent = {v: v for v in og.vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for u, v in og.links:
        parent[find(u)] = find(v)
    return len({find(v) for v in og.vertices}) == 1


def quad_optimum(c: CostFn, quad: Iterable[int]) -> int:
    return min(tour_cost(c, t) for t in all_tours(quad))


__all__ = [
    "CapacityError",
    "ENUMERATION_CAP",
    "HELD_KARP_CAP",
    "OptGraph",
    "OptimizingEdgeSet",
    "Regime",
    "all_tours",
    "count_hamiltonian_cycles",
    "edge",
    "enumerate_optimal_tours",
    "exact_optimizing_edges",
    "exact_optimizing_edges_by_enumeration",
    "find_hamiltonian_cycle",
    "hc_exists",
    "held_karp",
    "is_connected",
    "opt_graph",
    "quad_optimum",
    "regime_for",
]
