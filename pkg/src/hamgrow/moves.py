"""k-opt move generators and the OER / MOER closures built on them."""

from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterator

from .graph import CostFn, Edge, InvalidInput, Tour, canonicalize, tour_cost, tour_edges
from .oracle import OptimizingEdgeSet, Regime

DEFAULT_MAX_TOURS = 10**6


class InvariantViolation(RuntimeError):
    """An internal guarantee failed; callers treat this as fatal."""


class MoveKind(enum.Enum):
    TWO_OPT = "2-opt"
    THREE_OPT = "3-opt"
    DOUBLE_BRIDGE = "double-bridge"


@dataclass(frozen=True)
class Move:
    kind: MoveKind
    out_edges: frozenset[Edge]
    in_edges: frozenset[Edge]
    result: Tour

    def delta(self, c: CostFn) -> int:
        return sum(c(*e) for e in self.in_edges) - sum(c(*e) for e in self.out_edges)


def _pair(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


def _scan(t: Tour, kinds: tuple[MoveKind, ...], c: CostFn | None = None, deltas=None) -> Iterator[Move]:
    """Shared enumeration. With ``c`` and ``deltas`` given, the delta is
    computed from the exchanged endpoints and only matching moves are
    materialized.

    Unordered pairs are compared as two-bit masks.
    """
    m = len(t)
    filtered = deltas is not None
    if filtered:
        adj = c.graph.adj
        cost = [[0 if adj[u] >> v & 1 else 1 for v in range(c.n)] for u in range(c.n)]
    bit = {v: 1 << v for v in t}

    def build(kind, outs, ins, after) -> Move:
        return Move(kind, frozenset(_pair(u, v) for u, v in outs), frozenset(_pair(u, v) for u, v in ins),
                    canonicalize(after))

    if MoveKind.TWO_OPT in kinds and m >= 4:
        for i in range(m - 1):
            a, b = t[i], t[i + 1]
            for j in range(i + 2, m):
                if i == 0 and j == m - 1:
                    continue
                x, y = t[j], t[(j + 1) % m]
                if filtered and cost[a][x] + cost[b][y] - cost[a][b] - cost[x][y] not in deltas:
                    continue
                yield build(MoveKind.TWO_OPT, ((a, b), (x, y)), ((a, x), (b, y)),
                            t[: i + 1] + t[i + 1 : j + 1][::-1] + t[j + 1 :])

    if MoveKind.THREE_OPT in kinds and m >= 5:
        seen: set[Tour] = set()
        for i, j, k in itertools.combinations(range(m), 3):
            a1, b0, b1, c0, c1, a0 = t[i], t[i + 1], t[j], t[j + 1], t[k], t[(k + 1) % m]
            removed = (bit[a1] | bit[b0], bit[b1] | bit[c0], bit[c1] | bit[a0])
            out_cost = cost[a1][b0] + cost[b1][c0] + cost[c1][a0] if filtered else 0
            for swap in (False, True):
                for rf in (False, True):
                    for rs in (False, True):
                        if not swap and not rf and not rs:
                            continue
                        f0, f1 = (c0, c1) if swap else (b0, b1)
                        s0, s1 = (b0, b1) if swap else (c0, c1)
                        if rf:
                            f0, f1 = f1, f0
                        if rs:
                            s0, s1 = s1, s0
                        # exactly three edges change iff no added pair is a removed one
                        if (bit[a1] | bit[f0]) in removed or (bit[f1] | bit[s0]) in removed or (
                            bit[s1] | bit[a0]
                        ) in removed:
                            continue
                        if filtered and cost[a1][f0] + cost[f1][s0] + cost[s1][a0] - out_cost not in deltas:
                            continue
                        first = t[j + 1 : k + 1] if swap else t[i + 1 : j + 1]
                        second = t[i + 1 : j + 1] if swap else t[j + 1 : k + 1]
                        after = t[: i + 1] + (first[::-1] if rf else first) + (second[::-1] if rs else second) + t[k + 1 :]
                        key = canonicalize(after)
                        if key in seen:
                            continue
                        seen.add(key)
                        yield build(MoveKind.THREE_OPT, ((a1, b0), (b1, c0), (c1, a0)),
                                    ((a1, f0), (f1, s0), (s1, a0)), key)

    if MoveKind.DOUBLE_BRIDGE in kinds and m >= 4:
        for a, b, cc, d in itertools.combinations(range(m), 4):
            p1, q1, p2, q2, p3, q3, p4, q4 = t[a], t[a + 1], t[b], t[b + 1], t[cc], t[cc + 1], t[d], t[(d + 1) % m]
            removed = (bit[p1] | bit[q1], bit[p2] | bit[q2], bit[p3] | bit[q3], bit[p4] | bit[q4])
            if (bit[p1] | bit[q3]) in removed or (bit[p4] | bit[q2]) in removed or (
                bit[p3] | bit[q1]
            ) in removed or (bit[p2] | bit[q4]) in removed:
                continue
            if filtered and (
                cost[p1][q3] + cost[p4][q2] + cost[p3][q1] + cost[p2][q4]
                - cost[p1][q1] - cost[p2][q2] - cost[p3][q3] - cost[p4][q4]
            ) not in deltas:
                continue
            # S1 wraps from d+1 to a; result S1 S4 S3 S2
            after = t[d + 1 :] + t[: a + 1] + t[cc + 1 : d + 1] + t[b + 1 : cc + 1] + t[a + 1 : b + 1]
            yield build(MoveKind.DOUBLE_BRIDGE, ((p1, q1), (p2, q2), (p3, q3), (p4, q4)),
                        ((p1, q3), (p4, q2), (p3, q1), (p2, q4)), after)


def two_opt_moves(t: Tour) -> Iterator[Move]:
    """Every removal of two non-adjacent tour edges, reconnected by reversing
    the segment between them: m(m-3)/2 moves."""
    return _scan(tuple(t), (MoveKind.TWO_OPT,))


def three_opt_moves(t: Tour) -> Iterator[Move]:
    """Pure 3-exchanges: reconnections that change exactly three edges.

    Removing edges i < j < k leaves segments A (wrapping), B and C; every
    reordering/reversal of B and C is tried and kept when none of the new
    edges is one of the removed ones. One move per resulting tour.
    """
    return _scan(tuple(t), (MoveKind.THREE_OPT,))


def double_bridge_moves(t: Tour) -> Iterator[Move]:
    """For each choice of four cut edges, reconnect the segments S1 S2 S3 S4
    as S1 S4 S3 S2, orientations kept. Cut sets whose reconnection would
    re-add a removed edge (possible with singleton segments) are dropped."""
    return _scan(tuple(t), (MoveKind.DOUBLE_BRIDGE,))


_ALL_KINDS = (MoveKind.TWO_OPT, MoveKind.THREE_OPT, MoveKind.DOUBLE_BRIDGE)


def all_moves(t: Tour) -> Iterator[Move]:
    return _scan(tuple(t), _ALL_KINDS)


def moves_with_delta(c: CostFn, t: Tour, deltas) -> Iterator[Move]:
    """All moves of ``t`` whose cost delta under ``c`` lies in ``deltas``."""
    return _scan(tuple(t), _ALL_KINDS, c, frozenset(deltas))


# -- Closures -------------------------------------------------------------


@dataclass
class ClosureResult:
    edge_set: OptimizingEdgeSet
    moves_examined: int
    tours_discovered: int
    complete: bool  # False when the tour budget ran out before the fixpoint


class _Recorder:
    def __init__(self, c: CostFn):
        self.c = c
        self.witnesses: dict[Edge, Tour] = {}
        self.queue: deque[Tour] = deque()
        self.queued: set[Tour] = set()

    def offer(self, t: Tour, edges) -> bool:
        """Record any unseen edges with ``t`` as witness; queue ``t`` if it
        contributed."""
        fresh = [e for e in sorted(edges) if e not in self.witnesses]
        for e in fresh:
            self.witnesses[e] = t
        if fresh and t not in self.queued:
            self.queued.add(t)
            self.queue.append(t)
        return bool(fresh)


def _validated(es: OptimizingEdgeSet, c: CostFn) -> OptimizingEdgeSet:
    bad = es.invalid_witnesses(c)
    if bad:
        raise InvariantViolation(f"closure emitted edges with invalid witnesses: {bad}")
    return es


def oer_closure(
    c: CostFn,
    seed: Tour,
    seed_set: OptimizingEdgeSet | None = None,
    max_tours: int = DEFAULT_MAX_TOURS,
) -> ClosureResult:
    """Grow the positive-regime optimizing-edge set reachable from ``seed``
    by cost-preserving 2-opt, 3-opt and double-bridge moves.

    Only tours that contribute a new cost-1 edge are expanded (FIFO), so the
    work list is bounded by the number of candidate edges.
    """
    seed = canonicalize(seed)
    cost = tour_cost(c, seed)
    optimum = seed_set.optimum if seed_set is not None else cost
    if cost != optimum:
        raise InvariantViolation(f"seed tour costs {cost}, stated optimum is {optimum}")
    if optimum < 1:
        raise InvalidInput("OER needs a positive optimum; use moer_closure")
    rec = _Recorder(c)
    if seed_set is not None:
        for e, w in sorted(seed_set.witnesses.items()):
            rec.offer(w, [e])
    rec.offer(seed, [e for e in tour_edges(seed) if c(*e) == 1])
    moves = expanded = 0
    complete = True
    while rec.queue:
        if expanded >= max_tours:
            complete = False
            break
        t = rec.queue.popleft()
        expanded += 1
        for mv in moves_with_delta(c, t, (0,)):
            moves += 1
            rec.offer(mv.result, [e for e in tour_edges(mv.result) if c(*e) == 1])
    es = OptimizingEdgeSet(Regime.POSITIVE, frozenset(seed), optimum, dict(sorted(rec.witnesses.items())))
    return ClosureResult(_validated(es, c), moves, len(rec.queued), complete)


def moer_closure(c: CostFn, seed: Tour, max_tours: int = DEFAULT_MAX_TOURS) -> ClosureResult:
    """Zero-regime closure over two pools: cost-0 tours and cost-1 tours.

    From cost-0 tours: delta-0 moves (zero-OER) and delta+1 moves
    (add-one-OER). From cost-1 tours: delta-1 moves (minus-one-OER) and
    delta-0 moves (plain OER). A cost-0 tour contributes all its edges, a
    cost-1 tour its single cost-1 edge.
    """
    seed = canonicalize(seed)
    if tour_cost(c, seed) != 0:
        raise InvariantViolation(f"MOER seed must cost 0, got {tour_cost(c, seed)}")
    rec = _Recorder(c)
    rec.offer(seed, tour_edges(seed))
    moves = expanded = 0
    complete = True
    while rec.queue:
        if expanded >= max_tours:
            complete = False
            break
        t = rec.queue.popleft()
        expanded += 1
        level = tour_cost(c, t)
        steps = (0, 1) if level == 0 else (-1, 0)
        for mv in moves_with_delta(c, t, steps):
            moves += 1
            new_level = level + mv.delta(c)
            if level == 0 and new_level == 0:
                rec.offer(mv.result, tour_edges(mv.result))
            elif level == 0 and new_level == 1:
                rec.offer(mv.result, [e for e in mv.in_edges if c(*e) == 1])
            elif level == 1 and new_level == 0:
                rec.offer(mv.result, tour_edges(mv.result))
            elif level == 1 and new_level == 1:
                rec.offer(mv.result, [e for e in mv.in_edges if c(*e) == 1])
    es = OptimizingEdgeSet(Regime.ZERO, frozenset(seed), 0, dict(sorted(rec.witnesses.items())))
    return ClosureResult(_validated(es, c), moves, len(rec.queued), complete)
