"""Graphs, 0/1 cost functions, tours and the plain-text graph format."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

Edge = tuple[int, int]
Tour = tuple[int, ...]


class InvalidInput(ValueError):
    pass


class GraphParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def edge(u: int, v: int) -> Edge:
    if u == v:
        raise InvalidInput(f"self-loop ({u}, {v})")
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``0..n-1``.

    Adjacency is kept as one integer bitset per vertex so that edge tests
    are O(1) and the edge set stays the single source of truth.
    """

    n: int
    edges: frozenset[Edge]
    adj: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInput("graph needs at least one vertex")
        adj = [0] * self.n
        for u, v in self.edges:
            if not u < v:
                raise InvalidInput(f"edge ({u}, {v}) is not canonical")
            if u < 0 or v >= self.n:
                raise InvalidInput(f"edge ({u}, {v}) out of range for n={self.n}")
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        object.__setattr__(self, "adj", tuple(adj))

    @classmethod
    def from_edges(cls, n: int, pairs: Iterable[Sequence[int]]) -> "Graph":
        return cls(n, frozenset(edge(u, v) for u, v in pairs))

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    def degree(self, v: int) -> int:
        return self.adj[v].bit_count()

    def neighbors(self, v: int) -> list[int]:
        bits, out = self.adj[v], []
        while bits:
            low = bits & -bits
            out.append(low.bit_length() - 1)
            bits ^= low
        return out

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def is_connected(self) -> bool:
        seen, frontier = 1, 1
        while frontier:
            nxt = 0
            bits = frontier
            while bits:
                low = bits & -bits
                nxt |= self.adj[low.bit_length() - 1]
                bits ^= low
            frontier = nxt & ~seen
            seen |= nxt
        return seen == (1 << self.n) - 1


class CostFn:
    """Symmetric 0/1 cost on vertex pairs: 0 for graph edges, 1 otherwise."""

    __slots__ = ("graph", "n")

    def __init__(self, graph: Graph):
        self.graph = graph
        self.n = graph.n

    def __call__(self, u: int, v: int) -> int:
        if u == v:
            raise InvalidInput(f"cost undefined for ({u}, {u})")
        return 0 if self.graph.adj[u] >> v & 1 else 1

    def __eq__(self, other):
        return isinstance(other, CostFn) and other.graph == self.graph

    def __hash__(self):
        return hash(self.graph)

    def matrix(self, vertices: Sequence[int]) -> list[list[int]]:
        adj = self.graph.adj
        return [[0 if (i == j or adj[i] >> j & 1) else 1 for j in vertices] for i in vertices]


def reduce_to_tsp(g: Graph) -> CostFn:
    return CostFn(g)


def check_tour(t: Sequence[int]) -> None:
    if len(t) < 3:
        raise InvalidInput(f"tour needs at least 3 vertices, got {len(t)}")
    if len(set(t)) != len(t):
        raise InvalidInput(f"tour repeats a vertex: {tuple(t)}")


def tour_cost(c: CostFn, t: Sequence[int]) -> int:
    check_tour(t)
    adj = c.graph.adj
    prev = t[-1]
    total = 0
    for v in t:
        if not adj[prev] >> v & 1:
            total += 1
        prev = v
    return total


def canonicalize(t: Sequence[int]) -> Tour:
    """Rotate the smallest vertex to the front and pick the direction whose
    second element is smaller."""
    m = len(t)
    i = min(range(m), key=t.__getitem__)
    fwd = t[(i + 1) % m]
    bwd = t[i - 1]
    if fwd <= bwd:
        return tuple(t[i:]) + tuple(t[:i])
    return tuple(t[(i - k) % m] for k in range(m))


def tour_edges(t: Sequence[int]) -> frozenset[Edge]:
    prev = t[-1]
    out = set()
    for v in t:
        out.add((prev, v) if prev < v else (v, prev))
        prev = v
    return frozenset(out)


def splice(t: Sequence[int], a: int, b: int, v: int) -> Tour:
    """Insert ``v`` between the tour-adjacent vertices ``a`` and ``b``."""
    m = len(t)
    i = t.index(a)
    if t[(i + 1) % m] == b:
        return tuple(t[: i + 1]) + (v,) + tuple(t[i + 1 :])
    if t[i - 1] == b:
        return tuple(t[:i]) + (v,) + tuple(t[i:])
    raise InvalidInput(f"({a}, {b}) is not an edge of tour {tuple(t)}")


def parse_graph(text: str) -> Graph:
    header = None
    pairs: list[Edge] = []
    seen: set[Edge] = set()
    n = m = 0
    for lineno, raw in enumerate(text.split("\n"), start=1):
        if raw.startswith("#") or raw == "":
            continue
        parts = raw.split(" ")
        if header is None:
            if len(parts) != 2 or not all(p.isdigit() for p in parts):
                raise GraphParseError(lineno, f"malformed header {raw!r}")
            n, m = int(parts[0]), int(parts[1])
            if n < 1:
                raise GraphParseError(lineno, "vertex count must be at least 1")
            header = lineno
            continue
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise GraphParseError(lineno, f"malformed edge line {raw!r}")
        u, v = int(parts[0]), int(parts[1])
        if u >= n or v >= n:
            raise GraphParseError(lineno, f"vertex out of range in {raw!r} (n={n})")
        if u == v:
            raise GraphParseError(lineno, f"self-loop {raw!r}")
        e = edge(u, v)
        if e in seen:
            raise GraphParseError(lineno, f"duplicate edge {raw!r}")
        seen.add(e)
        pairs.append(e)
        if len(pairs) > m:
            raise GraphParseError(lineno, f"more than the {m} edges declared")
    if header is None:
        raise GraphParseError(1, "missing header")
    if len(pairs) != m:
        raise GraphParseError(header, f"header declares {m} edges, found {len(pairs)}")
    return Graph(n, frozenset(pairs))


def serialize_graph(g: Graph) -> str:
    lines = [f"{g.n} {len(g.edges)}"]
    lines.extend(f"{u} {v}" for u, v in g.sorted_edges())
    return "\n".join(lines) + "\n"


# Named families used by tests, the CLI and the harness.

def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, ((i, i + 1) for i in range(n - 1)))


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, ((i, (i + 1) % n) for i in range(n)))


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, ((i, j) for i in range(n) for j in range(i + 1, n)))


def star_graph(n: int) -> Graph:
    """Center 0 joined to leaves ``1..n-1``."""
    return Graph.from_edges(n, ((0, i) for i in range(1, n)))


def empty_graph(n: int) -> Graph:
    return Graph(n, frozenset())


def complete_bipartite(a: int, b: int) -> Graph:
    return Graph.from_edges(a + b, ((i, a + j) for i in range(a) for j in range(b)))


def petersen_graph() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    return Graph.from_edges(10, outer + inner + spokes)
