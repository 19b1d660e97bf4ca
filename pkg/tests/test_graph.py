import pytest
from hypothesis import given
from hypothesis import strategies as st

from hamgrow.graph import (
    Graph,
    GraphParseError,
    InvalidInput,
    canonicalize,
    complete_graph,
    cycle_graph,
    empty_graph,
    parse_graph,
    path_graph,
    reduce_to_tsp,
    serialize_graph,
    splice,
    tour_cost,
    tour_edges,
)

from .conftest import graphs, tours


def test_reduce_complete_is_all_zero():
    c = reduce_to_tsp(complete_graph(4))
    assert all(c(u, v) == 0 for u in range(4) for v in range(4) if u != v)


def test_reduce_empty_is_all_one():
    c = reduce_to_tsp(empty_graph(4))
    assert all(c(u, v) == 1 for u in range(4) for v in range(4) if u != v)


def test_reduce_path():
    c = reduce_to_tsp(path_graph(4))
    assert (c(0, 1), c(1, 2), c(2, 3)) == (0, 0, 0)
    assert (c(0, 2), c(0, 3), c(1, 3)) == (1, 1, 1)
    assert c(3, 2) == c(2, 3)


def test_tour_cost_examples():
    assert tour_cost(reduce_to_tsp(complete_graph(4)), (2, 0, 3, 1)) == 0
    c = reduce_to_tsp(path_graph(4))
    # only the closing pair (3, 0) is missing from the graph
    assert tour_cost(c, (0, 1, 2, 3)) == 1
    # (0,2), (1,3) and (3,0) are missing
    assert tour_cost(c, (0, 2, 1, 3)) == 3


def test_tour_cost_rejects_short_tours():
    with pytest.raises(InvalidInput):
        tour_cost(reduce_to_tsp(complete_graph(4)), (0, 1))


@pytest.mark.parametrize(
    "raw, expected",
    [((2, 3, 0, 1), (0, 1, 2, 3)), ((0, 3, 2, 1), (0, 1, 2, 3)), ((0, 1, 2, 3), (0, 1, 2, 3)), ((3, 1, 0, 2), (0, 1, 3, 2))],
)
def test_canonicalize(raw, expected):
    assert canonicalize(raw) == expected


def test_tour_edges_examples():
    assert tour_edges((0, 1, 2, 3)) == {(0, 1), (1, 2), (2, 3), (0, 3)}
    assert tour_edges((0, 2, 1, 3)) == {(0, 2), (1, 2), (1, 3), (0, 3)}


def test_splice():
    assert splice((0, 1, 2, 3), 3, 0, 4) == (0, 1, 2, 3, 4)
    assert splice((0, 1, 2, 3), 2, 1, 9) == (0, 1, 9, 2, 3)
    with pytest.raises(InvalidInput):
        splice((0, 1, 2, 3), 0, 2, 4)


def test_graph_rejects_bad_edges():
    with pytest.raises(InvalidInput):
        Graph(3, frozenset({(1, 0)}))
    with pytest.raises(InvalidInput):
        Graph(3, frozenset({(0, 3)}))
    with pytest.raises(InvalidInput):
        Graph.from_edges(3, [(1, 1)])


@given(tours(), st.integers(0, 50), st.booleans())
def test_canonical_form_is_rotation_reflection_invariant(t, shift, flip):
    k = shift % len(t)
    moved = t[k:] + t[:k]
    if flip:
        moved = moved[::-1]
    assert canonicalize(moved) == canonicalize(t)
    assert tour_edges(moved) == tour_edges(t)
    assert canonicalize(canonicalize(t)) == canonicalize(t)
    first = canonicalize(t)
    assert first[0] == min(t) and first[1] < first[-1]


@given(graphs(min_n=4, max_n=10), st.data())
def test_cost_properties(g, data):
    c = reduce_to_tsp(g)
    t = tuple(data.draw(st.permutations(range(g.n))))
    cost = tour_cost(c, t)
    assert cost == tour_cost(c, canonicalize(t))
    assert cost == sum(c(*e) for e in tour_edges(t))
    assert len(tour_edges(t)) == g.n
    assert 0 <= cost <= g.n
    assert (cost == 0) == all(e in g.edges for e in tour_edges(t))


@given(graphs(min_n=1, max_n=9))
def test_zero_cost_pairs_match_edges(g):
    c = reduce_to_tsp(g)
    zeros = sum(1 for u in range(g.n) for v in range(u + 1, g.n) if c(u, v) == 0)
    assert zeros == len(g.edges)


@given(graphs(min_n=1, max_n=9))
def test_serialize_round_trip(g):
    assert parse_graph(serialize_graph(g)) == g


def test_parse_examples():
    assert parse_graph("4 3\n0 1\n1 2\n2 3\n") == path_graph(4)
    assert parse_graph("3 3\n0 1\n0 2\n1 2\n") == complete_graph(3)
    assert parse_graph("# triangle\n3 3\n0 1\n# mid\n2 1\n0 2\n") == cycle_graph(3)


@pytest.mark.parametrize(
    "text, lineno",
    [
        ("2 1\n0 0\n", 2),  # self-loop
        ("3 2\n0 1\n1 0\n", 3),  # duplicate after canonicalization
        ("3 1\n0 3\n", 2),  # out of range
        ("3\n", 1),  # malformed header
        ("3 1\n0 1 \n", 2),  # trailing whitespace
        ("3 2\n0 1\n", 1),  # count mismatch reported against the header
        ("", 1),
    ],
)
def test_parse_errors_name_the_line(text, lineno):
    with pytest.raises(GraphParseError) as err:
        parse_graph(text)
    assert err.value.lineno == lineno
    assert f"line {lineno}" in str(err.value)


def test_serialize_format():
    assert serialize_graph(path_graph(4)) == "4 3\n0 1\n1 2\n2 3\n"
