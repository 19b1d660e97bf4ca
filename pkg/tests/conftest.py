import itertools

import pytest
from hypothesis import strategies as st

from hamgrow.graph import Graph


@st.composite
def graphs(draw, min_n=4, max_n=8):
    n = draw(st.integers(min_n, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph(n, frozenset(p for p, keep in zip(pairs, mask) if keep))


@st.composite
def tours(draw, min_m=4, max_m=12):
    m = draw(st.integers(min_m, max_m))
    return tuple(draw(st.permutations(range(m))))


@pytest.fixture
def c5():
    from hamgrow.graph import cycle_graph

    return cycle_graph(5)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
