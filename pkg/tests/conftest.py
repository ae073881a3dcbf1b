from functools import lru_cache

import networkx as nx
import pytest
from hypothesis import strategies as st

from invring.gposet import build_gposet
from invring.graph_core import Graph


@lru_cache(maxsize=None)
def poset(n, d=None):
    return build_gposet(n, d)


@pytest.fixture(scope="session")
def E4():
    return poset(4)


@pytest.fixture(scope="session")
def E5():
    return poset(5)


@pytest.fixture(scope="session")
def E6():
    return poset(6)


def to_nx(g: Graph, n=None) -> nx.Graph:
    h = nx.Graph()
    if n is not None:
        h.add_nodes_from(range(n))
    h.add_edges_from(g.edges)
    return h


@st.composite
def graphs(draw, max_vertices=6, min_vertices=0):
    """Random labelled simple graph on vertices 0..n-1 (isolated ones dropped)."""
    n = draw(st.integers(min_vertices, max_vertices))
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph(e for e, keep in zip(pairs, mask) if keep)


@st.composite
def permuted(draw, g: Graph, n: int):
    perm = draw(st.permutations(list(range(n))))
    return g.relabel(dict(enumerate(perm)))


# ---------------------------------------------------------------------------
# one summary line per acceptance criterion

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number): acceptance criterion checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    num = mark.args[0]
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        state = "PASS" if rep.passed else "SKIP" if rep.skipped else "FAIL"
        prev = _criteria.get(num)
        if prev is None or state == "FAIL" or prev == "SKIP":
            _criteria[num] = state
        secs = getattr(rep, "duration", 0.0)
        _criteria.setdefault(("time", num), 0.0)
        _criteria[("time", num)] += secs


def pytest_deselected(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            why = "extended, use -m extended" if item.get_closest_marker("extended") else "deselected"
            _criteria.setdefault(mark.args[0], f"NOT RUN ({why})")


def pytest_terminal_summary(terminalreporter):
    nums = sorted(k for k in _criteria if isinstance(k, int))
    if not nums:
        return
    terminalreporter.section("acceptance criteria")
    for num in nums:
        secs = _criteria.get(("time", num), 0.0)
        terminalreporter.write_line(f"criterion {num:2d}: {_criteria[num]} ({secs:.1f} s)")
