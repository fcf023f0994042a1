import networkx as nx
import pytest

from planarspec.generators import tessellation_ball


def to_nx(g):
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges())
    return h


@pytest.fixture(scope="session")
def ball375():
    return tessellation_ball(3, 7, 5)


@pytest.fixture(scope="session")
def ball374():
    return tessellation_ball(3, 7, 4)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
