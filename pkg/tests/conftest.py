import networkx as nx
import numpy as np
import pytest

from gifw.graph import Graph


def from_nx(g: nx.Graph) -> Graph:
    g = nx.convert_node_labels_to_integers(g)
    return Graph.from_edges(g.number_of_nodes(), g.edges())


@pytest.fixture
def petersen():
    return from_nx(nx.petersen_graph())


@pytest.fixture
def k3():
    return from_nx(nx.complete_graph(3))


@pytest.fixture
def c6():
    return from_nx(nx.cycle_graph(6))


@pytest.fixture
def two_triangles():
    return from_nx(nx.disjoint_union(nx.complete_graph(3), nx.complete_graph(3)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one PASS/FAIL line per acceptance criterion at the end of the run

_criteria: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    prev = _criteria.get(number, (title, "PASS"))[1]
    if rep.failed or (rep.when == "call" and rep.skipped):
        prev = "FAIL"
    _criteria[number] = (title, prev)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, verdict = _criteria[number]
        terminalreporter.write_line(f"criterion {number:2d}: {verdict}  {title}")
