import warnings

import numpy as np
import pytest

from disruptcite.graph import build_graph
from disruptcite.testkit import G1_IDS, g1_edges, g1_metas

warnings.filterwarnings("ignore", message=".*TBB.*")


@pytest.fixture
def g1():
    return build_graph(g1_edges(), g1_metas())


@pytest.fixture
def g1_node(g1):
    """Dense id of a G1 node by name."""
    return lambda name: g1.dense_id(G1_IDS[name])


def random_edges(rng, n, m):
    return [(int(a), int(b)) for a, b in rng.integers(0, n, size=(m, 2))]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(RESULTS):
        ok, text = RESULTS[num]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {num}: {text}")
