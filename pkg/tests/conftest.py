import numpy as np
import pytest
import scipy.sparse as sp

from muxopinion import MultiplexNetwork, ModelParams, build_network, effective_matrix
from muxopinion.toynet import BarrelSpec, barrel_params, build_barrel

# Two nodes, one layer: b imitates a with probability 0.5; all alpha 1, R = 2.
W_EDGES = [("a", "b", "L1", 0.5)]


@pytest.fixture
def net_w():
    return build_network(W_EDGES, normalize="strict")


@pytest.fixture
def eff_w(net_w):
    return effective_matrix(net_w, ModelParams.uniform(net_w, 1.0, budget=2.0))


@pytest.fixture
def barrel4():
    spec = BarrelSpec(4, 1, 0.1, 0.2, 0.3)
    net = build_barrel(spec)
    return spec, net, effective_matrix(net, barrel_params(spec, 1.0, 1.0))


def edgeless(n, n_layers=1):
    z = sp.csr_matrix((n, n))
    return MultiplexNetwork(tuple(f"n{i}" for i in range(n)),
                            tuple(f"L{c}" for c in range(n_layers)),
                            tuple(z for _ in range(n_layers)), "strict")


def random_strict(rng, n, n_layers, density=0.3):
    """Random network whose per-node-layer imitation sums are at most 1."""
    mats = []
    for _ in range(n_layers):
        m = rng.random((n, n)) * (rng.random((n, n)) < density)
        np.fill_diagonal(m, 0.0)
        col = m.sum(axis=0)
        # column j holds what node j imitates; scale into [0, 1]
        scale = rng.uniform(0.2, 1.0, n)
        m = m * np.where(col > 0, scale / np.where(col > 0, col, 1.0), 0.0)
        mats.append(sp.csr_matrix(m))
    return MultiplexNetwork(tuple(str(i) for i in range(n)),
                            tuple(f"L{c}" for c in range(n_layers)), tuple(mats), "strict")


# one PASS/FAIL line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES = {}


@pytest.fixture
def criterion():
    def record(number, title, ok, detail=""):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
