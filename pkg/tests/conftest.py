import numpy as np
import pytest

from gcnet.graphs import DirectedGraph
from gcnet.varsim import VarModel


@pytest.fixture
def diamond_model():
    """Four-node system whose two length-2 paths from node 1 cancel."""
    g = DirectedGraph(4, frozenset({(1, 2), (1, 3), (2, 4), (3, 4)}))
    B = np.zeros((4, 4, 1))
    a = 0.5
    B[1, 0, 0] = a
    B[2, 0, 0] = -a
    B[3, 1, 0] = 1.0
    B[3, 2, 0] = 1.0
    return VarModel(B, np.ones(4), g)


@pytest.fixture
def lag_cancel_model():
    """Three-node system where differing lags cancel the 1 -> 3 influence."""
    g = DirectedGraph(3, frozenset({(1, 2), (2, 3), (1, 3)}))
    B = np.zeros((3, 3, 2))
    a = 0.5
    B[1, 0, 0] = -a
    B[2, 1, 0] = 1.0
    B[2, 0, 1] = a
    return VarModel(B, np.ones(3), g)


def fork_model(root_memory=0.0):
    """Fork 2 <- 1 -> 3; optionally give the root an AR term."""
    g = DirectedGraph(3, frozenset({(1, 2), (1, 3)}))
    B = np.zeros((3, 3, 1))
    B[1, 0, 0] = 0.5
    B[2, 0, 0] = 0.5
    B[0, 0, 0] = root_memory
    return VarModel(B, np.ones(3), g)


FIG_EDGES = frozenset({(1, 3), (3, 4), (2, 4), (3, 5), (4, 6)})


def fig_graph():
    return DirectedGraph(6, FIG_EDGES)
