import numpy as np
import pytest

from app.config import ToleranceConfig
from app.families import ProjectionFamily, RowContraction
from app.graph import DirectedGraph
from app.tuples import OperatorTuple

from generators import unit


@pytest.fixture
def tol():
    return ToleranceConfig()


@pytest.fixture
def swap():
    return OperatorTuple((np.array([[0, 1], [1, 0]]),))


@pytest.fixture
def two_cycle():
    """S_1 = e2 e1*, S_2 = e1 e2*"""
    return OperatorTuple((unit(2, 1, 0), unit(2, 0, 1)))


@pytest.fixture
def half():
    return RowContraction((np.array([[0.5]]),))


@pytest.fixture
def half_pair():
    return RowContraction((np.array([[0.5]]), np.array([[0.5]])))


@pytest.fixture
def example_v():
    """A unitary loop, a half-weighted loop and a connector, on C^2"""
    r = 1 / np.sqrt(2)
    return RowContraction((
        np.array([[1, 0], [0, 0]]),
        np.array([[0, 0], [0, r]]),
        np.array([[0, 0], [r, 0]]),
    ))


@pytest.fixture
def example_v_family():
    return ProjectionFamily((np.diag([1, 0]), np.diag([0, 1])))


@pytest.fixture
def example_v_graph():
    return DirectedGraph(2, ((0, 0), (1, 1), (0, 1)))


@pytest.fixture
def identity_family():
    def make(dim):
        return ProjectionFamily((np.eye(dim),))
    return make


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)
