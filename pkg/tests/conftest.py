import numpy as np
import pytest

from ospos.linalg import Subspace
from ospos.reflection import Reflection


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def c3_example():
    """theta = diag(1, 1, -1) on C^3 with H+ = span{e1 + e3/2}."""
    theta = Reflection.diagonal([1, 1, -1])
    H = Subspace.span(np.array([1.0, 0.0, 0.5]))
    return theta, H
