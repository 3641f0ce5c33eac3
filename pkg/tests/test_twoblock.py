import time
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ospos.errors import NotContraction
from ospos.generators import random_contraction
from ospos.linalg import Subspace, adjoint, opnorm
from ospos.markov import in_R_epsilon, markov_residual
from ospos.twoblock import (
    TwoBlockModel,
    char_projection_minus,
    char_projection_plus,
    characteristic_projection,
    markov_iff_zero,
    markov_residual_blocks,
    model_triple,
)


def test_scalar_half():
    m = TwoBlockModel(np.array([[0.5]]))
    assert np.allclose(char_projection_plus(m), [[0.8, 0.4], [0.4, 0.2]], atol=1e-15)
    assert np.allclose(char_projection_minus(m), [[0.8, -0.4], [-0.4, 0.2]], atol=1e-15)
    ok, r = markov_iff_zero(m)
    assert not ok and r == pytest.approx(0.2, abs=1e-15)


def test_zero_is_markov():
    m = TwoBlockModel(np.zeros((2, 3)))
    ok, r = markov_iff_zero(m)
    assert ok and r == 0.0
    eps = model_triple(m)
    assert in_R_epsilon(m.theta, eps)


def test_not_contraction():
    with pytest.raises(NotContraction):
        TwoBlockModel(np.array([[1.5]]))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 1), st.integers(0, 2**31 - 1))
def test_char_projection(n1, n2, unit, seed):
    rng = np.random.default_rng(seed)
    C = random_contraction(n2, n1, rng, unit_dirs=unit)
    m = TwoBlockModel(C)
    E = char_projection_plus(m)
    assert opnorm(E @ E - E) <= 1e-9 and opnorm(E - adjoint(E)) <= 1e-9
    graph = Subspace.span(np.vstack([np.eye(n1), C]))
    assert Subspace.from_projection(E).same_as(graph, 1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.floats(0, 1), st.integers(0, 2**31 - 1))
def test_residual_closed_form(n1, n2, norm, seed):
    rng = np.random.default_rng(seed)
    C = random_contraction(n2, n1, rng, norm=norm)
    m = TwoBlockModel(C)
    r = markov_residual_blocks(m)
    c2 = opnorm(C) ** 2
    assert r == pytest.approx(c2 / (1 + c2), rel=1e-9, abs=1e-15)
    # the block formula agrees with the generic residual on the model triple
    assert abs(markov_residual(model_triple(m)) - r) <= 1e-9


def test_markov_iff_zero_threshold(rng):
    for norm in [0.0, 1e-12, 5e-11, 2e-10, 1e-8, 0.3, 1.0]:
        m = TwoBlockModel(random_contraction(3, 2, rng, norm=norm))
        assert markov_iff_zero(m)[0] == (norm <= 1e-10)


def test_condition_warning():
    C = np.diag([1.0, 0.0])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        cp = characteristic_projection(TwoBlockModel(C))
    assert cp.condition == pytest.approx(2.0)


def test_isometry_triple(rng):
    C = random_contraction(3, 3, rng, unit_dirs=3)
    m = TwoBlockModel(C)
    assert opnorm(adjoint(C) @ C - np.eye(3)) < 1e-12
    E = char_projection_plus(m)
    assert np.trace(E).real == pytest.approx(3.0)
    assert markov_iff_zero(m)[1] == pytest.approx(0.5)


def test_runtime(rng):
    t0 = time.perf_counter()
    for _ in range(200):
        m = TwoBlockModel(random_contraction(4, 4, rng))
        char_projection_plus(m)
        markov_iff_zero(m)
    assert time.perf_counter() - t0 < 1.0


def test_zero_contraction_projections():
    m = TwoBlockModel(np.zeros((2, 3)))
    expect = np.diag([1, 1, 1, 0, 0]).astype(float)
    assert np.allclose(char_projection_plus(m), expect)
    assert np.allclose(char_projection_minus(m), expect)


def test_minus_is_conjugate(rng):
    for _ in range(20):
        n1, n2 = rng.integers(1, 5, 2)
        m = TwoBlockModel(random_contraction(int(n2), int(n1), rng))
        J = np.diag([1.0] * m.n1 + [-1.0] * m.n2)
        assert opnorm(char_projection_minus(m) - J @ char_projection_plus(m) @ J) < 1e-12


def test_nonzero_never_markov(rng):
    for _ in range(200):
        n1, n2 = rng.integers(1, 5, 2)
        m = TwoBlockModel(random_contraction(int(n2), int(n1), rng, norm=float(rng.uniform(1e-3, 1.0))))
        assert not markov_iff_zero(m)[0]


def test_extended_zero_block():
    from ospos.renormalize import extended_projections

    m = TwoBlockModel(np.zeros((2, 2)))
    assert extended_projections(model_triple(m), m.theta).ep3_residual < 1e-12
