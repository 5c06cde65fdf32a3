import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from gammaprime.exceptions import BracketError, ConvergenceError
from gammaprime.numerics import (
    RootBracket,
    normal_cdf,
    normal_pdf,
    normal_quantile,
    normal_sf,
    rng_stream,
    solve_root,
)


@given(st.floats(-30, 30))
def test_normal_functions_match_scipy(x):
    assert normal_pdf(x) == pytest.approx(stats.norm.pdf(x), rel=1e-13, abs=1e-300)
    assert normal_cdf(x) == pytest.approx(stats.norm.cdf(x), rel=1e-12, abs=1e-300)
    assert normal_sf(x) == pytest.approx(stats.norm.sf(x), rel=1e-12, abs=1e-300)


@given(st.floats(1e-12, 1 - 1e-12))
def test_quantile_inverts_cdf(p):
    assert normal_quantile(p) == pytest.approx(stats.norm.ppf(p), rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
def test_quantile_rejects_boundary(p):
    with pytest.raises(ValueError):
        normal_quantile(p)


def test_solve_root_cubic():
    f = lambda x: x**3 - 2.0
    assert solve_root(f, RootBracket(0.0, 2.0)) == pytest.approx(2 ** (1 / 3), abs=1e-12)
    root = solve_root(f, RootBracket(0.0, 2.0), fprime=lambda x: 3 * x * x)
    assert root == pytest.approx(2 ** (1 / 3), abs=1e-12)


def test_solve_root_laplace_limit():
    f = lambda x: x * math.tanh(x) - 1.0
    assert solve_root(f, RootBracket(1.0, 2.0, 1e-15)) == pytest.approx(1.19967864025773, abs=1e-12)


def test_solve_root_no_sign_change():
    with pytest.raises(BracketError):
        solve_root(lambda x: x * x + 1.0, RootBracket(-1.0, 1.0))


def test_solve_root_iteration_cap():
    with pytest.raises(ConvergenceError):
        solve_root(lambda x: x - 0.3, RootBracket(0.0, 1.0, 1e-15), max_iter=3)


def test_bracket_validation():
    with pytest.raises(ValueError):
        RootBracket(1.0, 0.0)
    with pytest.raises(ValueError):
        RootBracket(0.0, 1.0, 0.0)


def test_streams_reproducible_and_independent():
    a = rng_stream(7, 3).uniform(size=5)
    b = rng_stream(7, 3).uniform(size=5)
    c = rng_stream(7, 4).uniform(size=5)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_stream_draw_helpers():
    s = rng_stream(1)
    assert s.binomial(10, 0.5, size=4).shape == (4,)
    assert s.normal(size=3).shape == (3,)
    assert set(s.choice(3, size=50, p=[0.2, 0.3, 0.5])) <= {0, 1, 2}
