import math

import numpy as np
import pytest

from gammaprime import kernels
from gammaprime.effects import llc_constants

BACKENDS = kernels.available_backends()
LIMIT = llc_constants().max_log_or


def random_tables(n, seed=0):
    rng = np.random.default_rng(seed)
    cells = rng.integers(0, 60, size=(4, n)).astype(float) + 0.5
    cells[0, :3] = [0.5, 200.5, 10.5]
    cells[3, :3] = [0.5, 200.5, 10.5]
    return cells


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_table_stats_against_formula(name):
    n11, n12, n21, n22 = random_tables(2000)
    psi, se, z, t = kernels.table_stats(n11, n12, n21, n22, LIMIT, impl=BACKENDS[name])
    ref_psi = np.log(n11 * n22 / (n12 * n21))
    ref_se = np.sqrt(1 / n11 + 1 / n12 + 1 / n21 + 1 / n22)
    np.testing.assert_allclose(psi, ref_psi, rtol=1e-13, atol=1e-14)
    np.testing.assert_allclose(se, ref_se, rtol=1e-13)
    np.testing.assert_allclose(z, ref_psi / ref_se, rtol=1e-12, atol=1e-14)
    inside = np.abs(ref_psi) < LIMIT
    ref_t = ref_psi / ref_se * 4 / (4 - ref_psi * np.tanh(ref_psi / 4))
    np.testing.assert_allclose(t[inside], ref_t[inside], rtol=1e-12, atol=1e-14)
    assert np.isnan(t[~inside]).all() and (~inside).any()


@pytest.mark.skipif("cython" not in BACKENDS, reason="compiled extension not built")
def test_backends_agree():
    cells = random_tables(5000, seed=3)
    a = kernels.table_stats(*cells, LIMIT, impl=BACKENDS["python"])
    b = kernels.table_stats(*cells, LIMIT, impl=BACKENDS["cython"])
    for x, y in zip(a, b):
        np.testing.assert_allclose(x, y, rtol=1e-13, atol=1e-15, equal_nan=True)
    rng = np.random.default_rng(5)
    lp = np.log(rng.dirichlet(np.ones(101)))
    xi = np.linspace(-20, 20, 101)
    for two in (False, True):
        for obs in (-3.0, 0.0, 2.5, 40.0):
            np.testing.assert_allclose(
                kernels.posterior_weights(lp, xi, obs, two, impl=BACKENDS["python"]),
                kernels.posterior_weights(lp, xi, obs, two, impl=BACKENDS["cython"]),
                rtol=1e-12, atol=1e-300,
            )
    x = rng.normal(size=1001)
    assert kernels.abs_argmax(x, impl=BACKENDS["python"]) == kernels.abs_argmax(x, impl=BACKENDS["cython"])


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_abs_argmax_first_of_ties(name):
    assert kernels.abs_argmax(np.array([1.0, -3.0, 3.0, 2.0]), impl=BACKENDS[name]) == 1


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_posterior_weights_zero_prior_bins(name):
    lp = np.array([-math.inf, math.log(0.5), math.log(0.5)])
    w = kernels.posterior_weights(lp, np.array([0.0, 1.0, 2.0]), 1.0, False, impl=BACKENDS[name])
    assert w[0] == 0.0 and w.sum() == pytest.approx(1.0)


def test_backend_flag():
    assert kernels.BACKEND in BACKENDS
