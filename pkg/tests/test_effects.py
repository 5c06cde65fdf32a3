import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import optimize

from gammaprime.contab import estimates, from_counts
from gammaprime.effects import (
    ExposureModel,
    GammaPrimeRangeWarning,
    gamma_of_psi,
    gamma_of_psi_radical,
    gamma_prime_of_psi,
    gamma_prime_slope,
    llc_constants,
    psi_of_gamma_prime,
    se_gamma_prime,
    se_gamma_prime_from_se,
    sigma_minimizers,
    sigma_population,
    summarize_published,
    summarize_table,
    v_argmin,
    w_argmin,
    var_yule_q,
    var_yule_y,
    yule_variances,
    yule_q,
    yule_y,
)
from gammaprime.exceptions import OutOfRangeError

C = llc_constants()
inner_psi = st.floats(-C.max_log_or + 1e-3, C.max_log_or - 1e-3)
probs = st.floats(0.02, 0.98)
odds = st.floats(1 / 60, 60)


def test_constants():
    assert C.psi_star == pytest.approx(1.19967864025773, abs=1e-12)
    assert C.psi_star * math.tanh(C.psi_star) == pytest.approx(1.0, abs=1e-15)
    assert C.llc == pytest.approx(0.662743419349181, abs=1e-12)
    assert C.max_or == pytest.approx(math.exp(C.max_log_or), rel=1e-15)


def test_gamma_peak_is_llc():
    # independent oracle: numerical maximization of psi / cosh(psi)
    res = optimize.minimize_scalar(lambda x: -x / math.cosh(x), bounds=(0.5, 2.0), method="bounded",
                                   options={"xatol": 1e-12})
    assert -res.fun == pytest.approx(C.llc, abs=1e-12)
    assert gamma_prime_of_psi(C.max_log_or) == pytest.approx(1.0, abs=1e-15)


@given(st.floats(-40, 40))
def test_radical_form_agrees(psi):
    assert gamma_of_psi_radical(psi) == pytest.approx(gamma_of_psi(psi), rel=1e-12, abs=1e-14)


@given(st.floats(-40, 40))
def test_gamma_prime_odd_and_bounded(psi):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GammaPrimeRangeWarning)
        g = gamma_prime_of_psi(psi)
        assert abs(g) <= 1.0 + 1e-15
        assert gamma_prime_of_psi(-psi) == -g


def test_beyond_range_warns():
    with pytest.warns(GammaPrimeRangeWarning):
        gamma_prime_of_psi(6.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        gamma_prime_of_psi(6.0, warn=False)


def test_array_input():
    out = gamma_prime_of_psi(np.array([-1.0, 0.0, 1.0]))
    assert isinstance(out, np.ndarray) and out[1] == 0.0
    assert isinstance(gamma_prime_of_psi(1.0), float)


@given(inner_psi)
def test_inverse(psi):
    assert psi_of_gamma_prime(gamma_prime_of_psi(psi)) == pytest.approx(psi, abs=1e-9)


def test_inverse_domain():
    with pytest.raises(ValueError):
        psi_of_gamma_prime(1.5)


@given(inner_psi)
def test_slope_matches_finite_difference(psi):
    h = 1e-6
    fd = (gamma_prime_of_psi(psi + h) - gamma_prime_of_psi(psi - h)) / (2 * h)
    assert gamma_prime_slope(psi) == pytest.approx(fd, rel=1e-6, abs=1e-8)


def test_se_gamma_prime_forms():
    psi, sigma, n = 0.7, 4.3, 800
    assert se_gamma_prime(psi, sigma, n) == pytest.approx(
        se_gamma_prime_from_se(psi, sigma / math.sqrt(n)), rel=1e-14
    )
    with pytest.raises(OutOfRangeError):
        se_gamma_prime(C.max_log_or + 0.1, sigma, n)


@given(odds)
def test_yule_identities(o):
    psi = math.log(o)
    assert 4 * math.atanh(yule_y(o)) == pytest.approx(psi, abs=1e-12)
    assert 2 * math.atanh(yule_q(o)) == pytest.approx(psi, abs=1e-12)


def test_yule_rejects_nonpositive():
    with pytest.raises(ValueError):
        yule_y(0.0)
    with pytest.raises(ValueError):
        yule_q(-1.0)


def _delta_var(f, p, q, w, n):
    # numerical-gradient delta method
    h = 1e-6
    dp = (f(p + h, q) - f(p - h, q)) / (2 * h)
    dq = (f(p, q + h) - f(p, q - h)) / (2 * h)
    return dp**2 * p * (1 - p) / (w * n) + dq**2 * q * (1 - q) / ((1 - w) * n)


@given(st.integers(5, 400), st.integers(5, 400), st.integers(5, 400), st.integers(5, 400))
def test_yule_variances_delta_oracle(a, b, c, d):
    e = estimates(from_counts(a, b, c, d))
    ratio = lambda p, q: p * (1 - q) / ((1 - p) * q)
    vy = _delta_var(lambda p, q: yule_y(ratio(p, q)), e.p_hat, e.q_hat, e.w_hat, e.n_total)
    vq = _delta_var(lambda p, q: yule_q(ratio(p, q)), e.p_hat, e.q_hat, e.w_hat, e.n_total)
    assert var_yule_y(e) == pytest.approx(vy, rel=1e-5)
    assert var_yule_q(e) == pytest.approx(vq, rel=1e-5)


@given(st.floats(0.05, 0.95), probs, odds)
def test_sigma_forms_agree(w, p, o):
    m = ExposureModel.from_case_control(w, p, o)
    assert m.odds_ratio == pytest.approx(m.p * (1 - m.q) / ((1 - m.p) * m.q), rel=1e-10)
    assert sigma_population(m, "prospective") == pytest.approx(sigma_population(m), rel=1e-10)
    back = ExposureModel.from_prospective(m.v, m.pr_d_given_e, o)
    assert back.w == pytest.approx(w, rel=1e-9) and back.p == pytest.approx(p, rel=1e-9)


def _grid_min_sigma(o, k=200):
    g = (np.arange(k) + 0.5) / k
    w, p = np.meshgrid(g, g, indexing="ij")
    q = p / ((1 - p) * o + p)
    var = 1 / (w * p * (1 - p)) + 1 / ((1 - w) * q * (1 - q))
    return float(np.sqrt(var.min()))


@pytest.mark.parametrize("o", [1 / 50, 1 / 2, 1.0, 2.0, 10.0, 50.0, 121.0])
def test_sigma_minimizers_beat_grid(o):
    m = sigma_minimizers(o)
    s = sigma_population(m)
    assert s <= _grid_min_sigma(o) + 1e-6
    assert m.v == pytest.approx(0.5) and m.w == pytest.approx(0.5, abs=1e-12)
    assert m.pr_d_given_not_e == pytest.approx(1 - m.pr_d_given_e, abs=1e-12)
    if o != 1.0:
        assert math.log(o) / s == pytest.approx(gamma_of_psi(math.log(o)), rel=1e-12)


def test_prevalence_at_maximum():
    m = sigma_minimizers(C.max_or)
    assert m.pr_d_given_e == pytest.approx(0.9167782798, abs=1e-9)


@given(st.floats(0.05, 0.95), odds)
def test_w_argmin_is_minimum(p, o):
    q = p / ((1 - p) * o + p)
    f = lambda w: 1 / (w * p * (1 - p)) + 1 / ((1 - w) * q * (1 - q))
    res = optimize.minimize_scalar(f, bounds=(1e-9, 1 - 1e-9), method="bounded", options={"xatol": 1e-12})
    assert w_argmin(p, o) == pytest.approx(res.x, abs=1e-6)


@given(st.floats(0.3, 0.7), st.floats(1.0, 20.0))
def test_v_argmin_is_minimum(de, o):
    dne = 1 / (1 - o * (1 - 1 / de))
    f = lambda v: 1 / (v * de * (1 - de)) + 1 / ((1 - v) * dne * (1 - dne))
    res = optimize.minimize_scalar(f, bounds=(1e-9, 1 - 1e-9), method="bounded", options={"xatol": 1e-12})
    assert v_argmin(de, o) == pytest.approx(res.x, abs=1e-6)


def test_summaries():
    s = summarize_table(from_counts(20, 5, 10, 15))
    assert s.log_or == pytest.approx(math.log(6))
    assert s.n_total == 50
    p = summarize_published(0.70, 0.1)
    assert p.gamma_prime == pytest.approx(-0.134, abs=5e-4)
    with pytest.warns(GammaPrimeRangeWarning):
        far = summarize_published(200.0, 0.5)
    assert math.isnan(far.se_gamma_prime)


def test_yule_variance_symmetric_point():
    # both equal (slope at 0)^2 * sigma^2 / N with sigma = 4
    assert yule_variances(0.5, 0.5, 0.5, 400) == pytest.approx((0.0025, 0.01), rel=1e-12)


def test_yule_variances_monte_carlo():
    # unbalanced design so a case/control mix-up would show
    rng = np.random.default_rng(2024)
    n_d, n_c, p, o = 1600, 400, 0.3, 2.0
    q = p / ((1 - p) * o + p)
    x = rng.binomial(n_d, p, 100_000)
    y = rng.binomial(n_c, q, 100_000)
    r = (x / (n_d - x)) / (y / (n_c - y))
    vy, vq = yule_variances(p, q, n_d / (n_d + n_c), n_d + n_c)
    assert yule_y(r).var() == pytest.approx(vy, rel=0.05)
    assert yule_q(r).var() == pytest.approx(vq, rel=0.05)
