"""Effect-size measures built on log(OR).

Besides log(OR) itself this covers the maximal standardized effect
``gamma = psi / (4 cosh(psi / 4))`` (``psi = log OR``), its normalized form
``gamma_prime = gamma / LLC``, Yule's Y and Q, and the population-level
analysis that shows why gamma is the largest attainable ``psi / sigma``.

Functions that take ``psi`` accept scalars or numpy arrays.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .contab import ContingencyTable, SampleEstimates, estimates, woolf_se
from .exceptions import OutOfRangeError
from .numerics import RootBracket, solve_root


class GammaPrimeRangeWarning(UserWarning):
    """gamma_prime evaluated where it is no longer monotone in log(OR)."""


@dataclass(frozen=True)
class LlcConstants:
    psi_star: float
    max_log_or: float
    llc: float
    max_or: float


@lru_cache(maxsize=1)
def llc_constants() -> LlcConstants:
    """Solve ``psi * tanh(psi) = 1`` and derive the Laplace limit constant.

    gamma is maximal where its derivative vanishes, i.e. where
    ``(psi/4) tanh(psi/4) = 1``; so the maximizing log(OR) is four times
    the root and the maximum value is ``root / cosh(root)``.
    """
    psi_star = solve_root(
        lambda x: x * math.tanh(x) - 1.0,
        RootBracket(1.0, 2.0, 1e-15),
        fprime=lambda x: math.tanh(x) + x / math.cosh(x) ** 2,
    )
    max_log_or = 4.0 * psi_star
    llc = max_log_or / (4.0 * math.cosh(psi_star))
    return LlcConstants(psi_star=psi_star, max_log_or=max_log_or, llc=llc, max_or=math.exp(max_log_or))


def _out(x):
    # scalars in, Python floats out
    return float(x) if np.ndim(x) == 0 else x


def log_or(t: ContingencyTable) -> float:
    if min(t.cells) <= 0:
        raise ValueError(f"zero cell in {t.cells}; apply haldane_correct first")
    return math.log(t.n11 * t.n22 / (t.n12 * t.n21))


def gamma_of_psi(psi):
    psi = np.asarray(psi, dtype=float)
    return _out(psi / (4.0 * np.cosh(psi / 4.0)))


def gamma_of_psi_radical(psi):
    """The same quantity written with the square root of ``2 + (1+OR)/sqrt(OR)``."""
    psi = np.asarray(psi, dtype=float)
    ratio = (1.0 + np.exp(psi)) / np.exp(psi / 2.0)
    return _out(psi / (2.0 * np.sqrt(2.0 + ratio)))


def _warn_if_beyond(psi):
    if np.any(np.abs(psi) > llc_constants().max_log_or):
        warnings.warn(
            "gamma_prime is not monotone for |log OR| > %.6f" % llc_constants().max_log_or,
            GammaPrimeRangeWarning,
            stacklevel=3,
        )


def gamma_prime_of_psi(psi, warn: bool = True):
    psi = np.asarray(psi, dtype=float)
    if warn:
        _warn_if_beyond(psi)
    return _out(psi / (4.0 * np.cosh(psi / 4.0)) / llc_constants().llc)


def psi_of_gamma_prime(g: float) -> float:
    """Inverse of gamma_prime on its monotone branch, ``-1 <= g <= 1``."""
    if not -1.0 <= g <= 1.0:
        raise ValueError(f"gamma_prime must lie in [-1, 1], got {g}")
    m = llc_constants().max_log_or
    if abs(g) == 1.0:
        return math.copysign(m, g)
    return solve_root(
        lambda x: gamma_prime_of_psi(x, warn=False) - g,
        RootBracket(-m, m, 1e-14),
        fprime=gamma_prime_slope,
    )


def gamma_prime_slope(psi):
    """d gamma_prime / d log(OR); zero at +-max_log_or."""
    psi = np.asarray(psi, dtype=float)
    q = psi / 4.0
    return _out((4.0 - psi * np.tanh(q)) / (16.0 * np.cosh(q) * llc_constants().llc))


def _check_monotone_range(psi):
    if np.any(np.abs(psi) >= llc_constants().max_log_or):
        raise OutOfRangeError(
            f"|log OR| must be below {llc_constants().max_log_or:.6f}; the derivative of "
            "gamma_prime vanishes there"
        )


def se_gamma_prime(psi, sigma_hat, n_total):
    """Delta-method standard error of the estimated gamma_prime."""
    if np.any(np.asarray(sigma_hat) <= 0) or np.any(np.asarray(n_total) <= 0):
        raise ValueError("sigma_hat and n_total must be positive")
    _check_monotone_range(psi)
    return _out(np.asarray(sigma_hat) * np.abs(gamma_prime_slope(psi)) / np.sqrt(n_total))


def se_gamma_prime_from_se(psi, se_log_or):
    """Same as :func:`se_gamma_prime` but from the standard error of log(OR)."""
    if np.any(np.asarray(se_log_or) <= 0):
        raise ValueError("se_log_or must be positive")
    _check_monotone_range(psi)
    return _out(np.asarray(se_log_or) * np.abs(gamma_prime_slope(psi)))


def _check_or(odds_ratio):
    if np.any(np.asarray(odds_ratio) <= 0):
        raise ValueError("odds ratio must be positive")


def yule_y(odds_ratio):
    """Coefficient of colligation ``(sqrt(OR) - 1) / (sqrt(OR) + 1)``."""
    _check_or(odds_ratio)
    s = np.sqrt(np.asarray(odds_ratio, dtype=float))
    return _out((s - 1.0) / (s + 1.0))


def yule_q(odds_ratio):
    _check_or(odds_ratio)
    o = np.asarray(odds_ratio, dtype=float)
    return _out((o - 1.0) / (o + 1.0))


def yule_variances(p, q, w, n):
    """Delta-method variances of Yule's Y and Q from plug-in estimates.

    Works elementwise on arrays; :func:`var_yule_y` and :func:`var_yule_q`
    are the scalar entry points.
    """
    # the p-term scales with 1/w (cases) and the q-term with 1/(1-w)
    k = (np.sqrt(p * (1 - q) / ((1 - p) * q)) + 1.0) ** 4
    var_y = (p / ((1 - w) * (1 - p) * q**2 * k) + (1 - q) / (w * (1 - p) ** 2 * q * k)) / n
    d4 = (p + q - 2 * p * q) ** 4
    var_q = (
        4 * (1 - p) * p * (q - 1) ** 2 * q**2 / (w * d4)
        - 4 * (p - 1) ** 2 * p**2 * (q - 1) * q / ((1 - w) * d4)
    ) / n
    return _out(var_y), _out(var_q)


def var_yule_y(e: SampleEstimates) -> float:
    return yule_variances(e.p_hat, e.q_hat, e.w_hat, e.n_total)[0]


def var_yule_q(e: SampleEstimates) -> float:
    return yule_variances(e.p_hat, e.q_hat, e.w_hat, e.n_total)[1]


def q_from_p_or(p: float, odds_ratio: float) -> float:
    """Exposure probability among controls implied by ``p`` and the odds ratio."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    _check_or(odds_ratio)
    return p / ((1.0 - p) * odds_ratio + p)


@dataclass(frozen=True)
class ExposureModel:
    """Population 2x2 model seen both retrospectively and prospectively.

    ``w`` is the case fraction, ``p``/``q`` exposure probability among
    cases/controls, ``v`` the marginal exposure probability.
    """

    w: float
    p: float
    q: float
    v: float
    pr_d_given_e: float
    pr_d_given_not_e: float
    odds_ratio: float
    risk_ratio: float

    @classmethod
    def from_case_control(cls, w: float, p: float, odds_ratio: float) -> "ExposureModel":
        q = q_from_p_or(p, odds_ratio)
        v = w * p + (1.0 - w) * q
        de = w * p / v
        dne = w * (1.0 - p) / (1.0 - v)
        return cls(w, p, q, v, de, dne, odds_ratio, de / dne)

    @classmethod
    def from_prospective(cls, v: float, pr_d_given_e: float, odds_ratio: float) -> "ExposureModel":
        _check_or(odds_ratio)
        de = pr_d_given_e
        dne = 1.0 / (1.0 - odds_ratio * (1.0 - 1.0 / de))
        w = v * de + (1.0 - v) * dne
        p = v * de / w
        q = v * (1.0 - de) / (1.0 - w)
        return cls(w, p, q, v, de, dne, odds_ratio, de / dne)


def _inv_binom_var(x: float) -> float:
    if not 0.0 < x < 1.0:
        raise ValueError(f"probability must lie strictly inside (0, 1), got {x}")
    return 1.0 / (x * (1.0 - x))


def sigma_population(m: ExposureModel, form: str = "case_control") -> float:
    """Per-observation SD of log(OR) for a population model.

    ``form="case_control"`` uses (w, p, q); ``form="prospective"`` uses
    (v, Pr(D|E), Pr(D|not E)). The two agree for a consistent model.
    """
    if form == "case_control":
        _inv_binom_var(m.w)
        var = _inv_binom_var(m.p) / m.w + _inv_binom_var(m.q) / (1.0 - m.w)
    elif form == "prospective":
        _inv_binom_var(m.v)
        var = _inv_binom_var(m.pr_d_given_e) / m.v + _inv_binom_var(m.pr_d_given_not_e) / (1.0 - m.v)
    else:
        raise ValueError(f"unknown form {form!r}")
    return math.sqrt(var)


def v_argmin(pr_d_given_e: float, odds_ratio: float) -> float:
    """Exposure prevalence minimizing sigma for fixed Pr(D|E) and OR."""
    m = ExposureModel.from_prospective(0.5, pr_d_given_e, odds_ratio)
    return 1.0 / (1.0 + m.risk_ratio * math.sqrt(1.0 / odds_ratio))


def w_argmin(p: float, odds_ratio: float) -> float:
    """Case fraction minimizing sigma for fixed p and OR."""
    q = q_from_p_or(p, odds_ratio)
    return 1.0 / (1.0 + p / q * math.sqrt(1.0 / odds_ratio))


def sigma_minimizers(odds_ratio: float) -> ExposureModel:
    """The population model with the smallest sigma at a given odds ratio.

    At the optimum ``v = w = 1/2`` and ``Pr(D|not E) = 1 - Pr(D|E)``, and
    ``log(OR) / sigma`` equals :func:`gamma_of_psi`.
    """
    _check_or(odds_ratio)
    de = 1.0 - 1.0 / (1.0 + math.sqrt(odds_ratio))
    return ExposureModel.from_prospective(0.5, de, odds_ratio)


@dataclass(frozen=True)
class EffectSummary:
    log_or: float
    se_log_or: float
    gamma: float
    gamma_prime: float
    se_gamma_prime: float
    yule_y: float
    yule_q: float
    n_total: float | None = None


def summarize_table(t: ContingencyTable) -> EffectSummary:
    """All effect measures for one (corrected or strictly positive) table.

    ``se_gamma_prime`` is NaN when log(OR) is outside the monotone range.
    """
    est = estimates(t)
    psi = log_or(t)
    return _summary(psi, woolf_se(t), est.n_total)


def summarize_published(or_point: float, se_log_or: float) -> EffectSummary:
    """Effect measures from a reported odds ratio and the SE of its log."""
    _check_or(or_point)
    return _summary(math.log(or_point), se_log_or, None)


def _summary(psi: float, se: float, n_total) -> EffectSummary:
    try:
        se_gp = se_gamma_prime_from_se(psi, se)
    except OutOfRangeError:
        se_gp = math.nan
    odds = math.exp(psi)
    return EffectSummary(
        log_or=psi,
        se_log_or=se,
        gamma=gamma_of_psi(psi),
        gamma_prime=gamma_prime_of_psi(psi),
        se_gamma_prime=se_gp,
        yule_y=yule_y(odds),
        yule_q=yule_q(odds),
        n_total=n_total,
    )
