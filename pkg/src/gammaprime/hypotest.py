"""Wald tests of H0: log(OR) = 0 on the log(OR) and gamma_prime scales."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .contab import ContingencyTable, estimates, woolf_se
from .effects import _check_monotone_range, gamma_prime_of_psi, log_or, se_gamma_prime
from .numerics import normal_sf


@dataclass(frozen=True)
class TestResult:
    __test__ = False  # keep pytest from collecting this class

    statistic: float
    statistic_squared: float
    p_two_sided: float
    p_one_sided: float
    kind: str

    @classmethod
    def from_statistic(cls, s: float, kind: str) -> "TestResult":
        return cls(
            statistic=s,
            statistic_squared=s * s,
            p_two_sided=min(1.0, 2.0 * normal_sf(abs(s))),
            p_one_sided=normal_sf(s),
            kind=kind,
        )


def z_test(t: ContingencyTable) -> TestResult:
    """Classical test: log(OR) over its Woolf standard error."""
    estimates(t)  # raises on degenerate rows / zero cells
    return TestResult.from_statistic(log_or(t) / woolf_se(t), "Z")


def zt_ratio(psi: float) -> float:
    """Z/T for the same table; depends on log(OR) only."""
    _check_monotone_range(psi)
    return (4.0 - psi * math.tanh(psi / 4.0)) / 4.0


def t_test(t: ContingencyTable) -> TestResult:
    """Test built on the estimated gamma_prime and its delta-method SE.

    Raises :class:`~gammaprime.exceptions.OutOfRangeError` when
    ``|log OR| >= max_log_or``; past that point the statistic flips sign.
    """
    est = estimates(t)
    psi = log_or(t)
    _check_monotone_range(psi)
    stat = (
        math.sqrt(est.n_total) * 4.0 * psi
        / (est.sigma_hat * (4.0 - psi * math.tanh(psi / 4.0)))
    )
    return TestResult.from_statistic(stat, "T")


def t_statistic_via_gamma_prime(t: ContingencyTable) -> float:
    """T computed as gamma_prime-hat over its standard error (second route)."""
    est = estimates(t)
    psi = log_or(t)
    return gamma_prime_of_psi(psi) / se_gamma_prime(psi, est.sigma_hat, est.n_total)


def chi2_1_sf(x: float) -> float:
    """Upper tail of the 1-df chi-square distribution."""
    if x <= 0:
        return 1.0
    return math.erfc(math.sqrt(x / 2.0))

