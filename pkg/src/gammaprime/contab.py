"""2x2 case/exposure tables and their plug-in estimates.

Layout::

                 exposed   unexposed
    cases          n11        n12
    controls       n21        n22
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .exceptions import AlreadyCorrectedError, DegenerateTableError

HALDANE = 0.5


@dataclass(frozen=True)
class ContingencyTable:
    n11: float
    n12: float
    n21: float
    n22: float
    corrected: bool = False

    @property
    def cells(self) -> tuple[float, float, float, float]:
        return (self.n11, self.n12, self.n21, self.n22)

    @property
    def n_cases(self) -> float:
        return self.n11 + self.n12

    @property
    def n_controls(self) -> float:
        return self.n21 + self.n22

    @property
    def n_total(self) -> float:
        return self.n11 + self.n12 + self.n21 + self.n22

    def swap_rows(self) -> "ContingencyTable":
        return replace(self, n11=self.n21, n12=self.n22, n21=self.n11, n22=self.n12)

    def swap_columns(self) -> "ContingencyTable":
        return replace(self, n11=self.n12, n12=self.n11, n21=self.n22, n22=self.n21)


@dataclass(frozen=True)
class SampleEstimates:
    """Plug-in quantities shared by every statistic.

    ``sigma_hat`` is the per-observation standard deviation of log(OR),
    so that ``sigma_hat / sqrt(n_total)`` is the Woolf standard error.
    """

    p_hat: float
    q_hat: float
    w_hat: float
    n_total: float
    sigma_hat: float


def from_counts(n11: float, n12: float, n21: float, n22: float) -> ContingencyTable:
    """Build an uncorrected table, rejecting negative or all-zero input."""
    cells = (n11, n12, n21, n22)
    for c in cells:
        if not math.isfinite(c) or c < 0:
            raise ValueError(f"cell counts must be finite and nonnegative, got {cells}")
    if sum(cells) == 0:
        raise DegenerateTableError("table has no observations")
    return ContingencyTable(*(float(c) for c in cells))


def haldane_correct(t: ContingencyTable) -> ContingencyTable:
    """Add one half to each cell (Haldane-Anscombe correction)."""
    if t.corrected:
        raise AlreadyCorrectedError("table is already corrected")
    return ContingencyTable(
        t.n11 + HALDANE, t.n12 + HALDANE, t.n21 + HALDANE, t.n22 + HALDANE, corrected=True
    )


def _check_rows(t: ContingencyTable):
    if t.n_cases <= 0 or t.n_controls <= 0:
        raise DegenerateTableError(
            f"need at least one case and one control, got n_cases={t.n_cases}, "
            f"n_controls={t.n_controls}"
        )


def estimates(t: ContingencyTable) -> SampleEstimates:
    _check_rows(t)
    if min(t.cells) <= 0:
        raise DegenerateTableError(f"zero cell in {t.cells}; apply haldane_correct first")
    n = t.n_total
    p = t.n11 / t.n_cases
    q = t.n21 / t.n_controls
    w = t.n_cases / n
    var = 1.0 / w / (p * (1.0 - p)) + 1.0 / (1.0 - w) / (q * (1.0 - q))
    return SampleEstimates(p_hat=p, q_hat=q, w_hat=w, n_total=n, sigma_hat=math.sqrt(var))


def woolf_se(t: ContingencyTable) -> float:
    """Standard error of log(OR): sqrt of the summed reciprocal cell counts."""
    if min(t.cells) <= 0:
        raise ValueError(f"zero cell in {t.cells}; apply haldane_correct first")
    return math.sqrt(sum(1.0 / c for c in t.cells))
