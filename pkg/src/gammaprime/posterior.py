"""Approximate posterior inference for raw effect sizes via noncentralities.

A raw-scale prior (log(OR) by default) is discretized into bins. Given the
standard error of the estimate, each bin midpoint ``mu`` is "dressed" into a
noncentrality ``xi = mu / se``. The observed Wald statistic then updates
the bin probabilities with a normal likelihood, and the posterior is read
back on the raw scale ("undressed").
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .effects import (
    _check_monotone_range,
    gamma_prime_of_psi,
    llc_constants,
    se_gamma_prime_from_se,
)
from .numerics import normal_cdf, normal_quantile, normal_sf

SCALES = ("log_or", "gamma_prime")
PROB_TOL = 1e-9
FILE_PROB_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class BinnedPrior:
    """Discrete prior over raw effect sizes.

    ``lower_edges``/``upper_edges`` delimit each bin; the null atom, when
    present, is the bin at ``null_index`` with both edges at 0.
    """

    midpoints: np.ndarray
    probabilities: np.ndarray
    lower_edges: np.ndarray
    upper_edges: np.ndarray
    null_index: int | None = None

    def __post_init__(self):
        mids = np.asarray(self.midpoints, dtype=float)
        probs = np.asarray(self.probabilities, dtype=float)
        if mids.ndim != 1 or mids.size < 1 or probs.shape != mids.shape:
            raise ValueError("midpoints and probabilities must be equal-length 1-d arrays")
        if np.any(np.diff(mids) <= 0):
            raise ValueError("midpoints must be strictly increasing")
        if np.any(probs < 0):
            raise ValueError("probabilities must be nonnegative")
        if abs(probs.sum() - 1.0) > PROB_TOL:
            raise ValueError(f"probabilities sum to {probs.sum()!r}, not 1")
        if self.null_index is not None and mids[self.null_index] != 0.0:
            raise ValueError("null bin must sit at 0")
        for name in ("midpoints", "probabilities", "lower_edges", "upper_edges"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def null_mass(self) -> float:
        return 0.0 if self.null_index is None else float(self.probabilities[self.null_index])

    def __len__(self):
        return self.midpoints.size

    @classmethod
    def from_midpoints(cls, midpoints, probabilities, null_mass: float | None = None):
        """Build a prior from bin midpoints, deriving edges halfway between them.

        ``null_mass`` adds an atom at exactly 0, which must not coincide with
        an existing midpoint.
        """
        mids = np.asarray(midpoints, dtype=float)
        probs = np.asarray(probabilities, dtype=float)
        if mids.size == 0:
            if not null_mass:
                raise ValueError("empty prior")
            return point_mass_prior()
        order = np.argsort(mids)
        mids, probs = mids[order], probs[order]
        if mids.size == 1:
            lo, hi = mids.copy(), mids.copy()
        else:
            half = np.diff(mids) / 2.0
            lo = np.concatenate([[mids[0] - half[0]], mids[1:] - half])
            hi = np.concatenate([mids[:-1] + half, [mids[-1] + half[-1]]])
        null_index = None
        if null_mass is not None:
            if np.any(mids == 0.0):
                raise ValueError("a bin midpoint already sits at 0")
            k = int(np.searchsorted(mids, 0.0))
            mids = np.insert(mids, k, 0.0)
            probs = np.insert(probs, k, null_mass)
            lo = np.insert(lo, k, 0.0)
            hi = np.insert(hi, k, 0.0)
            null_index = k
        return cls(mids, probs, lo, hi, null_index)


def point_mass_prior() -> BinnedPrior:
    z = np.zeros(1)
    return BinnedPrior(z, np.ones(1), z, z, null_index=0)


def _normal_mass(lo: np.ndarray, hi: np.ndarray, tau: float) -> np.ndarray:
    out = np.empty(lo.size)
    for k, (a, b) in enumerate(zip(lo / tau, hi / tau)):
        # difference the tail on the side away from 0 to keep precision
        out[k] = normal_sf(a) - normal_sf(b) if a >= 0 else normal_cdf(b) - normal_cdf(a)
    return out


def make_default_prior(
    pi0: float = 0.5, tau: float = 0.42, truncation: float = 4.8, bins: int = 100
) -> BinnedPrior:
    """Null atom plus a discretized Normal(0, tau) truncated to +-truncation.

    The non-null mass ``1 - pi0`` is spread over ``bins`` equal-width bins in
    proportion to the normal probability of each bin. With an odd bin count
    the middle bin already sits at 0 and absorbs the atom.
    """
    if not 0.0 <= pi0 <= 1.0:
        raise ValueError(f"pi0 must lie in [0, 1], got {pi0}")
    if not tau > 0 or not truncation > 0:
        raise ValueError("tau and truncation must be positive")
    if bins < 2:
        raise ValueError("need at least two bins")
    if pi0 == 1.0:
        return point_mass_prior()

    edges = np.linspace(-truncation, truncation, bins + 1)
    lo, hi = edges[:-1], edges[1:]
    mids = 0.5 * (lo + hi)
    mass = _normal_mass(lo, hi, tau)
    probs = (1.0 - pi0) * mass / mass.sum()
    if pi0 == 0.0:
        return BinnedPrior(mids, probs, lo, hi, None)
    if bins % 2:
        k = bins // 2
        mids[k] = 0.0
        probs[k] += pi0
        return BinnedPrior(mids, probs, lo, hi, k)
    k = bins // 2
    return BinnedPrior(
        np.insert(mids, k, 0.0),
        np.insert(probs, k, pi0),
        np.insert(lo, k, 0.0),
        np.insert(hi, k, 0.0),
        k,
    )


def read_prior_csv(source) -> BinnedPrior:
    """Parse a ``midpoint,probability`` CSV into a prior.

    ``source`` is a path or an open text stream. A first data row with
    midpoint 0 is the null atom. Probabilities must sum to 1 within 1e-6
    and are renormalized exactly.
    """
    if isinstance(source, (str, Path)):
        with open(source, newline="") as fh:
            return read_prior_csv(fh)
    rows = [r for r in csv.reader(line for line in source if not line.lstrip().startswith("#")) if r]
    if not rows or [c.strip().lower() for c in rows[0]] != ["midpoint", "probability"]:
        raise ValueError("prior file must start with header 'midpoint,probability'")
    pairs = []
    for lineno, r in enumerate(rows[1:], start=2):
        if len(r) != 2:
            raise ValueError(f"line {lineno}: expected two columns")
        try:
            pairs.append((float(r[0]), float(r[1])))
        except ValueError:
            raise ValueError(f"line {lineno}: not a number: {r}") from None
    if not pairs:
        raise ValueError("prior file has no rows")
    null_mass = None
    if pairs[0][0] == 0.0:
        null_mass = pairs.pop(0)[1]
    mids = np.array([m for m, _ in pairs])
    probs = np.array([p for _, p in pairs])
    if np.any(probs < 0) or (null_mass is not None and null_mass < 0):
        raise ValueError("negative prior probability")
    total = probs.sum() + (null_mass or 0.0)
    if abs(total - 1.0) > FILE_PROB_TOL:
        raise ValueError(f"prior probabilities sum to {total:.9g}, expected 1")
    probs = probs / total
    if null_mass is not None:
        null_mass = null_mass / total
        if mids.size == 0:
            return point_mass_prior()
    return BinnedPrior.from_midpoints(mids, probs, null_mass)


def write_prior_csv(prior: BinnedPrior, dest=None) -> str:
    buf = io.StringIO()
    buf.write("midpoint,probability\n")
    if prior.null_index is not None:
        buf.write(f"0,{prior.null_mass:.17g}\n")
    for k, (m, p) in enumerate(zip(prior.midpoints, prior.probabilities)):
        if k != prior.null_index:
            buf.write(f"{m:.17g},{p:.17g}\n")
    text = buf.getvalue()
    if dest is not None:
        Path(dest).write_text(text)
    return text


def _to_scale(values, scale: str):
    if scale == "log_or":
        return np.asarray(values, dtype=float)
    if scale == "gamma_prime":
        return np.asarray(gamma_prime_of_psi(values, warn=False), dtype=float)
    raise ValueError(f"scale must be one of {SCALES}, got {scale!r}")


def dress(prior: BinnedPrior, se: float, scale: str = "log_or") -> np.ndarray:
    """Noncentralities ``xi_i = mu_i / se``.

    With ``scale="gamma_prime"`` each log(OR) midpoint is first mapped to
    gamma_prime and ``se`` must be the standard error of gamma_prime-hat.
    """
    if not se > 0:
        raise ValueError(f"standard error must be positive, got {se}")
    if scale == "gamma_prime":
        _check_monotone_range(prior.midpoints)
    return _to_scale(prior.midpoints, scale) / se


def dress_from_sigma(prior: BinnedPrior, sigma_hat: float, n_total: float) -> np.ndarray:
    """``xi_i = sqrt(N) * mu_i / sigma_hat``; same as ``dress(prior, sigma_hat/sqrt(N))``."""
    if not sigma_hat > 0 or not n_total > 0:
        raise ValueError("sigma_hat and n_total must be positive")
    return math.sqrt(n_total) * prior.midpoints / sigma_hat


def posterior_weights(prior: BinnedPrior, xi, observed: float, sided: str = "one") -> np.ndarray:
    """Posterior bin probabilities given an observed Wald statistic.

    ``sided="one"`` uses the normal density of the signed statistic;
    ``sided="two"`` uses the folded normal density of ``|t|``, which is
    the 1-df noncentral chi-square density of ``t**2`` after a change of
    variables.
    """
    if sided not in ("one", "two"):
        raise ValueError("sided must be 'one' or 'two'")
    xi = np.asarray(xi, dtype=float)
    if xi.shape != prior.midpoints.shape:
        raise ValueError("xi must align with the prior bins")
    if not math.isfinite(observed):
        raise ValueError("observed statistic must be finite")
    with np.errstate(divide="ignore"):
        log_prior = np.log(prior.probabilities)
    return kernels.posterior_weights(log_prior, xi, observed, sided == "two")


@dataclass(frozen=True, eq=False)
class PosteriorResult:
    support: np.ndarray
    weights: np.ndarray
    mean: float
    hpd_low: float
    hpd_high: float
    credibility: float
    observed_statistic: float
    se_used: float
    scale: str = "log_or"
    lower_edges: np.ndarray = field(default=None, repr=False)
    upper_edges: np.ndarray = field(default=None, repr=False)
    null_index: int | None = None

    @property
    def sd(self) -> float:
        return float(np.sqrt(np.sum(self.weights * (self.support - self.mean) ** 2)))

    @property
    def null_weight(self) -> float:
        return 0.0 if self.null_index is None else float(self.weights[self.null_index])


def _edges_on_scale(edges, scale):
    m = llc_constants().max_log_or
    # outer edges of the default prior sit just past the gamma_prime maximum
    return _to_scale(np.clip(edges, -m, m), scale)


def undress(
    prior: BinnedPrior,
    weights,
    se_target: float,
    scale: str = "log_or",
    credibility: float = 0.95,
    observed: float = math.nan,
) -> PosteriorResult:
    """Carry posterior weights back to a raw scale and summarize them.

    ``se_target`` is the standard error the noncentralities were built
    with; ``xi_i * se_target`` recovers the midpoints, so support values
    are simply the midpoints on the requested scale.
    """
    weights = np.asarray(weights, dtype=float)
    if weights.shape != prior.midpoints.shape or abs(weights.sum() - 1.0) > PROB_TOL:
        raise ValueError("weights must align with the prior and sum to 1")
    if scale == "gamma_prime":
        _check_monotone_range(prior.midpoints)
    support = _to_scale(prior.midpoints, scale)
    partial = PosteriorResult(
        support=support,
        weights=weights,
        mean=float(np.dot(support, weights)),
        hpd_low=math.nan,
        hpd_high=math.nan,
        credibility=credibility,
        observed_statistic=observed,
        se_used=se_target,
        scale=scale,
        lower_edges=_edges_on_scale(prior.lower_edges, scale),
        upper_edges=_edges_on_scale(prior.upper_edges, scale),
        null_index=prior.null_index,
    )
    lo, hi = hpd_interval(partial, credibility)
    return PosteriorResult(**{**partial.__dict__, "hpd_low": lo, "hpd_high": hi})


def hpd_interval(result: PosteriorResult, credibility: float = 0.95) -> tuple[float, float]:
    """Highest-density interval of a binned posterior.

    Bins are taken in decreasing order of mass per unit width until the
    accumulated mass reaches ``credibility``; the interval spans the edges
    of the chosen bins. A zero-width null atom is ranked as if it had the
    median width of the other bins, i.e. by its mass.
    """
    if not 0.0 < credibility < 1.0:
        raise ValueError("credibility must lie in (0, 1)")
    w = result.weights
    lo, hi = result.lower_edges, result.upper_edges
    if lo is None or hi is None:
        lo = hi = result.support
    widths = np.asarray(hi - lo, dtype=float)
    positive = widths[widths > 0]
    ref = float(np.median(positive)) if positive.size else 1.0
    widths = np.where(widths > 0, widths, ref)
    density = w / widths
    mode = result.support[int(np.argmax(density))]
    order = np.lexsort((np.abs(result.support - mode), -density))
    cum = np.cumsum(w[order])
    n_in = int(np.searchsorted(cum, credibility - 1e-12)) + 1
    chosen = order[: min(n_in, w.size)]
    return float(lo[chosen].min()), float(hi[chosen].max())


def summary_to_se(or_point: float, ci_low: float, ci_high: float, level: float = 0.95) -> float:
    """Standard error of log(OR) implied by a reported confidence interval."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie in (0, 1)")
    if not 0.0 < ci_low <= or_point <= ci_high:
        raise ValueError(f"need 0 < ci_low <= or <= ci_high, got {ci_low}, {or_point}, {ci_high}")
    lo, hi = math.log(ci_low), math.log(ci_high)
    half = (hi - lo) / 2.0
    if abs(math.log(or_point) - (lo + hi) / 2.0) > 0.1 * half + 1e-12:
        warnings.warn(
            f"OR {or_point} is not centred in its CI on the log scale; "
            "the SE derived from the CI width may be off",
            stacklevel=2,
        )
    return half / normal_quantile((1.0 + level) / 2.0)


def posterior_from_estimate(
    psi_hat: float,
    se_log_or: float,
    prior: BinnedPrior,
    scale: str = "gamma_prime",
    sided: str = "one",
    credibility: float = 0.95,
) -> PosteriorResult:
    """Posterior for the effect behind a log(OR) estimate and its SE.

    On the log(OR) scale the observed statistic is Z and bins are dressed
    with the SE of log(OR). On the gamma_prime scale the statistic is T
    (gamma_prime-hat over its delta-method SE) and bins are dressed with
    that SE after mapping them to gamma_prime.
    """
    if scale == "log_or":
        se = se_log_or
        observed = psi_hat / se
    elif scale == "gamma_prime":
        se = se_gamma_prime_from_se(psi_hat, se_log_or)
        observed = gamma_prime_of_psi(psi_hat) / se
    else:
        raise ValueError(f"scale must be one of {SCALES}, got {scale!r}")
    xi = dress(prior, se, scale)
    w = posterior_weights(prior, xi, observed, sided)
    return undress(prior, w, se, scale, credibility, observed)
