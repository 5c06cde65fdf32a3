"""Monte Carlo studies: test size, power, and posterior behaviour under selection.

Tables are generated case-control style: ``n_cases`` cases, a number of
controls drawn uniformly between ``n_cases/2`` and ``n_cases`` (rounded
half-to-even), exposure probability among cases ``p ~ U(0.05, 0.95)``, the
control exposure probability implied by the odds ratio, binomial exposure
counts, and one half added to every cell.

Randomness comes from :class:`~gammaprime.numerics.RandomStream` objects
keyed by ``(seed, stream_id)``. Size and power studies use one stream per
fixed-size block of replicates; the selection study uses one stream per
replicate. Blocks are evaluated independently and reduced in index order,
so results do not depend on the number of worker threads.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from . import kernels
from .contab import ContingencyTable
from .effects import gamma_prime_of_psi, llc_constants, yule_variances
from .numerics import RandomStream, normal_quantile, rng_stream
from .posterior import BinnedPrior, PosteriorResult, hpd_interval, make_default_prior, posterior_weights

P_RANGE = (0.05, 0.95)
BLOCK_SIZE = 8192
THREADS_ENV = "GAMMAPRIME_THREADS"


@dataclass(frozen=True)
class FixedEffect:
    log_or: float = 0.0

    @property
    def label(self) -> str:
        return f"OR={math.exp(self.log_or):.6g}"


@dataclass(frozen=True)
class NormalEffect:
    """log(OR) drawn per replicate from Normal(0, tau)."""

    tau: float

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")

    @property
    def label(self) -> str:
        return f"tau={self.tau:.6g}"


@dataclass(frozen=True)
class MixtureEffect:
    """Null atom plus discretized truncated normal, as in :func:`make_default_prior`."""

    pi0: float = 0.8
    tau: float = 0.42
    truncation: float = 4.8
    bins: int = 100

    def prior(self) -> BinnedPrior:
        return make_default_prior(self.pi0, self.tau, self.truncation, self.bins)

    @property
    def label(self) -> str:
        return f"pi0={self.pi0:.6g},tau={self.tau:.6g}"


EffectSpec = Union[FixedEffect, NormalEffect, MixtureEffect]


@dataclass(frozen=True)
class SimulationConfig:
    n_cases: Union[int, Sequence[int]]
    replicates: int
    seed: int = 1
    effect: EffectSpec = field(default_factory=FixedEffect)
    alpha: float = 0.05
    n_tests: int = 1
    scale: str = "log_or"
    threads: int | None = None
    block_size: int = BLOCK_SIZE
    include_yule: bool = False

    def __post_init__(self):
        grid = (self.n_cases,) if np.ndim(self.n_cases) == 0 else tuple(self.n_cases)
        if not grid or any(int(n) != n or n < 1 for n in grid):
            raise ValueError("n_cases must be positive integers")
        object.__setattr__(self, "n_cases", tuple(int(n) for n in grid))
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        if self.n_tests < 1:
            raise ValueError("n_tests must be at least 1")
        if self.scale not in ("log_or", "gamma_prime"):
            raise ValueError("scale must be 'log_or' or 'gamma_prime'")
        if self.block_size < 1:
            raise ValueError("block_size must be positive")


@dataclass
class StudyReport:
    kind: str
    columns: list[str]
    rows: list[dict] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(r[c]) for c in self.columns])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {"kind": self.kind, "rows": [{c: _jsonable(r[c]) for c in self.columns} for r in self.rows]},
            indent=2,
        )

    def to_text(self) -> str:
        cells = [self.columns] + [[_fmt(r[c], 6) for c in self.columns] for r in self.rows]
        widths = [max(len(row[i]) for row in cells) for i in range(len(self.columns))]
        lines = ["  ".join(s.rjust(wd) for s, wd in zip(row, widths)) for row in cells]
        lines.insert(1, "  ".join("-" * wd for wd in widths))
        return "\n".join(lines) + "\n"


def _fmt(x, digits=10) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.{digits}g}"
    return str(x)


def _jsonable(x):
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    return x


def resolve_threads(threads: int | None = None) -> int:
    """Worker count: explicit value, else CPU count, capped by the env var."""
    n = threads if threads is not None else (os.cpu_count() or 1)
    cap = os.environ.get(THREADS_ENV)
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, int(n))


def _map_ordered(fn, items, threads):
    items = list(items)
    if threads == 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def sample_tables(log_or, n_cases: int, stream: RandomStream, size: int):
    """Draw ``size`` corrected tables; ``log_or`` is a scalar or length-``size`` array.

    Returns the four cell arrays ``(n11, n12, n21, n22)``.
    """
    n_controls = np.rint(stream.uniform(n_cases / 2.0, n_cases, size))
    p = stream.uniform(P_RANGE[0], P_RANGE[1], size)
    odds_ratio = np.exp(log_or)
    q = p / ((1.0 - p) * odds_ratio + p)
    x = stream.binomial(n_cases, p)
    y = stream.binomial(n_controls.astype(np.int64), q)
    n11 = x + 0.5
    n12 = (n_cases - x) + 0.5
    n21 = y + 0.5
    n22 = (n_controls - y) + 0.5
    return n11, n12, n21, n22


def sample_table(log_or: float, n_cases: int, stream: RandomStream) -> ContingencyTable:
    cells = sample_tables(float(log_or), n_cases, stream, 1)
    return ContingencyTable(*(float(c[0]) for c in cells), corrected=True)


def _critical_value(alpha: float) -> float:
    return 0.0 if alpha >= 1.0 else normal_quantile(1.0 - alpha / 2.0)


def _blocks(replicates: int, block_size: int):
    return [(b, min(block_size, replicates - start)) for b, start in enumerate(range(0, replicates, block_size))]


def _rejection_block(config: SimulationConfig, n_cases: int, crit: float, block):
    index, size = block
    stream = rng_stream(config.seed, index)
    eff = config.effect
    psi = stream.normal(0.0, eff.tau, size) if isinstance(eff, NormalEffect) else eff.log_or
    n11, n12, n21, n22 = sample_tables(psi, n_cases, stream, size)
    psi_hat, se, z, t = kernels.table_stats(n11, n12, n21, n22, llc_constants().max_log_or)
    defined = ~np.isnan(t)
    out = {
        "rej_z": int(np.count_nonzero(np.abs(z) >= crit)),
        "rej_t": int(np.count_nonzero(np.abs(t[defined]) >= crit)),
        "t_defined": int(np.count_nonzero(defined)),
        "t_ge_z_violations": int(np.count_nonzero(np.abs(t[defined]) < np.abs(z[defined]) * (1 - 1e-12))),
    }
    if config.include_yule:
        nd = n11 + n12
        n = nd + n21 + n22
        var_y, var_q = yule_variances(n11 / nd, n21 / (n21 + n22), nd / n, n)
        out["rej_yule_y"] = int(np.count_nonzero(np.abs(np.tanh(psi_hat / 4.0)) / np.sqrt(var_y) >= crit))
        out["rej_yule_q"] = int(np.count_nonzero(np.abs(np.tanh(psi_hat / 2.0)) / np.sqrt(var_q) >= crit))
    return out


def _mcse(rate: float, n: int) -> float:
    return math.sqrt(rate * (1.0 - rate) / n) if n > 0 else math.nan


def _rejection_study(config: SimulationConfig, kind: str) -> StudyReport:
    columns = [
        "effect", "n_cases", "replicates", "rejection_rate_z", "mcse_z",
        "rejection_rate_t", "mcse_t", "t_defined", "t_excluded_rate",
    ]
    if config.include_yule:
        columns += ["rejection_rate_yule_y", "rejection_rate_yule_q"]
    report = StudyReport(kind, columns)
    crit = _critical_value(config.alpha)
    threads = resolve_threads(config.threads)
    blocks = _blocks(config.replicates, config.block_size)
    for n_cases in config.n_cases:
        parts = _map_ordered(lambda b: _rejection_block(config, n_cases, crit, b), blocks, threads)
        tot = {k: sum(p[k] for p in parts) for k in parts[0]}
        r = config.replicates
        rz = tot["rej_z"] / r
        nt = tot["t_defined"]
        rt = tot["rej_t"] / nt if nt else math.nan
        row = {
            "effect": config.effect.label,
            "n_cases": n_cases,
            "replicates": r,
            "rejection_rate_z": rz,
            "mcse_z": _mcse(rz, r),
            "rejection_rate_t": rt,
            "mcse_t": _mcse(rt, nt),
            "t_defined": nt,
            "t_excluded_rate": 1.0 - nt / r,
            "t_ge_z_violations": tot["t_ge_z_violations"],
        }
        if config.include_yule:
            row["rejection_rate_yule_y"] = tot["rej_yule_y"] / r
            row["rejection_rate_yule_q"] = tot["rej_yule_q"] / r
        report.rows.append(row)
    return report


def run_type1(config: SimulationConfig) -> StudyReport:
    """Rejection rates of the Z and T tests when log(OR) = 0.

    Replicates whose estimated log(OR) is beyond the monotone range have no
    T statistic; they are left out of T's rate and reported as
    ``t_excluded_rate``.
    """
    if not (isinstance(config.effect, FixedEffect) and config.effect.log_or == 0.0):
        raise ValueError("run_type1 needs a fixed log(OR) of 0")
    return _rejection_study(config, "type1")


def run_power(config: SimulationConfig) -> StudyReport:
    """Rejection rates for a fixed log(OR) or one drawn from Normal(0, tau)."""
    if not isinstance(config.effect, (FixedEffect, NormalEffect)):
        raise ValueError("run_power needs a FixedEffect or NormalEffect")
    return _rejection_study(config, "power")


def _selection_replicate(config, prior, mids, gp_mids, n_cases, index):
    stream = rng_stream(config.seed, index)
    L = config.n_tests
    idx = stream.choice(mids.size, size=L, p=prior.probabilities)
    psi = mids[idx]
    n11, n12, n21, n22 = sample_tables(psi, n_cases, stream, L)
    psi_hat, se, z, _ = kernels.table_stats(n11, n12, n21, n22, llc_constants().max_log_or)
    k = kernels.abs_argmax(z)
    sign = -1.0 if z[k] < 0 else 1.0
    route = config.scale
    if route == "gamma_prime" and abs(psi_hat[k]) >= llc_constants().max_log_or:
        route = "log_or"
    if route == "gamma_prime":
        slope = (4.0 - psi_hat[k] * math.tanh(psi_hat[k] / 4.0)) / (
            16.0 * math.cosh(psi_hat[k] / 4.0) * llc_constants().llc
        )
        se_gp = se[k] * abs(slope)
        w = posterior_weights(prior, gp_mids / se_gp, gamma_prime_of_psi(psi_hat[k], warn=False) / se_gp)
    else:
        w = posterior_weights(prior, mids / se[k], z[k])
    lo, hi = _hpd_from_weights(prior, w)
    return (
        sign * gp_mids[idx[k]],
        sign * float(np.dot(w, gp_mids)),
        sign * gamma_prime_of_psi(psi_hat[k], warn=False),
        1.0 if lo <= psi[k] <= hi else 0.0,
        1.0 if route != config.scale else 0.0,
    )


def _hpd_from_weights(prior, w, credibility=0.95):
    res = PosteriorResult(
        support=prior.midpoints, weights=w, mean=math.nan, hpd_low=math.nan, hpd_high=math.nan,
        credibility=credibility, observed_statistic=math.nan, se_used=math.nan,
        lower_edges=prior.lower_edges, upper_edges=prior.upper_edges, null_index=prior.null_index,
    )
    return hpd_interval(res, credibility)


def run_selection(config: SimulationConfig) -> StudyReport:
    """Posterior vs frequentist estimates for the strongest of L tests.

    Each replicate draws ``n_tests`` log(OR) values from the mixture prior,
    simulates one table per effect and keeps the table with the largest
    ``|Z|``. For that table it records the true gamma_prime, the posterior
    mean of gamma_prime under the same prior, the plug-in gamma_prime-hat,
    and whether the 95% HPD interval on the log(OR) scale covers the true
    log(OR). Signed quantities are oriented by the sign of the selected Z,
    so averages measure magnitude in the direction of the finding.
    """
    if not isinstance(config.effect, MixtureEffect):
        raise ValueError("run_selection needs a MixtureEffect")
    prior = config.effect.prior()
    mids = prior.midpoints
    gp_mids = np.asarray(gamma_prime_of_psi(mids, warn=False))
    threads = resolve_threads(config.threads)
    columns = [
        "n_tests", "n_cases", "replicates",
        "true_mean_gamma_prime", "mcse_true",
        "posterior_mean_gamma_prime", "mcse_posterior",
        "frequentist_mean_gamma_prime", "mcse_frequentist",
        "hpd_coverage", "mcse_coverage", "route_fallbacks",
    ]
    report = StudyReport("selection", columns)
    r = config.replicates
    for n_cases in config.n_cases:
        vals = np.array(
            _map_ordered(
                lambda i: _selection_replicate(config, prior, mids, gp_mids, n_cases, i),
                range(r),
                threads,
            )
        )
        means = vals.mean(axis=0)
        sds = vals.std(axis=0, ddof=1) if r > 1 else np.full(vals.shape[1], math.nan)
        report.rows.append(
            {
                "n_tests": config.n_tests,
                "n_cases": n_cases,
                "replicates": r,
                "true_mean_gamma_prime": means[0],
                "mcse_true": sds[0] / math.sqrt(r),
                "posterior_mean_gamma_prime": means[1],
                "mcse_posterior": sds[1] / math.sqrt(r),
                "frequentist_mean_gamma_prime": means[2],
                "mcse_frequentist": sds[2] / math.sqrt(r),
                "hpd_coverage": means[3],
                "mcse_coverage": _mcse(means[3], r),
                "route_fallbacks": int(vals[:, 4].sum()),
                "bias_posterior": means[1] - means[0],
                "bias_frequentist": means[2] - means[0],
            }
        )
    return report
