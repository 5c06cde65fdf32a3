"""Normal distribution helpers, a safeguarded root finder and seeded streams."""
from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Callable

import numpy as np

from .exceptions import BracketError, ConvergenceError

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_STD_NORMAL = NormalDist()

MAX_ITER = 200
DEFAULT_TOL = 1e-12


def normal_pdf(x: float) -> float:
    """Standard normal density."""
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def normal_cdf(x: float) -> float:
    """Standard normal distribution function.

    Uses ``erfc`` on both sides so the lower tail keeps full relative
    precision instead of cancelling against 1.
    """
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def normal_sf(x: float) -> float:
    """Upper tail ``1 - normal_cdf(x)`` without cancellation."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def normal_quantile(p: float) -> float:
    """Inverse of :func:`normal_cdf` for ``0 < p < 1``."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"normal_quantile needs 0 < p < 1, got {p!r}")
    return _STD_NORMAL.inv_cdf(p)


@dataclass(frozen=True)
class RootBracket:
    """Interval ``[lo, hi]`` on which the target function changes sign."""

    lo: float
    hi: float
    tolerance: float = DEFAULT_TOL

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")


def solve_root(
    f: Callable[[float], float],
    bracket: RootBracket,
    fprime: Callable[[float], float] | None = None,
    max_iter: int = MAX_ITER,
) -> float:
    """Find a root of ``f`` inside ``bracket``.

    Bisection keeps the root enclosed; when ``fprime`` is given, each step
    first tries a Newton update and only falls back to the midpoint if the
    Newton iterate leaves the current bracket.

    Raises
    ------
    BracketError
        If ``f`` does not change sign between the endpoints.
    ConvergenceError
        If the bracket is still wider than the tolerance after ``max_iter``
        steps.
    """
    lo, hi = float(bracket.lo), float(bracket.hi)
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BracketError(f"no sign change on [{lo}, {hi}]: f={flo}, {fhi}")

    x = 0.5 * (lo + hi)
    for _ in range(max_iter):
        fx = f(x)
        if fx == 0.0:
            return x
        if (fx > 0) == (flo > 0):
            lo, flo = x, fx
        else:
            hi = x
        if hi - lo <= bracket.tolerance:
            return 0.5 * (lo + hi)

        step_ok = False
        if fprime is not None:
            d = fprime(x)
            if d != 0.0 and math.isfinite(d):
                xn = x - fx / d
                if lo < xn < hi:
                    # a Newton step that no longer moves means we are done
                    if abs(xn - x) <= bracket.tolerance:
                        return xn
                    x = xn
                    step_ok = True
        if not step_ok:
            x = 0.5 * (lo + hi)
    raise ConvergenceError(f"root not isolated to {bracket.tolerance} in {max_iter} steps")


class RandomStream:
    """Reproducible random stream keyed by ``(seed, stream_id)``.

    Backed by a Philox counter-based bit generator whose key comes from
    ``SeedSequence(seed, spawn_key=(stream_id,))``; distinct stream ids give
    statistically independent sequences. A stream must not be shared
    between threads.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.Philox(ss))

    def uniform(self, low=0.0, high=1.0, size=None):
        return self.generator.uniform(low, high, size)

    def binomial(self, n, p, size=None):
        return self.generator.binomial(n, p, size)

    def normal(self, loc=0.0, scale=1.0, size=None):
        return self.generator.normal(loc, scale, size)

    def choice(self, n, size=None, p=None):
        return self.generator.choice(n, size=size, p=p)

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, stream_id={self.stream_id})"


def rng_stream(seed: int, stream_id: int = 0) -> RandomStream:
    return RandomStream(seed, stream_id)
