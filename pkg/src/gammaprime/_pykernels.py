"""numpy implementations of the batch kernels.

Used when the compiled ``_ckernels`` extension is not available; the
compiled module exposes the same three functions with the same contracts.
"""
import numpy as np


def table_stats(n11, n12, n21, n22, limit):
    """log(OR), its Woolf SE, the Z statistic and the T statistic per table.

    T is NaN where ``|log OR| >= limit``.
    """
    psi = np.log((n11 * n22) / (n12 * n21))
    se = np.sqrt(1.0 / n11 + 1.0 / n12 + 1.0 / n21 + 1.0 / n22)
    z = psi / se
    ok = np.abs(psi) < limit
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(ok, z / ((4.0 - psi * np.tanh(psi / 4.0)) / 4.0), np.nan)
    return psi, se, z, t


def posterior_weights(log_prior, xi, observed, two_sided):
    """Normalized ``prior * likelihood`` computed in log space.

    Returns all-NaN when every term is -inf.
    """
    log_prior = np.asarray(log_prior, dtype=float)
    xi = np.asarray(xi, dtype=float)
    with np.errstate(over="ignore"):
        ll = -0.5 * (observed - xi) ** 2
        if two_sided:
            ll = np.logaddexp(ll, -0.5 * (observed + xi) ** 2)
    lw = log_prior + ll
    top = lw.max()
    if top == -np.inf:
        return np.full(lw.shape, np.nan)
    w = np.exp(lw - top)
    return w / w.sum()


def abs_argmax(x):
    return int(np.argmax(np.abs(x)))
