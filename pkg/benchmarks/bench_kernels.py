"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--size N] [--repeat R]
"""
import argparse
import timeit

import numpy as np

from gammaprime import kernels
from gammaprime.effects import llc_constants
from gammaprime.posterior import dress, make_default_prior


def cases(size, rng):
    cells = rng.integers(0, 200, size=(4, size)).astype(float) + 0.5
    prior = make_default_prior(0.8)
    with np.errstate(divide="ignore"):
        log_prior = np.log(prior.probabilities)
    xi = dress(prior, 0.15)
    z = rng.normal(size=size)
    limit = llc_constants().max_log_or
    return {
        "table_stats": lambda impl: kernels.table_stats(*cells, limit, impl=impl),
        # the selection study evaluates one small posterior per replicate
        "posterior_weights x1000": lambda impl: [
            kernels.posterior_weights(log_prior, xi, 3.0 + k * 1e-3, False, impl=impl) for k in range(1000)
        ],
        "abs_argmax": lambda impl: kernels.abs_argmax(z, impl=impl),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = kernels.available_backends()
    print(f"default backend: {kernels.BACKEND}; size={args.size}")
    if "cython" not in backends:
        print("compiled extension not available; timing the Python backend only")
    print(f"{'kernel':<26}" + "".join(f"{b:>12}" for b in sorted(backends)) + f"{'speedup':>10}")
    for name, fn in cases(args.size, np.random.default_rng(0)).items():
        best = {}
        for b, impl in sorted(backends.items()):
            best[b] = min(timeit.repeat(lambda: fn(impl), number=1, repeat=args.repeat))
        speed = f"{best['python'] / best['cython']:.1f}x" if "cython" in best else "-"
        print(f"{name:<26}" + "".join(f"{best[b] * 1e3:>10.2f}ms" for b in sorted(best)) + f"{speed:>10}")


if __name__ == "__main__":
    main()
