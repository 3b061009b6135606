"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--n 100000] [--repeat 7]

Prints the best-of-``repeat`` wall time per call for each kernel and
backend, and the speedup of the compiled one. Inputs are the shapes the
estimator sees: log-ratio vectors of length n.
"""

from __future__ import annotations

import argparse
import math
import timeit

import numpy as np

from warpbridge.kernels import available_backends, get_backend


def cases(n: int, rng: np.random.Generator):
    l1 = rng.normal(scale=0.5, size=n)
    l2 = rng.normal(scale=0.5, size=n)
    l2[:: max(1, n // 100)] = -np.inf
    init = float(np.log(np.mean(np.exp(l2))))
    s = math.log(0.5)

    def iterate(k):
        # fixed iteration count so both backends do the same work
        return lambda: k.bridge_iterate(l1, l2, s, s, init, 1e-300, 20, np.empty(21))

    return {
        "logsumexp": lambda k: lambda: k.logsumexp(l1),
        "bridge_iterate x20": iterate,
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=7)
    args = ap.parse_args()

    backends = available_backends()
    rng = np.random.default_rng(0)
    print(f"n = {args.n}, best of {args.repeat}; backends: {', '.join(backends)}")
    print(f"{'kernel':<24}" + "".join(f"{b:>14}" for b in backends) + f"{'speedup':>10}")
    for name, make in cases(args.n, rng).items():
        times = {}
        for b in backends:
            fn = make(get_backend(b))
            number = max(1, int(0.2 / max(timeit.timeit(fn, number=1), 1e-7)))
            times[b] = min(timeit.repeat(fn, number=number, repeat=args.repeat)) / number
        row = f"{name:<24}" + "".join(f"{times[b] * 1e3:>12.3f}ms" for b in backends)
        if len(times) == 2:
            row += f"{times['python'] / times['compiled']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
