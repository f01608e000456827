"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Both backends are imported directly, so the environment switch is not
needed here. The end-to-end solvers spend their time in LAPACK and sparse
factorizations; these kernels cover the remaining per-point loops.
"""
import argparse
import timeit

import numpy as np

from vibronica import _pykernels

try:
    from vibronica import _ckernels
except ImportError:
    _ckernels = None


def cases():
    rng = np.random.default_rng(7)
    x = np.linspace(-5, 5, 20001)
    w = rng.random(40)
    c = np.linspace(-4, 4, 40)
    k = 0.01 + 0.1 * np.arange(40)
    vals = rng.standard_normal(4001) + 1j * rng.standard_normal(4001)
    om = np.linspace(-3, 3, 2001)
    return {
        "scaled_hermite(m=200)": lambda m: m.scaled_hermite(0.7 + 0.2j, 0.3, 200),
        "lorentzian_sum(20001 x 40)": lambda m: m.lorentzian_sum(x, w, c, k),
        "weighted_fourier(4001 x 2001)": lambda m: m.weighted_fourier(vals, 0.05, om),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = {"python": _pykernels}
    if _ckernels is not None:
        backends["cython"] = _ckernels
    print(f"{'kernel':32s}" + "".join(f"{b:>12s}" for b in backends) + "     speedup  max|diff|")
    for name, fn in cases().items():
        times = {}
        outs = {}
        for b, mod in backends.items():
            outs[b] = np.asarray(fn(mod))
            n = max(1, int(0.2 / max(timeit.timeit(lambda: fn(mod), number=1), 1e-6)))
            times[b] = min(timeit.repeat(lambda: fn(mod), number=n, repeat=args.repeat)) / n
        line = f"{name:32s}" + "".join(f"{times[b] * 1e3:10.3f}ms" for b in backends)
        if "cython" in backends:
            diff = np.abs(outs["cython"] - outs["python"]).max()
            line += f"  {times['python'] / times['cython']:9.2f}x  {diff:.1e}"
        print(line)


if __name__ == "__main__":
    main()
