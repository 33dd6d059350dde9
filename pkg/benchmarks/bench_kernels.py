"""Time the numpy and numba kernel backends on the same batch and check they agree.

    python3 benchmarks/bench_kernels.py [--n 100000] [--repeat 3]
"""
import argparse
import time

import numpy as np

from forster import _jit, kernels
from forster.pair import PhysicalParams


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100_000, help="batch size")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if not _jit.HAVE_NUMBA:
        raise SystemExit("numba is not installed; only the numpy backend is available")

    rng = np.random.default_rng(args.seed)
    n = args.n
    cargs = PhysicalParams().kernel_args()
    r = rng.normal(8.1, 0.2, n)
    field = rng.normal(32.0, 1.0, n)
    t_int = rng.uniform(0.0, 0.6, n)
    delta = rng.uniform(-20.0, 20.0, n)

    cases = {
        "pump_probe": lambda b: b["pump_probe"](r, field, t_int, 1.0, 0.0, 64.0, 0.5, *cargs),
        "excitation": lambda b: b["excitation"](delta, field, r, 1.0, 0.5, *cargs),
    }
    print(f"batch n = {n}, best of {args.repeat}")
    print(f"{'kernel':<12}{'numpy (s)':>12}{'numba (s)':>12}{'speedup':>10}{'max |diff|':>13}")
    for name, call in cases.items():
        call(kernels.BACKENDS["numba"])  # compile / load from cache
        t_np, out_np = best_of(lambda: call(kernels.BACKENDS["numpy"]), args.repeat)
        t_nb, out_nb = best_of(lambda: call(kernels.BACKENDS["numba"]), args.repeat)
        diff = float(np.max(np.abs(out_np - out_nb)))
        print(f"{name:<12}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>9.1f}x{diff:>13.1e}")
        if diff > 1e-10:
            raise SystemExit(f"{name}: backends disagree by {diff:.3g}")


if __name__ == "__main__":
    main()
