"""Compare the numba and numpy kernels on representative sizes.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``.  The numba
timings exclude the first (compiling) call.
"""
import argparse
import timeit

import numpy as np

from ridg import _kernels
from ridg.corrector import LinearScheme
from ridg.linear_predictor import AdvectionConfig, Scheme


def bench(fn, repeat):
    fn()  # warm-up / JIT compile
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"numba available: {_kernels.HAVE_NUMBA}  backend: {_kernels.backend()}")
    cases = [
        ("stencil 1D m3 n=160", (160,), 3, (0.9,)),
        ("stencil 2D m3 n=80^2", (80, 80), 3, (0.75, 0.75)),
        ("stencil 3D m3 n=20^3", (20, 20, 20), 3, (0.6, 0.6, 0.6)),
    ]
    print(f"{'kernel':<26}{'numpy [s]':>12}{'numba [s]':>12}{'max diff':>12}")
    for name, shape, m, nu in cases:
        offsets, blocks = LinearScheme(Scheme.RIDG, m, AdvectionConfig(nu)).update_stencil()
        src = rng.normal(size=shape + (blocks.shape[1],))
        t_np = bench(lambda: _kernels.stencil_apply_numpy(src, offsets, blocks), args.repeat)
        if _kernels.HAVE_NUMBA:
            t_nb = bench(lambda: _kernels.stencil_apply_numba(src, offsets, blocks), args.repeat)
            diff = np.max(np.abs(_kernels.stencil_apply_numba(src, offsets, blocks)
                                 - _kernels.stencil_apply_numpy(src, offsets, blocks)))
            print(f"{name:<26}{t_np:>12.4g}{t_nb:>12.4g}{diff:>12.2e}")
        else:
            print(f"{name:<26}{t_np:>12.4g}{'n/a':>12}{'':>12}")
    for n in (10_000, 1_000_000):
        ql, qr = rng.normal(size=n), rng.normal(size=n)
        t_np = bench(lambda: _kernels.burgers_rusanov_numpy(ql, qr), args.repeat)
        if _kernels.HAVE_NUMBA:
            t_nb = bench(lambda: _kernels.burgers_rusanov_numba(ql, qr), args.repeat)
            diff = max(np.max(np.abs(a - b)) for a, b in
                       zip(_kernels.burgers_rusanov_numba(ql, qr), _kernels.burgers_rusanov_numpy(ql, qr)))
            print(f"{'rusanov n=' + str(n):<26}{t_np:>12.4g}{t_nb:>12.4g}{diff:>12.2e}")
        else:
            print(f"{'rusanov n=' + str(n):<26}{t_np:>12.4g}{'n/a':>12}")


if __name__ == "__main__":
    main()
