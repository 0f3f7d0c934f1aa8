"""Time the box-QP kernel under the numba and pure-numpy backends.

Both kernels are called directly on the same portfolio QPs, so the
comparison is independent of the BATCHSAA_NUMBA flag. Run with
``python benchmarks/bench_qp.py [--n 10 20 50] [--repeat 200]``.
"""

import argparse
import time

import numpy as np

from batchsaa import _kernels
from batchsaa.problems import build_portfolio_qp
from batchsaa.stats import RngStream, sample_gaussian


def make_qps(n, count, nu=500, seed=0):
    qps = []
    for r in range(count):
        data = sample_gaussian(RngStream(seed, r), np.full(n, 0.02), 0.05, nu)
        c, Q = build_portfolio_qp(data, 1.0)
        qps.append((np.ascontiguousarray(Q), c))
    return qps


def run(kernel, power, qps, lo, hi, tol=1e-10, max_iter=50000):
    iters = 0
    start = time.perf_counter()
    for Q, c in qps:
        L = 1.01 * power(Q, 50)
        x, it, _ = kernel(Q, c, lo, hi, 0.5 * (lo + hi), L, tol, max_iter)
        iters += it
    return time.perf_counter() - start, iters


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[10, 20, 50])
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()
    if not _kernels.NUMBA_AVAILABLE:
        print("numba is not installed; only the numpy backend can run")
    print(f"{'n':>4} {'box':>8} {'numpy s':>9} {'numba s':>9} {'speedup':>8} {'iters':>9}")
    for n in args.n:
        qps = make_qps(n, args.repeat)
        for lo_v, hi_v in ((0.0, 1.0), (-5.0, 10.0)):
            lo, hi = np.full(n, lo_v), np.full(n, hi_v)
            t_np, it_np = run(_kernels.box_qp_numpy, _kernels.power_iteration_numpy, qps, lo, hi)
            if _kernels.NUMBA_AVAILABLE:
                run(_kernels.box_qp_numba, _kernels.power_iteration_numba, qps[:1], lo, hi)  # compile
                t_nb, it_nb = run(_kernels.box_qp_numba, _kernels.power_iteration_numba, qps, lo, hi)
                assert it_nb == it_np, "backends took different iteration counts"
                print(f"{n:>4} {f'[{lo_v:g},{hi_v:g}]':>8} {t_np:9.3f} {t_nb:9.3f} {t_np / t_nb:8.1f} {it_np:9d}")
            else:
                print(f"{n:>4} {f'[{lo_v:g},{hi_v:g}]':>8} {t_np:9.3f} {'-':>9} {'-':>8} {it_np:9d}")


if __name__ == "__main__":
    main()
