"""Time the compiled and pure-Python kernels on identical inputs.

    python benchmarks/bench_kernels.py --n 199 --sweeps 500 --enum-nodes 9
"""

import argparse
import time

import numpy as np
import scipy.sparse as sp

from reflspde import kernels
from reflspde.grid import build_grid


def _psor_inputs(n, seed):
    g = build_grid(1, n)
    rng = np.random.default_rng(seed)
    M = (g.laplacian + sp.diags(rng.uniform(0, 1, n))).tocsr()
    M.sort_indices()
    rhs = 4.0 * (1 + rng.normal(0, 0.1, n)) * 8.0
    lo, hi = np.full(n, -0.5), np.full(n, 0.5)
    return (M.indptr.astype(np.int32), M.indices.astype(np.int32), M.data.astype(float), rhs, lo, hi)


def _enum_inputs(n, seed):
    g = build_grid(1, n)
    rng = np.random.default_rng(seed)
    M = np.ascontiguousarray(g.laplacian.toarray() * g.spacing**2 / 2 + np.diag(rng.uniform(0, 0.1, n)))
    b = rng.normal(0, 0.3, n)
    return M, b, np.full(n, -0.5), np.full(n, 0.5)


def _best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=199, help="PSOR grid nodes")
    ap.add_argument("--sweeps", type=int, default=500)
    ap.add_argument("--enum-nodes", type=int, default=9)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    impls = kernels.backends()
    if "cython" not in impls:
        print("compiled extension not available; only the Python backend is timed")

    psor = _psor_inputs(args.n, args.seed)
    enum = _enum_inputs(args.enum_nodes, args.seed)
    rows, ref = [], {}
    for name, mod in impls.items():
        def run_psor():
            x = np.zeros(args.n)
            mod.psor_sweeps(*psor, x, 1.5, args.sweeps)
            return x

        t_psor, u = _best_of(run_psor, args.repeat)
        t_enum, res = _best_of(lambda: mod.enumerate_active_sets(*enum, 1e-11), args.repeat)
        ref[name] = (u, np.asarray(res[2]))
        rows.append((name, t_psor, t_enum))

    print(f"{'backend':<8} {'psor (s)':>10} {'enum (s)':>10}   n={args.n} sweeps={args.sweeps} "
          f"3^{args.enum_nodes} assignments")
    for name, tp, te in rows:
        print(f"{name:<8} {tp:>10.4f} {te:>10.4f}")
    if len(rows) == 2:
        (_, p0, e0), (_, p1, e1) = sorted(rows, key=lambda r: r[0] != "cython")
        print(f"speed-up of compiled kernels: psor x{p1 / p0:.1f}, enumeration x{e1 / e0:.1f}")
        du = np.max(np.abs(ref["cython"][0] - ref["python"][0]))
        de = np.max(np.abs(ref["cython"][1] - ref["python"][1]))
        print(f"max backend difference: psor {du:.1e}, enumeration {de:.1e}")


if __name__ == "__main__":
    main()
