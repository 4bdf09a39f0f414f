"""Pure-Python/numpy versions of the compiled kernels in ``_ckernels.pyx``."""

import numpy as np


def psor_sweeps(indptr, indices, data, rhs, lo, hi, u, omega, sweeps):
    """Run ``sweeps`` projected SOR sweeps in place; return the last sweep's sup change."""
    n = u.shape[0]
    ip, ix, dv = indptr.tolist(), indices.tolist(), data.tolist()
    r_, lo_, hi_ = rhs.tolist(), lo.tolist(), hi.tolist()
    x = u.tolist()
    maxchange = 0.0
    for _ in range(sweeps):
        maxchange = 0.0
        for i in range(n):
            r = r_[i]
            diag = 0.0
            for p in range(ip[i], ip[i + 1]):
                j = ix[p]
                if j == i:
                    diag = dv[p]
                else:
                    r -= dv[p] * x[j]
            old = x[i]
            new = old + omega * (r / diag - old)
            if new < lo_[i]:
                new = lo_[i]
            elif new > hi_[i]:
                new = hi_[i]
            change = abs(new - old)
            if change > maxchange:
                maxchange = change
            x[i] = new
    u[:] = x
    return maxchange


def enumerate_active_sets(M, b, lo, hi, tol, chunk=8192):
    """Batched-numpy scan of all 3**n free/lower/upper assignments.

    Contact rows are replaced by identity rows pinning the node to its wall, so
    every assignment becomes an ``n x n`` system of the same shape.  Free nodes
    must stay more than ``tol`` away from the walls (see the compiled kernel).
    """
    n = M.shape[0]
    total = 3**n
    powers = 3 ** np.arange(n)
    eye = np.eye(n)
    nfeas, first, best = 0, -1, np.full(n, np.nan)
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total))
        state = (codes[:, None] // powers[None, :]) % 3
        free = state == 0
        S = np.where(free[:, :, None], M[None, :, :], eye[None, :, :])
        rhs = np.where(free, b[None, :], np.where(state == 1, lo[None, :], hi[None, :]))
        u = np.linalg.solve(S, rhs[:, :, None])[:, :, 0]
        lam = u @ M.T - b[None, :]
        ok = np.where(
            free,
            (u > lo + tol) & (u < hi - tol),
            np.where(state == 1, lam >= -tol, lam <= tol),
        ).all(axis=1)
        hits = np.flatnonzero(ok)
        if hits.size:
            if first < 0:
                first = int(codes[hits[0]])
                best = u[hits[0]].copy()
            nfeas += int(hits.size)
    return nfeas, first, best
