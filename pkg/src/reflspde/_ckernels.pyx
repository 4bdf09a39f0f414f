# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: projected SOR sweeps and brute-force active-set enumeration.

Mirrors ``_pykernels`` function by function.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()


def psor_sweeps(const int[::1] indptr, const int[::1] indices, const double[::1] data,
                const double[::1] rhs, const double[::1] lo, const double[::1] hi,
                double[::1] u, double omega, int sweeps):
    """Run ``sweeps`` projected SOR sweeps in place; return the last sweep's sup change."""
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i, p, s
    cdef double r, diag, new, change, maxchange = 0.0
    for s in range(sweeps):
        maxchange = 0.0
        for i in range(n):
            r = rhs[i]
            diag = 0.0
            for p in range(indptr[i], indptr[i + 1]):
                if indices[p] == i:
                    diag = data[p]
                else:
                    r -= data[p] * u[indices[p]]
            new = u[i] + omega * (r / diag - u[i])
            if new < lo[i]:
                new = lo[i]
            elif new > hi[i]:
                new = hi[i]
            change = fabs(new - u[i])
            if change > maxchange:
                maxchange = change
            u[i] = new
    return maxchange


cdef int _solve_free(const double[:, ::1] M, const double[::1] b, const int[::1] state,
                     const double[::1] lo, const double[::1] hi,
                     double[:, ::1] work, int[::1] free, double[::1] u, int n) nogil:
    """Fix contact nodes at their wall, solve the free block; return 0 on success."""
    cdef int nf = 0, i, j, c, r, piv
    cdef double acc, best, t
    for i in range(n):
        if state[i] == 1:
            u[i] = lo[i]
        elif state[i] == 2:
            u[i] = hi[i]
        else:
            free[nf] = i
            nf += 1
    # work holds the augmented free system [A_FF | b_F - A_FC u_C]
    for r in range(nf):
        i = free[r]
        acc = b[i]
        for j in range(n):
            if state[j] != 0:
                acc -= M[i, j] * u[j]
        for c in range(nf):
            work[r, c] = M[i, free[c]]
        work[r, nf] = acc
    for c in range(nf):
        piv = c
        best = fabs(work[c, c])
        for r in range(c + 1, nf):
            if fabs(work[r, c]) > best:
                best = fabs(work[r, c])
                piv = r
        if best == 0.0:
            return 1
        if piv != c:
            for j in range(c, nf + 1):
                t = work[c, j]
                work[c, j] = work[piv, j]
                work[piv, j] = t
        for r in range(c + 1, nf):
            t = work[r, c] / work[c, c]
            if t != 0.0:
                for j in range(c, nf + 1):
                    work[r, j] -= t * work[c, j]
    for r in range(nf - 1, -1, -1):
        acc = work[r, nf]
        for c in range(r + 1, nf):
            acc -= work[r, c] * u[free[c]]
        u[free[r]] = acc / work[r, r]
    return 0


def enumerate_active_sets(const double[:, ::1] M, const double[::1] b, const double[::1] lo,
                          const double[::1] hi, double tol):
    """Scan all 3**n free/lower/upper assignments of the bilateral LCP
    ``M u = b + lambda``.

    A node within ``tol`` of a wall only counts as feasible in contact, so
    degenerate contacts (zero multiplier) do not produce duplicate
    assignments.  Returns ``(n_feasible, first_code, u)`` where ``u`` solves
    the first feasible assignment (NaN-filled if none).
    """
    cdef int n = M.shape[0]
    cdef long total = 1, code, rem
    cdef int i, j, ok, nfeas = 0
    cdef long first = -1
    cdef double lam
    for i in range(n):
        total *= 3
    state_arr = np.zeros(n, dtype=np.int32)
    free_arr = np.zeros(n, dtype=np.int32)
    cdef int[::1] state = state_arr
    cdef int[::1] free = free_arr
    cdef double[:, ::1] work = np.zeros((n, n + 1))
    cdef double[::1] u = np.zeros(n)
    best = np.full(n, np.nan)
    cdef double[::1] best_u = best
    with nogil:
        for code in range(total):
            rem = code
            for i in range(n):
                state[i] = rem % 3
                rem = rem // 3
            if _solve_free(M, b, state, lo, hi, work, free, u, n) != 0:
                continue
            ok = 1
            for i in range(n):
                lam = -b[i]
                for j in range(n):
                    lam += M[i, j] * u[j]
                if state[i] == 0:
                    if u[i] <= lo[i] + tol or u[i] >= hi[i] - tol:
                        ok = 0
                        break
                elif state[i] == 1:
                    if lam < -tol:
                        ok = 0
                        break
                else:
                    if lam > tol:
                        ok = 0
                        break
            if ok:
                nfeas += 1
                if first < 0:
                    first = code
                    for i in range(n):
                        best_u[i] = u[i]
    return nfeas, first, best
