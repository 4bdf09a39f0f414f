"""Dirichlet Green functions on the unit interval and unit square.

The discrete kernel is normalised so that ``g @ phi * cell_volume``
approximates ``∫ G(x, y) phi(y) dy``; equivalently, column j solves
``-Δ_h g_j = e_j / cell_volume``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .grid import Grid, GridError

DEFAULT_NODE_CAP = 64 * 64


@dataclass(frozen=True)
class GreenKernel:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        N = self.grid.size
        if self.values.shape != (N, N):
            raise GridError(f"kernel shape {self.values.shape} does not match grid with {N} nodes")
        self.values.setflags(write=False)

    def apply(self, density) -> np.ndarray:
        """Approximate ``∫ G(x, y) density(y) dy`` at every node."""
        return self.values @ self.grid.check(density) * self.grid.cell_volume

    def to_csv(self, path) -> None:
        pts = self.grid.coords()
        label = [",".join(f"{c:.17g}" for c in p) for p in pts]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "j", "x_i", "y_j", "g"])
            for i in range(self.grid.size):
                for j in range(self.grid.size):
                    w.writerow([i, j, label[i], label[j], repr(float(self.values[i, j]))])


def green_1d_analytic(x, y):
    """Green function of ``-d²/dx²`` on (0,1) with zero boundary values,
    ``min(x, y) - x*y``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any((x < 0) | (x > 1) | (y < 0) | (y > 1)):
        raise ValueError("Green function arguments must lie in [0, 1]")
    out = np.minimum(x, y) - x * y
    return float(out) if out.ndim == 0 else out


def discrete_green(grid: Grid, node_cap: int = DEFAULT_NODE_CAP) -> GreenKernel:
    """Dense discrete Green kernel of the negative Dirichlet Laplacian."""
    N = grid.size
    if N > node_cap:
        raise GridError(f"dense kernel needs {N} nodes, cap is {node_cap}")
    A = grid.laplacian.toarray()
    rhs = np.eye(N) / grid.cell_volume
    if grid.k == 1:
        # symmetric tridiagonal: banded Cholesky-free solve
        ab = np.zeros((3, N))
        ab[0, 1:] = np.diag(A, 1)
        ab[1] = np.diag(A)
        ab[2, :-1] = np.diag(A, -1)
        g = sla.solve_banded((1, 1), ab, rhs)
    else:
        g = sla.solve(A, rhs, assume_a="pos")
    g = 0.5 * (g + g.T)
    return GreenKernel(grid, g)


def green_sup_l2(grid: Grid, kernel: GreenKernel) -> float:
    """C_D estimate: ``max_i Σ_j g[i, j]² · cell_volume``."""
    if kernel.grid != grid:
        raise GridError("kernel was built on a different grid")
    return float(np.max(np.sum(kernel.values**2, axis=1)) * grid.cell_volume)


def _lambda_range_ok(k: int, lam: float) -> bool:
    if k == 1:
        return 0.0 < lam <= 1.0
    if k == 2:
        return 0.0 < lam < 1.0
    return 0.0 < lam < 0.5


def green_holder_constant(grid: Grid, kernel: GreenKernel, lam: float) -> float:
    """Empirical Hölder constant B̂ for the L² modulus of the kernel rows.

    Returns the maximum over node pairs ``x != y`` of
    ``Σ_z (g[x, z] - g[y, z])² · cell_volume / |x - y|^(2 lam)``.  This is a
    lower bound for any constant B valid on the continuum domain.
    """
    if kernel.grid != grid:
        raise GridError("kernel was built on a different grid")
    if not _lambda_range_ok(grid.k, lam):
        raise ValueError(f"Hölder exponent {lam} outside the admissible range for k={grid.k}")
    g = kernel.values
    pts = grid.coords()
    sq = np.sum(g * g, axis=1)
    gram = g @ g.T
    # |g_i - g_j|^2 through the Gram matrix; clamp the rounding-negative part
    num = np.maximum(sq[:, None] + sq[None, :] - 2.0 * gram, 0.0) * grid.cell_volume
    dist2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
    np.fill_diagonal(dist2, np.inf)
    return float(np.max(num / dist2**lam))
