"""Uniform interior grids on (0,1)^k and the discrete Dirichlet Laplacian.

Fields are plain 1-D float arrays holding one value per interior node, in
row-major (x fastest last) order for k=2.  Boundary values are implicitly 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp


class GridError(ValueError):
    """Invalid grid construction or a field that does not live on the grid."""


@dataclass(frozen=True)
class Grid:
    """Interior nodes of a uniform mesh of the unit interval or unit square.

    Parameters
    ----------
    k : int
        Spatial dimension, 1 or 2.
    n : int
        Interior nodes per axis.
    """

    k: int
    n: int

    def __post_init__(self):
        if self.k not in (1, 2):
            raise GridError(f"dimension must be 1 or 2, got k={self.k}")
        if self.n < 2:
            raise GridError(f"need at least 2 interior nodes per axis, got n={self.n}")

    @property
    def spacing(self) -> float:
        return 1.0 / (self.n + 1)

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.k

    @property
    def size(self) -> int:
        """Total number of interior nodes, ``n**k``."""
        return self.n**self.k

    @property
    def diameter(self) -> float:
        """Diameter r_D of the domain: 1 for (0,1), sqrt(2) for the unit square."""
        return float(np.sqrt(self.k))

    @cached_property
    def axis(self) -> np.ndarray:
        return np.arange(1, self.n + 1) * self.spacing

    @cached_property
    def points(self) -> np.ndarray:
        """Node coordinates: shape ``(n,)`` for k=1 and ``(n*n, 2)`` for k=2."""
        if self.k == 1:
            return self.axis.copy()
        X, Y = np.meshgrid(self.axis, self.axis, indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])

    def coords(self) -> np.ndarray:
        """Coordinates as an ``(size, k)`` array regardless of dimension."""
        return self.points.reshape(self.size, self.k)

    def boundary_points(self, per_side: int | None = None) -> np.ndarray:
        """Evaluation points on the boundary of the domain, in the same layout as
        :attr:`points`."""
        if self.k == 1:
            return np.array([0.0, 1.0])
        m = per_side or (self.n + 2)
        t = np.linspace(0.0, 1.0, m)
        zero, one = np.zeros(m), np.ones(m)
        return np.vstack([
            np.column_stack([t, zero]),
            np.column_stack([t, one]),
            np.column_stack([zero, t]),
            np.column_stack([one, t]),
        ])

    def check(self, field, name: str = "field") -> np.ndarray:
        """Return ``field`` as a float array after checking it lives on this grid."""
        arr = np.asarray(field, dtype=float)
        if arr.ndim == 0:
            return np.full(self.size, float(arr))
        arr = arr.reshape(-1)
        if arr.size != self.size:
            raise GridError(f"{name} has {arr.size} values, grid has {self.size} nodes")
        if not np.all(np.isfinite(arr)):
            raise GridError(f"{name} contains non-finite values")
        return arr

    @cached_property
    def laplacian(self) -> sp.csr_matrix:
        """Sparse matrix of the negative discrete Laplacian ``-Δ_h``."""
        n, h2 = self.n, self.spacing**2
        T = sp.diags([-np.ones(n - 1), 2.0 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1])
        if self.k == 1:
            A = T
        else:
            eye = sp.identity(n)
            A = sp.kron(T, eye) + sp.kron(eye, T)
        A = (A / h2).tocsr()
        A.sort_indices()
        return A

    def __repr__(self):
        return f"Grid(k={self.k}, n={self.n})"


def build_grid(k: int, n: int) -> Grid:
    return Grid(int(k), int(n))


def laplacian_apply(grid: Grid, field) -> np.ndarray:
    """Apply the negative five-point (three-point in 1D) Laplacian with zero
    Dirichlet data.

    >>> laplacian_apply(build_grid(1, 3), [1.0, 0.0, 0.0])
    array([ 32., -16.,   0.])
    """
    f = grid.check(field)
    n, h2 = grid.n, grid.spacing**2
    if grid.k == 1:
        p = np.pad(f, 1)
        return (2.0 * p[1:-1] - p[:-2] - p[2:]) / h2
    p = np.pad(f.reshape(n, n), 1)
    out = 4.0 * p[1:-1, 1:-1] - p[:-2, 1:-1] - p[2:, 1:-1] - p[1:-1, :-2] - p[1:-1, 2:]
    return out.ravel() / h2
