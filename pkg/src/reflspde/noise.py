"""Cellwise space white noise and the Green-kernel stochastic convolution."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .coefficients import CoefficientPair
from .green import GreenKernel
from .grid import Grid, GridError


def derive_seed(base_seed: int, replicate: int) -> int:
    """64-bit stream seed for replicate ``replicate`` of an ensemble."""
    ss = np.random.SeedSequence(int(base_seed), spawn_key=(int(replicate),))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class NoiseSample:
    """One realisation of ``W`` on the grid cells: ``increments[j] ~ N(0, cell_volume)``."""

    grid: Grid
    increments: np.ndarray
    seed: int

    def to_csv(self, path) -> None:
        pts = self.grid.coords()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["j", "x_j", "dW"])
            for j, dw in enumerate(self.increments):
                w.writerow([j, ",".join(f"{c:.17g}" for c in pts[j]), repr(float(dw))])


def sample_white_noise(grid: Grid, seed: int) -> NoiseSample:
    # PCG64 + ziggurat normals; changing either breaks bit-reproducibility of old runs
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    dw = rng.standard_normal(grid.size) * np.sqrt(grid.cell_volume)
    dw.setflags(write=False)
    return NoiseSample(grid, dw, int(seed))


def stochastic_convolution(kernel: GreenKernel, coeff: CoefficientPair, u, noise: NoiseSample) -> np.ndarray:
    """``v[i] = Σ_j g[i, j] σ(y_j, u[j]) ΔW_j``.

    The increments already carry the cell measure, so no extra volume factor
    appears.
    """
    grid = kernel.grid
    if noise.grid != grid:
        raise GridError("noise sample and kernel live on different grids")
    u = grid.check(u, "u")
    weights = coeff.sigma(grid.points, u) * noise.increments
    return kernel.values @ weights
