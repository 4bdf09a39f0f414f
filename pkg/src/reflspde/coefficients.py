"""Drift ``f(x, s)`` and diffusion ``sigma(x, s)`` coefficients.

Both are vectorised callables taking node coordinates (``(m,)`` for k=1,
``(m, 2)`` for k=2) and state values ``(m,)``.  The drift must be
nondecreasing in the state, the diffusion Lipschitz in the state with a
declared constant; both properties are spot-checked on random samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

Coefficient = Callable[[np.ndarray, np.ndarray], np.ndarray]


class CoefficientError(ValueError):
    """A coefficient failed its monotonicity or Lipschitz spot-check."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


def _broadcast(val, m):
    out = np.asarray(val, dtype=float)
    return np.broadcast_to(out, (m,)).astype(float, copy=True) if out.shape != (m,) else out


def _sample_points(k, m, rng):
    x = rng.uniform(0.0, 1.0, size=(m, k))
    return x[:, 0] if k == 1 else x


@dataclass(frozen=True)
class Drift:
    """Nondecreasing drift ``f(x, s)``.

    ``affine`` holds ``(c0, c1)`` when ``f = c0(x) + c1 * s``; each entry is a
    scalar or a callable of the coordinates.  Only affine drifts can be fed to
    the active-set enumerator.
    """

    func: Coefficient
    deriv: Coefficient | None = None
    affine: tuple | None = None
    label: str = "custom"

    def __call__(self, x, s):
        s = np.asarray(s, dtype=float)
        return _broadcast(self.func(x, s), s.size)

    def derivative(self, x, s):
        s = np.asarray(s, dtype=float)
        if self.deriv is not None:
            d = _broadcast(self.deriv(x, s), s.size)
        else:
            step = 1e-6 * (1.0 + np.abs(s))
            d = (self(x, s + step) - self(x, s - step)) / (2.0 * step)
        return np.maximum(d, 0.0)

    def affine_coeffs(self, x, m):
        if self.affine is None:
            raise CoefficientError(f"drift '{self.label}' is not affine")
        c0, c1 = (c(x) if callable(c) else c for c in self.affine)
        return _broadcast(c0, m), _broadcast(c1, m)

    @classmethod
    def zero(cls):
        return cls(lambda x, s: np.zeros_like(s), lambda x, s: np.zeros_like(s), (0.0, 0.0), "zero")

    @classmethod
    def linear(cls, c0=0.0, c1=0.0):
        if np.any(np.asarray(c1) < 0):
            raise CoefficientError("linear drift needs a nonnegative slope")
        return cls(
            lambda x, s: c0 + c1 * s,
            lambda x, s: np.zeros_like(s) + c1,
            (c0, c1),
            f"linear({c0}, {c1})",
        )

    @classmethod
    def cubic(cls, c0=0.0, c1=0.0, c3=0.0):
        """``c0 + c1*s + c3*s**3`` with ``c1, c3 >= 0``."""
        if c1 < 0 or c3 < 0:
            raise CoefficientError("cubic drift needs nonnegative c1 and c3")
        return cls(
            lambda x, s: c0 + c1 * s + c3 * s**3,
            lambda x, s: c1 + 3.0 * c3 * s**2,
            (c0, c1) if c3 == 0 else None,
            f"cubic({c0}, {c1}, {c3})",
        )

    def augmented(self, upper, epsilon):
        """Drift plus the upper-wall penalty ``(s - upper)^+ / epsilon``.

        ``upper`` is a node array, so the result is only meaningful on the
        grid it came from.
        """
        base = self

        def func(x, s):
            return base(x, s) + np.maximum(s - upper, 0.0) / epsilon

        def deriv(x, s):
            return base.derivative(x, s) + (s > upper) / epsilon

        return Drift(func, deriv, None, f"{self.label}+penalty({epsilon:g})")

    def check_monotone(self, k=1, samples=256, seed=0, span=10.0):
        rng = np.random.default_rng(seed)
        x = _sample_points(k, samples, rng)
        s = np.sort(rng.uniform(-span, span, size=(samples, 2)), axis=1)
        f1, f2 = self(x, s[:, 0]), self(x, s[:, 1])
        bad = np.flatnonzero(f1 > f2 + 1e-12)
        if bad.size:
            i = bad[0]
            pair = (float(s[i, 0]), float(s[i, 1]))
            raise CoefficientError(
                f"drift '{self.label}' is not nondecreasing: f(s1)={f1[i]:.6g} > f(s2)={f2[i]:.6g} "
                f"at s1={pair[0]:.6g}, s2={pair[1]:.6g}",
                pair,
            )


@dataclass(frozen=True)
class Diffusion:
    """Diffusion coefficient ``sigma(x, s)`` with Lipschitz constant ``lipschitz``."""

    func: Coefficient
    lipschitz: float
    label: str = "custom"
    state_free: bool = False

    def __call__(self, x, s):
        s = np.asarray(s, dtype=float)
        return _broadcast(self.func(x, s), s.size)

    @classmethod
    def zero(cls):
        return cls(lambda x, s: np.zeros_like(s), 0.0, "zero", True)

    @classmethod
    def constant(cls, c):
        return cls(lambda x, s: np.full_like(s, c, dtype=float), 0.0, f"constant({c})", True)

    @classmethod
    def linear(cls, a=0.0, b=0.0):
        """``a*s + b``."""
        return cls(lambda x, s: a * s + b, abs(a), f"linear({a}, {b})", a == 0)

    def check_lipschitz(self, k=1, samples=256, seed=0, span=10.0):
        rng = np.random.default_rng(seed)
        x = _sample_points(k, samples, rng)
        s = rng.uniform(-span, span, size=(samples, 2))
        g1, g2 = self(x, s[:, 0]), self(x, s[:, 1])
        bad = np.flatnonzero(np.abs(g1 - g2) > self.lipschitz * np.abs(s[:, 0] - s[:, 1]) + 1e-12)
        if bad.size:
            i = bad[0]
            pair = (float(s[i, 0]), float(s[i, 1]))
            raise CoefficientError(
                f"diffusion '{self.label}' violates the declared Lipschitz constant "
                f"{self.lipschitz:g} at s1={pair[0]:.6g}, s2={pair[1]:.6g}",
                pair,
            )


@dataclass(frozen=True)
class CoefficientPair:
    drift: Drift = field(default_factory=Drift.zero)
    sigma: Diffusion = field(default_factory=Diffusion.zero)
    k: int = 1
    samples: int = 256

    def __post_init__(self):
        self.drift.check_monotone(self.k, self.samples)
        self.sigma.check_lipschitz(self.k, self.samples)

    @property
    def c_sigma(self) -> float:
        return self.sigma.lipschitz
