"""Deterministic elliptic problems with one or two reflecting walls.

All solvers work on the discrete system

    (-Δ_h z)[i] + f(x_i, z[i] + v[i]) = (eta[i] - xi[i]) / cell_volume,
    lower[i] <= z[i] + v[i] <= upper[i],

with eta supported where ``u = z + v`` touches the lower wall and xi where it
touches the upper wall.  Internally the unknown is ``u``.

Solvers
-------
solve_penalized
    Lower and upper penalties at fixed (epsilon, delta), semismooth Newton.
solve_single_wall
    Exact lower wall, optionally with the upper wall penalised into the drift.
solve_two_wall
    Decreasing epsilon schedule of single-wall problems, closed by an exact
    two-wall semismooth Newton solve seeded from the last stage.
solve_psor, solve_active_set_enum
    Independent cross-checks (projected SOR; brute-force enumeration of all
    contact assignments for small affine problems).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from . import kernels
from .coefficients import Drift
from .grid import Grid, GridError, laplacian_apply

logger = logging.getLogger(__name__)

LINE_SEARCH_FLOOR = 2.0**-20


class WallError(ValueError):
    """The walls violate the ordering or boundary conditions."""


class ConvergenceError(RuntimeError):
    def __init__(self, message, residual=np.nan, iterate=None):
        super().__init__(message)
        self.residual = residual
        self.iterate = iterate


class MeasureError(RuntimeError):
    """Residual of the wrong sign on a contact set, or residual mass off the contact sets."""


class EnumerationError(RuntimeError):
    """Active-set enumeration found zero or several feasible assignments."""


def contact_tolerance(*walls) -> float:
    top = max((float(np.max(np.abs(w[np.isfinite(w)]), initial=0.0)) for w in walls), default=0.0)
    return 1e-7 * (1.0 + top)


def _eval_wall(spec, pts, m):
    if callable(spec):
        out = np.asarray(spec(pts), dtype=float)
    else:
        out = np.asarray(spec, dtype=float)
    return np.broadcast_to(out, (m,)).astype(float) if out.shape != (m,) else out.astype(float)


@dataclass(frozen=True)
class WallPair:
    """Lower and upper walls at the interior nodes, strictly separated."""

    grid: Grid
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = self.grid.check(self.lower, "lower wall")
        hi = self.grid.check(self.upper, "upper wall")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        gap = hi - lo
        bad = np.flatnonzero(gap <= 0)
        if bad.size:
            i = bad[0]
            raise WallError(
                f"wall ordering violated: lower={lo[i]:.6g} >= upper={hi[i]:.6g} at node {i}"
            )
        tight = np.flatnonzero(gap < 10.0 * self.contact_tol)
        if tight.size:
            raise WallError(f"walls nearly touch at node {tight[0]} (gap {gap[tight[0]]:.3g})")

    @property
    def contact_tol(self) -> float:
        return contact_tolerance(self.lower, self.upper)

    @classmethod
    def from_functions(cls, grid: Grid, lower, upper):
        """Build from callables of the coordinates (or constants), checking
        ``lower <= 0 <= upper`` on the boundary."""
        pts = grid.points
        pair = cls(grid, _eval_wall(lower, pts, grid.size), _eval_wall(upper, pts, grid.size))
        bpts = grid.boundary_points()
        m = len(bpts)
        blo, bhi = _eval_wall(lower, bpts, m), _eval_wall(upper, bpts, m)
        bad = np.flatnonzero((blo > 0) | (bhi < 0))
        if bad.size:
            i = bad[0]
            raise WallError(
                f"walls must satisfy lower <= 0 <= upper on the boundary; "
                f"got lower={blo[i]:.6g}, upper={bhi[i]:.6g} at {bpts[i]}"
            )
        return pair

    @classmethod
    def constant(cls, grid: Grid, lower: float, upper: float):
        return cls.from_functions(grid, lower, upper)


@dataclass(frozen=True)
class PenaltyParams:
    """Penalty scales and the geometric schedule driving them to zero.

    ``epsilon`` penalises the upper wall, ``delta`` the lower one.  The
    double-limit schedule uses ``epsilon * rho**m`` for ``m < stages`` with
    ``delta = delta_ratio * epsilon`` inside each stage.
    """

    epsilon: float = 1e-2
    delta: float = 1e-4
    rho: float = 0.25
    stages: int = 8
    delta_ratio: float = 1e-2

    def __post_init__(self):
        if not (self.epsilon > 0 and self.delta > 0 and self.delta_ratio > 0):
            raise ValueError("penalty scales must be positive")
        if not 0 < self.rho < 1:
            raise ValueError(f"schedule factor must lie in (0, 1), got {self.rho}")
        if self.stages < 1:
            raise ValueError("need at least one stage")

    def schedule(self):
        return [self.epsilon * self.rho**m for m in range(self.stages)]


@dataclass(frozen=True)
class ReflectionMeasures:
    """Node masses of eta (lower wall) and xi (upper wall)."""

    eta: np.ndarray
    xi: np.ndarray

    @property
    def eta_mass(self) -> float:
        return float(np.sum(self.eta))

    @property
    def xi_mass(self) -> float:
        return float(np.sum(self.xi))


@dataclass
class SolutionTriplet:
    u: np.ndarray
    measures: ReflectionMeasures
    z: np.ndarray
    v: np.ndarray
    residual: np.ndarray
    report: "SolutionReport | None" = None
    stages: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def eta(self):
        return self.measures.eta

    @property
    def xi(self):
        return self.measures.xi


@dataclass(frozen=True)
class Tolerances:
    wall: float = 1e-9
    identity: float = 1e-8
    complementarity: float = 1e-10


@dataclass(frozen=True)
class ClauseResult:
    value: float
    passed: bool
    index: int | None = None


@dataclass
class SolutionReport:
    clauses: dict

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses.values())

    def failures(self):
        return [name for name, c in self.clauses.items() if not c.passed]

    def as_dict(self):
        return {
            name: {"value": c.value, "passed": c.passed, "index": c.index}
            for name, c in self.clauses.items()
        }


class _System:
    """Discrete operator ``F(u) = A (u - v) + f(x, u)`` on one grid."""

    def __init__(self, grid: Grid, drift: Drift, v):
        self.grid = grid
        self.drift = drift
        self.v = grid.check(v, "v")
        self.A = grid.laplacian
        self.pts = grid.points
        self.Av = laplacian_apply(grid, self.v)
        if grid.k == 1:
            self.offdiag = -np.ones(grid.n - 1) / grid.spacing**2
        # branch selection scale in the complementarity function
        self.c = grid.spacing**2 / (2.0 * grid.k)

    def F(self, u, drift=None):
        d = drift or self.drift
        return laplacian_apply(self.grid, u) - self.Av + d(self.pts, u)

    def dF(self, u, drift=None):
        d = drift or self.drift
        return d.derivative(self.pts, u)

    def solve(self, d, rhs, free=None):
        """Solve ``J x = rhs`` where free rows of J are ``A + diag(d)`` and
        the other rows are identity rows."""
        A = self.A
        N = self.grid.size
        if free is None:
            free = np.ones(N, dtype=bool)
        diag = np.where(free, A.diagonal() + d, 1.0)
        if self.grid.k == 1:
            ab = np.zeros((3, N))
            ab[0, 1:] = self.offdiag * free[:-1]
            ab[1] = diag
            ab[2, :-1] = self.offdiag * free[1:]
            return sla.solve_banded((1, 1), ab, rhs, check_finite=False)
        F = sp.diags(free.astype(float))
        J = F @ (A - sp.diags(A.diagonal())) + sp.diags(diag)
        return spsolve(J.tocsc(), rhs)


def _initial_u(sysm, lower, upper, z0):
    z = np.zeros(sysm.grid.size) if z0 is None else sysm.grid.check(z0, "initial guess")
    return np.clip(z + sysm.v, lower, upper)


def _penalized_newton(sysm, drift, lower, delta, upper, epsilon, u0, tol, max_iter=200):
    """Damped semismooth Newton for
    ``F(u) - (u - lower)^- / delta + (u - upper)^+ / epsilon = 0``."""

    def residual(u):
        r = sysm.F(u, drift)
        if delta is not None:
            r = r - np.maximum(lower - u, 0.0) / delta
        if epsilon is not None:
            r = r + np.maximum(u - upper, 0.0) / epsilon
        return r

    u = u0.copy()
    r = residual(u)
    norm = np.linalg.norm(r)
    # residual entries are differences of O(|A u|) terms; measure tol against that scale
    scale = 1.0 + np.max(np.abs(sysm.Av)) + np.max(np.abs(laplacian_apply(sysm.grid, u)))
    for it in range(max_iter):
        if np.max(np.abs(r)) <= tol * scale:
            return u, it
        d = sysm.dF(u, drift)
        if delta is not None:
            d = d + (u < lower) / delta
        if epsilon is not None:
            d = d + (u > upper) / epsilon
        step = sysm.solve(d, -r)
        t = 1.0
        while True:
            trial = u + t * step
            r_trial = residual(trial)
            n_trial = np.linalg.norm(r_trial)
            if n_trial < norm or t <= LINE_SEARCH_FLOOR:
                break
            t *= 0.5
        if t <= LINE_SEARCH_FLOOR and n_trial >= norm:
            # stalled line search: the semismooth kink is the usual culprit, take the full step
            trial = u + step
            r_trial = residual(trial)
            n_trial = np.linalg.norm(r_trial)
        stagnant = np.max(np.abs(trial - u)) <= 1e-15 * (1.0 + np.max(np.abs(u)))
        u, r, norm = trial, r_trial, n_trial
        if stagnant and np.max(np.abs(r)) <= 1e3 * tol * scale:
            return u, it + 1
    res = float(np.max(np.abs(r)))
    if res <= tol * scale:
        return u, max_iter
    raise ConvergenceError(f"penalized Newton did not converge, residual {res:.3e}", res, u)


def _complementarity_newton(sysm, drift, lower, upper, u0, tol=1e-12, max_iter=100):
    """Semismooth Newton on ``max(min(c F(u), u - lower), u - upper) = 0``.

    ``upper`` may contain ``inf``.  Returns ``(u, lower_set, upper_set, iterations)``
    with contact nodes pinned exactly to their wall.
    """
    c = sysm.c
    scale = 1.0 + max(np.max(np.abs(lower[np.isfinite(lower)]), initial=0.0),
                      np.max(np.abs(upper[np.isfinite(upper)]), initial=0.0))
    u = np.clip(u0, lower, upper)

    def branches(u, Fu):
        cf = c * Fu
        lo_gap, hi_gap = u - lower, u - upper
        inner = np.minimum(cf, lo_gap)
        G = np.maximum(inner, hi_gap)
        up = hi_gap >= inner
        lo = ~up & (lo_gap < cf)
        return G, lo, up

    Fu = sysm.F(u, drift)
    G, lo, up = branches(u, Fu)
    norm = np.linalg.norm(G)
    prev_sets = None
    for it in range(1, max_iter + 1):
        free = ~(lo | up)
        rhs = np.where(free, -Fu, np.where(lo, lower - u, upper - u))
        rhs = np.where(np.isfinite(rhs), rhs, 0.0)
        step = sysm.solve(sysm.dF(u, drift), rhs, free)
        t = 1.0
        while True:
            trial = u + t * step
            F_trial = sysm.F(trial, drift)
            G_trial, lo_t, up_t = branches(trial, F_trial)
            n_trial = np.linalg.norm(G_trial)
            if n_trial < norm or t <= LINE_SEARCH_FLOOR or n_trial == 0.0:
                break
            t *= 0.5
        if t <= LINE_SEARCH_FLOOR and n_trial >= norm:
            trial = u + step
            F_trial = sysm.F(trial, drift)
            G_trial, lo_t, up_t = branches(trial, F_trial)
            n_trial = np.linalg.norm(G_trial)
        u, Fu, G, norm = trial, F_trial, G_trial, n_trial
        sets = (lo_t.tobytes(), up_t.tobytes())
        lo, up = lo_t, up_t
        if np.max(np.abs(G)) <= tol * scale or (sets == prev_sets and np.max(np.abs(t * step)) <= tol * scale):
            u = u.copy()
            u[lo] = lower[lo]
            u[up] = upper[up]
            return np.clip(u, lower, upper), lo, up, it
        prev_sets = sets
    res = float(np.max(np.abs(G)))
    raise ConvergenceError(f"complementarity Newton did not converge, residual {res:.3e}", res, u)


def _split(r_mass, u, lower, upper, contact_tol):
    on_lo = u <= lower + contact_tol
    on_hi = u >= upper - contact_tol
    eta = np.where(on_lo, np.maximum(r_mass, 0.0), 0.0)
    xi = np.where(on_hi, np.maximum(-r_mass, 0.0), 0.0)
    return eta, xi


def _measures_from_residual(grid, r, u, lower, upper, tol_mass, contact_tol=None):
    cv = grid.cell_volume
    if contact_tol is None:
        contact_tol = contact_tolerance(lower, upper)
    r_mass = r * cv
    eta, xi = _split(r_mass, u, lower, upper, contact_tol)
    leftover = r_mass - (eta - xi)
    worst = float(np.max(np.abs(leftover), initial=0.0))
    if worst > tol_mass:
        i = int(np.argmax(np.abs(leftover)))
        raise MeasureError(
            f"residual mass {leftover[i]:.3e} at node {i} is not carried by a contact set "
            f"(u={u[i]:.6g}, walls=[{lower[i]:.6g}, {upper[i]:.6g}])"
        )
    return ReflectionMeasures(eta, xi), leftover


def solve_penalized(grid: Grid, drift: Drift, v, walls: WallPair, params: PenaltyParams = PenaltyParams(),
                    tol: float = 1e-9, z0=None, max_iter: int = 200) -> np.ndarray:
    """Penalised approximation ``z^{eps,delta}`` of the two-wall problem.

    Solves ``-Δ_h z + f(z+v) = (z+v-lower)^-/delta - (z+v-upper)^+/epsilon``
    to a sup-norm residual of ``tol``.
    """
    if walls.grid != grid:
        raise GridError("walls live on a different grid")
    sysm = _System(grid, drift, v)
    u0 = _initial_u(sysm, walls.lower, walls.upper, z0)
    u, _ = _penalized_newton(sysm, drift, walls.lower, params.delta, walls.upper, params.epsilon,
                             u0, tol, max_iter)
    return u - sysm.v


def solve_single_wall(grid: Grid, drift: Drift, v, lower, upper=None, epsilon: float | None = None,
                      delta: float | None = None, tol: float = 1e-9, tol_mass: float = 1e-8, z0=None):
    """Lower-wall problem, optionally with ``(. + v - upper)^+ / epsilon`` added
    to the drift.

    The lower constraint is enforced exactly; ``delta`` only sets the lower
    penalty of the warm-start solve.  Returns ``(z, eta)``.
    """
    lower = grid.check(lower, "lower wall")
    sysm = _System(grid, drift, v)
    if epsilon is not None:
        upper = grid.check(upper, "upper wall")
        eff = drift.augmented(upper, epsilon)
    else:
        eff = drift
    delta = delta if delta is not None else (1e-2 * epsilon if epsilon is not None else 1e-4)
    hi = np.full(grid.size, np.inf)
    u0 = _initial_u(sysm, lower, hi, z0)
    u_pen, _ = _penalized_newton(sysm, eff, lower, delta, None, None, u0, tol)
    u, lo_set, _, _ = _complementarity_newton(sysm, eff, lower, hi, u_pen)
    r = sysm.F(u, eff)
    measures, _ = _measures_from_residual(grid, r, u, lower, hi, tol_mass, contact_tolerance(lower))
    return u - sysm.v, measures.eta


def solve_two_wall(grid: Grid, drift: Drift, v, walls: WallPair, params: PenaltyParams = PenaltyParams(),
                   tol: float = 1e-9, z0=None, tolerances: Tolerances = Tolerances(),
                   tol_mass: float = 1e-8) -> SolutionTriplet:
    """Two-wall solution built as the limit of single-wall problems.

    For each epsilon in the schedule the lower-wall problem with drift
    ``f + (. + v - upper)^+ / epsilon`` is solved; the resulting ``z^eps``
    decrease as epsilon decreases.  The limit is then closed exactly by a
    semismooth Newton solve of the bilateral complementarity system started
    from the last stage.  ``triplet.stages`` holds every ``z^eps``.
    """
    if walls.grid != grid:
        raise GridError("walls live on a different grid")
    sysm = _System(grid, drift, v)
    z = None if z0 is None else grid.check(z0, "initial guess")
    stages, changes = [], []
    for eps in params.schedule():
        z_eps, _ = solve_single_wall(grid, drift, sysm.v, walls.lower, walls.upper, eps,
                                     params.delta_ratio * eps, tol, tol_mass=np.inf, z0=z)
        if stages:
            changes.append(float(np.max(np.abs(z_eps - stages[-1]))))
        stages.append(z_eps)
        z = z_eps
    u0 = z + sysm.v
    u, _, _, its = _complementarity_newton(sysm, drift, walls.lower, walls.upper, u0)
    triplet = _assemble(grid, sysm, drift, u, walls, tol_mass, tolerances)
    triplet.stages = stages
    triplet.info.update(method="double-limit", stage_changes=changes, final_newton_iterations=its,
                        epsilons=params.schedule())
    return triplet


def _assemble(grid, sysm, drift, u, walls, tol_mass, tolerances):
    z = u - sysm.v
    r = sysm.F(u, drift)
    measures, leftover = _measures_from_residual(grid, r, u, walls.lower, walls.upper, tol_mass,
                                                 walls.contact_tol)
    triplet = SolutionTriplet(u=u, measures=measures, z=z, v=sysm.v, residual=leftover)
    triplet.report = check_solution(triplet, walls, drift, sysm.v, tolerances)
    return triplet


def _default_omega(grid):
    return 2.0 / (1.0 + np.sin(np.pi * grid.spacing))


def solve_psor(grid: Grid, drift: Drift, v, walls: WallPair, tol: float = 1e-11,
               omega: float | None = None, max_sweeps: int = 2_000_000, max_outer: int = 100,
               tol_mass: float = 1e-8, tolerances: Tolerances = Tolerances(), batch: int = 64,
               trace=None) -> SolutionTriplet:
    """Projected SOR on the bilateral complementarity system.

    A nonlinear drift is linearised around the previous outer iterate
    (``f(u_k) + f'(u_k) (u - u_k)``) and the resulting linear problem is swept
    until the sup change drops below ``0.1 * tol``.  ``trace`` (a list) receives
    every inner iterate when given.
    """
    if walls.grid != grid:
        raise GridError("walls live on a different grid")
    omega = _default_omega(grid) if omega is None else float(omega)
    if not 0 < omega < 2:
        raise ValueError(f"relaxation factor must lie in (0, 2), got {omega}")
    sysm = _System(grid, drift, v)
    lo, hi = walls.lower, walls.upper
    u = _initial_u(sysm, lo, hi, None)
    A = grid.laplacian
    sweeps_done = 0
    for outer in range(1, max_outer + 1):
        d = sysm.dF(u)
        M = (A + sp.diags(d)).tocsr()
        M.sort_indices()
        rhs = sysm.Av - drift(sysm.pts, u) + d * u
        indptr = M.indptr.astype(np.int32)
        indices = M.indices.astype(np.int32)
        data = M.data.astype(float)
        u_start = u.copy()
        while True:
            n = 1 if trace is not None else batch
            change = kernels.psor_sweeps(indptr, indices, data, rhs, lo, hi, u, omega, n)
            sweeps_done += n
            if trace is not None:
                trace.append(u.copy())
            if change <= 0.1 * tol:
                break
            if sweeps_done >= max_sweeps:
                raise ConvergenceError(f"PSOR exceeded {max_sweeps} sweeps (last change {change:.3e})",
                                       change, u)
        outer_change = float(np.max(np.abs(u - u_start)))
        G = np.maximum(np.minimum(sysm.c * sysm.F(u), u - lo), u - hi)
        if outer_change <= 0.1 * tol and np.max(np.abs(G)) <= tol_mass:
            break
    else:
        raise ConvergenceError("PSOR outer linearisation did not converge", outer_change, u)
    triplet = _assemble(grid, sysm, drift, u, walls, tol_mass, tolerances)
    triplet.info.update(method="psor", omega=omega, sweeps=sweeps_done, outer=outer)
    return triplet


ENUM_NODE_CAP = 12


def solve_active_set_enum(grid: Grid, drift: Drift, v, walls: WallPair, tol: float = 1e-11,
                          tol_mass: float = 1e-8, tolerances: Tolerances = Tolerances()) -> SolutionTriplet:
    """Exact discrete solution by trying every free/lower/upper node assignment.

    Only for affine drifts ``c0(x) + c1(x) s`` with ``c1 >= 0`` and at most 12
    nodes.  Raises :class:`EnumerationError` unless exactly one assignment is
    feasible.
    """
    if walls.grid != grid:
        raise GridError("walls live on a different grid")
    N = grid.size
    if N > ENUM_NODE_CAP:
        raise GridError(f"enumeration is limited to {ENUM_NODE_CAP} nodes, grid has {N}")
    sysm = _System(grid, drift, v)
    c0, c1 = drift.affine_coeffs(sysm.pts, N)
    if np.any(c1 < 0):
        raise ValueError("affine drift slope must be nonnegative")
    # scale rows so the multipliers are in the units of u
    c = sysm.c
    M = np.ascontiguousarray(c * (grid.laplacian.toarray() + np.diag(c1)))
    b = np.ascontiguousarray(c * (sysm.Av - c0))
    nfeas, code, u = kernels.enumerate_active_sets(M, b, walls.lower, walls.upper, tol)
    if nfeas != 1:
        raise EnumerationError(f"{nfeas} feasible assignments found (expected exactly one)")
    u = np.asarray(u)
    state = (code // 3 ** np.arange(N)) % 3
    triplet = _assemble(grid, sysm, drift, u, walls, tol_mass, tolerances)
    triplet.info.update(method="enumeration", assignment=state.tolist(), feasible=nfeas)
    return triplet


def extract_measures(grid: Grid, drift: Drift, v, z, walls: WallPair, tol_mass: float = 1e-8,
                     contact_tol: float | None = None) -> ReflectionMeasures:
    """Split the discrete residual ``(-Δ_h z) + f(z + v)`` into eta and xi.

    Positive residual on the lower contact set becomes eta, negative residual
    on the upper contact set becomes xi (both as node masses).  Residual mass
    anywhere else above ``tol_mass`` raises :class:`MeasureError`.
    """
    z = grid.check(z, "z")
    v = grid.check(v, "v")
    u = z + v
    r = laplacian_apply(grid, z) + drift(grid.points, u)
    measures, _ = _measures_from_residual(
        grid, r, u, walls.lower, walls.upper, tol_mass,
        walls.contact_tol if contact_tol is None else contact_tol,
    )
    return measures


def check_solution(triplet: SolutionTriplet, walls: WallPair, drift: Drift, v,
                   tolerances: Tolerances = Tolerances()) -> SolutionReport:
    """Check the discrete solution clauses and report residual magnitudes.

    Clauses: ``walls`` (band containment), ``finite`` (finite, nonnegative
    masses), ``identity`` (discrete equation with the measures on the right),
    ``complementarity_lower`` / ``complementarity_upper`` and ``disjoint``
    supports.
    """
    grid = walls.grid
    u = np.asarray(triplet.u, dtype=float)
    eta, xi = np.asarray(triplet.eta, dtype=float), np.asarray(triplet.xi, dtype=float)
    lo, hi = walls.lower, walls.upper
    clauses = {}

    viol = np.maximum(np.maximum(lo - u, u - hi), 0.0)
    viol = np.where(np.isfinite(u), viol, np.inf)
    i = int(np.argmax(viol))
    clauses["walls"] = ClauseResult(float(viol[i]), bool(viol[i] <= tolerances.wall), i if viol[i] > 0 else None)

    finite = np.all(np.isfinite(eta)) and np.all(np.isfinite(xi))
    neg = min(float(np.min(eta, initial=0.0)), float(np.min(xi, initial=0.0)))
    clauses["finite"] = ClauseResult(neg, bool(finite and neg >= 0.0))

    z = u - grid.check(v, "v")
    r_mass = (laplacian_apply(grid, z) + drift(grid.points, u)) * grid.cell_volume
    gap = np.abs(r_mass - (eta - xi))
    j = int(np.argmax(gap))
    clauses["identity"] = ClauseResult(float(gap[j]), bool(gap[j] <= tolerances.identity), j)

    mass = float(np.sum(np.abs(eta)) + np.sum(np.abs(xi)))
    bound = tolerances.complementarity * (1.0 + mass)
    c_lo = float(np.sum(eta * np.abs(u - lo)))
    c_hi = float(np.sum(xi * np.abs(hi - u)))
    clauses["complementarity_lower"] = ClauseResult(c_lo, c_lo <= bound)
    clauses["complementarity_upper"] = ClauseResult(c_hi, c_hi <= bound)

    overlap = eta * xi
    k = int(np.argmax(overlap))
    clauses["disjoint"] = ClauseResult(float(overlap[k]), bool(overlap[k] == 0.0),
                                       k if overlap[k] != 0 else None)
    return SolutionReport(clauses)
