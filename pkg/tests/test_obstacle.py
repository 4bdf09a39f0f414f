import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from instances import (A_FIT, benchmark_u, benchmark_v, random_affine, random_cubic, random_v,
                       random_walls, small_instance)
from reflspde import (Drift, PenaltyParams, WallPair, build_grid, check_solution, extract_measures,
                      solve_active_set_enum, solve_penalized, solve_psor, solve_single_wall, solve_two_wall)
from reflspde.obstacle import (ClauseResult, EnumerationError, ReflectionMeasures, SolutionTriplet,
                               WallError, contact_tolerance)
from reflspde.grid import GridError


@pytest.fixture(scope="module")
def bench():
    g = build_grid(1, 199)
    w = WallPair.constant(g, -0.5, 0.5)
    return g, w, benchmark_v(g), solve_two_wall(g, Drift.zero(), benchmark_v(g), w)


def test_wall_validation():
    g = build_grid(1, 9)
    with pytest.raises(WallError, match="wall ordering violated"):
        WallPair.constant(g, 0.5, 0.3)
    with pytest.raises(WallError, match="boundary"):
        WallPair.from_functions(g, lambda p: 0.2 + 0 * p, lambda p: 1 + 0 * p)
    with pytest.raises(WallError, match="nearly touch"):
        WallPair(g, np.zeros(9), np.full(9, 1e-8))
    assert contact_tolerance(np.array([2.0, -3.0])) == pytest.approx(4e-7)


def test_penalized_trivial():
    g = build_grid(1, 20)
    z = solve_penalized(g, Drift.zero(), np.zeros(20), WallPair.constant(g, -1, 1))
    np.testing.assert_array_equal(z, 0.0)


def test_penalized_overshoot_small():
    g = build_grid(1, 199)
    v = benchmark_v(g)
    z = solve_penalized(g, Drift.zero(), v, WallPair.constant(g, -0.5, 0.5), PenaltyParams(1e-6, 1e-6))
    assert np.max(z + v) <= 0.5 + 1e-4
    assert np.max(z + v) > 0.5


def test_penalized_monotone_in_epsilon():
    g = build_grid(1, 99)
    v = benchmark_v(g)
    w = WallPair.constant(g, -0.5, 0.5)
    z1 = solve_penalized(g, Drift.zero(), v, w, PenaltyParams(1e-2, 1e-6))
    z2 = solve_penalized(g, Drift.zero(), v, w, PenaltyParams(5e-3, 1e-6))
    assert np.all(z2 <= z1 + 1e-12)


def test_single_wall_trivial():
    g = build_grid(1, 15)
    z, eta = solve_single_wall(g, Drift.zero(), np.zeros(15), -1.0)
    np.testing.assert_array_equal(z, 0.0)
    np.testing.assert_array_equal(eta, 0.0)


def test_single_wall_constant_obstacle_matches_enumeration():
    # lower wall 0.25 with zero boundary data: every interior node sits on the wall
    g = build_grid(1, 7)
    z, eta = solve_single_wall(g, Drift.zero(), np.zeros(7), 0.25)
    walls = WallPair(g, np.full(7, 0.25), np.full(7, 10.0))
    ref = solve_active_set_enum(g, Drift.zero(), np.zeros(7), walls)
    np.testing.assert_allclose(z, ref.u, atol=1e-12)
    np.testing.assert_allclose(z, 0.25, atol=1e-12)
    assert eta[0] > 0 and eta[-1] > 0
    np.testing.assert_allclose(eta, ref.eta, atol=1e-10)


def test_single_wall_raised_obstacle_raises_solution():
    g = build_grid(1, 49)
    rng = np.random.default_rng(4)
    for _ in range(10):
        v = random_v(g, rng)
        h = -0.3 + 0.2 * np.sin(np.pi * g.points)
        bump = np.abs(rng.normal(0, 0.2)) * np.sin(np.pi * g.points) ** 2
        z1, _ = solve_single_wall(g, Drift.cubic(0, 1, 1), v, h + bump)
        z2, _ = solve_single_wall(g, Drift.cubic(0, 1, 1), v, h)
        assert np.all(z1 >= z2 - 1e-10)


def test_closed_form(bench):
    g, w, v, tr = bench
    assert np.max(np.abs(tr.u - benchmark_u(g.points))) <= g.spacing**2
    assert tr.measures.eta_mass == 0.0
    assert tr.measures.xi_mass == pytest.approx(8 * (1 - 2 * A_FIT), abs=0.02)
    mid = np.abs(g.points - 0.5) < 0.5 - A_FIT - 2 * g.spacing
    np.testing.assert_allclose(tr.xi[mid] / g.cell_volume, 8.0, rtol=1e-8)
    assert tr.report.passed


def test_closed_form_mirror():
    g = build_grid(1, 99)
    w = WallPair.constant(g, -0.5, 0.5)
    up = solve_two_wall(g, Drift.zero(), benchmark_v(g), w)
    down = solve_two_wall(g, Drift.zero(), -benchmark_v(g), w)
    np.testing.assert_allclose(down.u, -up.u, atol=1e-12)
    np.testing.assert_allclose(down.eta, up.xi, atol=1e-12)
    assert down.measures.xi_mass == 0


def test_wide_walls_no_contact():
    g = build_grid(1, 50)
    v = np.random.default_rng(0).uniform(-1, 1, 50)
    tr = solve_two_wall(g, Drift.zero(), v, WallPair.constant(g, -10, 10))
    np.testing.assert_allclose(tr.u, v, atol=1e-13)
    assert tr.measures.eta_mass == 0 and tr.measures.xi_mass == 0


def test_psor_reproduces_examples(bench):
    g, w, v, tr = bench
    ps = solve_psor(g, Drift.zero(), v, w)
    assert np.max(np.abs(ps.u - tr.u)) < 1e-6
    g2 = build_grid(1, 50)
    w2 = WallPair.constant(g2, -10, 10)
    v2 = np.random.default_rng(0).uniform(-1, 1, 50)
    assert np.max(np.abs(solve_psor(g2, Drift.zero(), v2, w2).u - v2)) < 1e-6


def test_psor_relaxation_independent():
    g = build_grid(1, 31)
    rng = np.random.default_rng(2)
    w, f, v = random_walls(g, rng), random_cubic(rng), random_v(g, rng)
    a = solve_psor(g, f, v, w, omega=1.0)
    b = solve_psor(g, f, v, w, omega=1.5)
    assert np.max(np.abs(a.u - b.u)) < 1e-9


def test_psor_iterates_projected():
    g = build_grid(1, 25)
    rng = np.random.default_rng(8)
    w, v = random_walls(g, rng), random_v(g, rng)
    trace = []
    solve_psor(g, random_affine(rng), v, w, trace=trace)
    assert len(trace) > 3
    for u in trace:
        assert np.all(u >= w.lower) and np.all(u <= w.upper)


def test_psor_bad_omega():
    g = build_grid(1, 5)
    with pytest.raises(ValueError):
        solve_psor(g, Drift.zero(), 0.0, WallPair.constant(g, -1, 1), omega=2.0)


def test_enumeration_contact_set():
    g = build_grid(1, 7)
    tr = solve_active_set_enum(g, Drift.zero(), benchmark_v(g), WallPair.constant(g, -0.5, 0.5))
    upper = [x for x, s in zip(g.points, tr.info["assignment"]) if s == 2]
    np.testing.assert_allclose(upper, [0.375, 0.5, 0.625])
    assert tr.info["feasible"] == 1


def test_enumeration_all_free():
    g = build_grid(1, 8)
    v = np.random.default_rng(1).uniform(-1, 1, 8)
    tr = solve_active_set_enum(g, Drift.zero(), v, WallPair.constant(g, -10, 10))
    assert tr.info["assignment"] == [0] * 8


def test_enumeration_limits():
    g = build_grid(1, 13)
    with pytest.raises(GridError):
        solve_active_set_enum(g, Drift.zero(), 0.0, WallPair.constant(g, -1, 1))
    g = build_grid(1, 5)
    with pytest.raises(Exception):
        solve_active_set_enum(g, Drift.cubic(0, 0, 1), 0.0, WallPair.constant(g, -1, 1))


def test_oracle_agreement_small():
    rng = np.random.default_rng(10)
    for _ in range(10):
        g, f, v, w = small_instance(rng)
        e = solve_active_set_enum(g, f, v, w)
        assert np.max(np.abs(solve_two_wall(g, f, v, w).u - e.u)) < 1e-8
        assert np.max(np.abs(solve_psor(g, f, v, w).u - e.u)) < 1e-8


def test_extract_measures(bench):
    g, w, v, tr = bench
    m = extract_measures(g, Drift.zero(), v, tr.z, w)
    np.testing.assert_allclose(m.xi, tr.xi, atol=1e-12)
    assert m.xi_mass == pytest.approx(8 * (1 - np.sqrt(0.5)), abs=0.02)
    g2 = build_grid(1, 10)
    free = extract_measures(g2, Drift.zero(), np.zeros(10), np.zeros(10), WallPair.constant(g2, -1, 1))
    assert free.eta_mass == 0 and free.xi_mass == 0


def test_check_solution_detects_faults(bench):
    g, w, v, tr = bench
    assert tr.report.passed
    bad_u = tr.u.copy()
    bad_u[17] = 0.6
    t2 = SolutionTriplet(bad_u, tr.measures, bad_u - v, v, tr.residual)
    rep = check_solution(t2, w, Drift.zero(), v)
    assert not rep.clauses["walls"].passed
    assert rep.clauses["walls"].index == 17
    eta = tr.eta.copy()
    i = int(np.argmax(tr.xi))
    eta[i] = 1e-3
    t3 = SolutionTriplet(tr.u, ReflectionMeasures(eta, tr.xi), tr.z, v, tr.residual)
    rep3 = check_solution(t3, w, Drift.zero(), v)
    assert not rep3.clauses["disjoint"].passed
    assert rep3.clauses["disjoint"].index == i
    assert "disjoint" in rep3.failures()


def test_two_wall_2d_agrees_with_psor():
    g = build_grid(2, 12)
    rng = np.random.default_rng(5)
    w, f, v = random_walls(g, rng), random_cubic(rng), random_v(g, rng, amp=3)
    a = solve_two_wall(g, f, v, w)
    b = solve_psor(g, f, v, w)
    assert a.report.passed and b.report.passed
    assert np.max(np.abs(a.u - b.u)) < 1e-8


def test_uniqueness_from_different_guesses():
    g = build_grid(1, 60)
    rng = np.random.default_rng(6)
    w, f, v = random_walls(g, rng), random_cubic(rng), random_v(g, rng)
    a = solve_two_wall(g, f, v, w)
    b = solve_two_wall(g, f, v, w, z0=rng.uniform(-3, 3, 60))
    assert np.max(np.abs(a.u - b.u)) < 1e-8


def test_grid_mismatch():
    g1, g2 = build_grid(1, 5), build_grid(1, 6)
    with pytest.raises(GridError):
        solve_two_wall(g1, Drift.zero(), 0.0, WallPair.constant(g2, -1, 1))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(3, 40), shift=st.floats(0.0, 1.0))
def test_nonexpansive_property(seed, n, shift):
    rng = np.random.default_rng(seed)
    g = build_grid(1, n)
    w, f = random_walls(g, rng), random_cubic(rng)
    v = random_v(g, rng)
    vh = v + shift * rng.uniform(-1, 1, n)
    a, b = solve_two_wall(g, f, v, w), solve_two_wall(g, f, vh, w)
    assert np.max(np.abs(a.z - b.z)) <= np.max(np.abs(v - vh)) + 1e-8
    for tr in (a, b):
        assert tr.report.passed
        assert np.all(tr.eta * tr.xi == 0)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_stage_monotone_property(seed):
    rng = np.random.default_rng(seed)
    g = build_grid(1, 30)
    w, f, v = random_walls(g, rng), random_cubic(rng), random_v(g, rng)
    tr = solve_two_wall(g, f, v, w)
    for coarse, fine in zip(tr.stages, tr.stages[1:]):
        assert np.all(fine <= coarse + 1e-10)


def test_clause_result_repr_fields():
    c = ClauseResult(0.0, True)
    assert c.index is None
