import numpy as np
import pytest

from reflspde import (CoefficientPair, Diffusion, Drift, WallPair, build_grid, discrete_green,
                      solve_two_wall)
from reflspde.picard import (ContractionInputs, contraction_condition, default_condition_inputs,
                             pathwise_lipschitz_probe, picard_solve)

REF = dict(p=2, a=1, c_p=4, B=1, lam=1, k=1, r_D=1, C_D=1 / 48)


@pytest.fixture(scope="module")
def setup():
    g = build_grid(1, 99)
    return g, discrete_green(g), WallPair.constant(g, -0.5, 0.5)


def test_condition_reference_values():
    lhs, ok = contraction_condition(ContractionInputs(C_sigma=0.1, **REF))
    assert lhs == pytest.approx(0.326667, abs=1e-5) and ok
    lhs, ok = contraction_condition(ContractionInputs(C_sigma=0.2, **REF))
    assert lhs == pytest.approx(1.306667, abs=1e-5) and not ok
    lhs, ok = contraction_condition(ContractionInputs(C_sigma=0.0, **REF))
    assert lhs == 0 and ok


def test_condition_terms_add_up():
    res = contraction_condition(ContractionInputs(C_sigma=0.1, **REF))
    assert res.kolmogorov_term == pytest.approx(0.32)
    assert res.burkholder_term == pytest.approx(0.32 / 48)
    assert res.as_dict()["inputs"]["C_sigma"] == 0.1


@pytest.mark.parametrize("change", [
    {"lam": 1.2}, {"k": 2, "lam": 1.0}, {"k": 3, "lam": 0.5}, {"p": 1.0},
    {"p": 2, "lam": 0.4}, {"B": 0.0}, {"C_D": -1.0}, {"k": 4},
])
def test_condition_input_validation(change):
    args = dict(REF, C_sigma=0.1)
    args.update(change)
    with pytest.raises(ValueError):
        ContractionInputs(**args)


def test_default_inputs_2d():
    g = build_grid(2, 8)
    inp = default_condition_inputs(g, discrete_green(g), 0.1)
    assert inp.p == 3 and inp.lam == 0.9 and inp.r_D == pytest.approx(np.sqrt(2))
    assert inp.lam * inp.p > 2


def test_zero_sigma_reduces_to_obstacle(setup):
    g, K, w = setup
    tr, diag = picard_solve(g, K, CoefficientPair(), w, seed=1)
    assert diag.converged and diag.iterations == 2
    ref = solve_two_wall(g, Drift.zero(), np.zeros(g.size), w)
    np.testing.assert_array_equal(tr.u, ref.u)


def test_additive_noise_constant_map(setup):
    g, K, w = setup
    tr, diag = picard_solve(g, K, CoefficientPair(sigma=Diffusion.constant(1.0)), w, seed=3,
                            keep_history=True)
    assert diag.converged and diag.iterations == 2
    v1, v2 = tr.info["history"][0][1], tr.info["history"][1][1]
    np.testing.assert_array_equal(v1, v2)
    assert np.max(tr.u) <= 0.5 + 1e-12 and np.min(tr.u) >= -0.5 - 1e-12


def test_multiplicative_geometric_decay(setup):
    g, K, w = setup
    cp = CoefficientPair(sigma=Diffusion.linear(0.1, 0.05))
    tr, diag = picard_solve(g, K, cp, w, seed=2024)
    assert diag.converged
    assert diag.condition.satisfied and diag.as_dict()["regime"] == "proven"
    d = np.array(diag.sup_diffs)
    assert np.all(d[2:] / d[1:-1] < 1)
    assert tr.report.clauses["complementarity_lower"].value <= 1e-8
    assert tr.report.clauses["complementarity_upper"].value <= 1e-8
    for du, dv in zip(diag.sup_diffs[1:], diag.v_diffs[1:]):
        assert du <= 2 * dv + 1e-9


def test_outside_regime_is_stamped(setup):
    g, K, w = setup
    cp = CoefficientPair(sigma=Diffusion.linear(3.0, 0.0))
    tr, diag = picard_solve(g, K, cp, w, seed=1, max_iter=5)
    assert not diag.condition.satisfied
    assert tr.info["regime"] == "outside proven regime"


def test_nonconvergence_reported_not_raised(setup):
    g, K, w = setup
    cp = CoefficientPair(sigma=Diffusion.linear(0.1, 0.05))
    _, diag = picard_solve(g, K, cp, w, seed=2024, max_iter=2, tol=1e-30)
    assert not diag.converged and diag.iterations == 2


def test_pathwise_uniqueness(setup):
    g, K, w = setup
    cp = CoefficientPair(sigma=Diffusion.linear(0.1, 0.05))
    a, _ = picard_solve(g, K, cp, w, seed=77)
    b, _ = picard_solve(g, K, cp, w, seed=77, z0=np.random.default_rng(0).uniform(-1, 1, g.size))
    assert np.max(np.abs(a.u - b.u)) < 1e-7


def test_probe(setup):
    g, K, _ = setup
    assert pathwise_lipschitz_probe(g, K, CoefficientPair(sigma=Diffusion.constant(2.0)), 1, trials=20) == 0
    u = np.ones(g.size)
    assert pathwise_lipschitz_probe(g, K, CoefficientPair(sigma=Diffusion.linear(0.1)), 1,
                                    pairs=[(u, u)]) == 0
    r = pathwise_lipschitz_probe(g, K, CoefficientPair(sigma=Diffusion.linear(0.1)), 1, trials=200)
    assert np.isfinite(r) and 0 < r
