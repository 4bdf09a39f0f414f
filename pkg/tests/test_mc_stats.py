import numpy as np
import pytest

from reflspde.config import ProblemSpec
from reflspde.mc_stats import (EnsembleConfig, ReplicateRecord, estimate_sup_moment, geometric_decay_fit,
                               run_ensemble)
from reflspde.noise import derive_seed


def _oracle_rate(series):
    # plain normal equations for the slope, independent of numpy.polyfit
    import math
    ys = [math.log(s) for s in series]
    xs = list(range(len(ys)))
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    slope = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sum((x - mx) ** 2 for x in xs)
    return math.exp(slope)


def test_moment_examples():
    assert estimate_sup_moment([3.0, 3.0, 3.0], 2) == (9.0, 0.0)
    est, se = estimate_sup_moment([0.0, 2.0], 2)
    assert est == pytest.approx(2.0) and se == pytest.approx(2.0)
    with pytest.raises(ValueError):
        estimate_sup_moment([], 2)
    with pytest.raises(ValueError):
        estimate_sup_moment([1.0], 2)


def test_decay_fit_examples():
    assert geometric_decay_fit([1, 0.5, 0.25, 0.125]) == pytest.approx(0.5)
    assert geometric_decay_fit([1, 1, 1]) == pytest.approx(1.0)
    oracle = _oracle_rate([1, 0.4, 0.2, 0.07])
    assert oracle == pytest.approx(0.4202, abs=1e-4)
    assert geometric_decay_fit([1, 0.4, 0.2, 0.07]) == pytest.approx(oracle, rel=1e-12)


def test_decay_fit_truncation():
    rate, cut = geometric_decay_fit([1, 0.5, 0.25, 0.0, 3.0], return_flag=True)
    assert cut and rate == pytest.approx(0.5)
    with pytest.raises(ValueError):
        geometric_decay_fit([1, 0.5])
    with pytest.raises(ValueError):
        geometric_decay_fit([1, 0.0, 2, 3])


def _spec(sigma, seed=5, n=49):
    return ProblemSpec.from_dict({"n": n, "sigma": sigma, "seed": seed})


def test_zero_sigma_ensemble():
    s = run_ensemble(EnsembleConfig(_spec({"kind": "zero"}), 8, base_seed=3))
    sups = {r.sup_u for r in s.records}
    assert len(sups) == 1
    assert s.moments[2.0][1] == 0.0


def test_additive_ensemble_in_band():
    s = run_ensemble(EnsembleConfig(_spec({"kind": "constant", "params": {"c": 1.0}}), 12, base_seed=1))
    assert all(r.sup_u <= 0.5 + 1e-12 for r in s.records)
    assert all(r.seed == derive_seed(1, r.r) for r in s.records)


def test_failure_isolation(monkeypatch):
    import reflspde.mc_stats as mc

    real = mc.picard_solve

    def flaky(grid, kernel, coeff, walls, seed, *a, **kw):
        if seed == derive_seed(0, 2):
            raise RuntimeError("boom")
        return real(grid, kernel, coeff, walls, seed, *a, **kw)

    monkeypatch.setattr(mc, "picard_solve", flaky)
    s = run_ensemble(EnsembleConfig(_spec({"kind": "linear", "params": {"a": 0.1, "b": 0.05}}), 5))
    assert s.failures == 1
    assert s.records[2].error.startswith("RuntimeError")
    assert len(s.ok_records()) == 4


def test_all_failed(monkeypatch):
    import reflspde.mc_stats as mc

    def broken(*a, **kw):
        raise RuntimeError("nope")

    monkeypatch.setattr(mc, "picard_solve", broken)
    with pytest.raises(RuntimeError, match="all 3 replicates failed"):
        run_ensemble(EnsembleConfig(_spec({"kind": "zero"}), 3))


def test_reproducible_and_worker_independent():
    spec = _spec({"kind": "linear", "params": {"a": 0.1, "b": 0.05}})
    a = run_ensemble(EnsembleConfig(spec, 6, base_seed=9, workers=1))
    b = run_ensemble(EnsembleConfig(spec, 6, base_seed=9, workers=1))
    c = run_ensemble(EnsembleConfig(spec, 6, base_seed=9, workers=3))
    assert a.as_dict() == b.as_dict() == c.as_dict()
    assert [r.sup_u for r in a.records] == [r.sup_u for r in c.records]


def test_config_validation():
    spec = _spec({"kind": "zero"})
    with pytest.raises(ValueError):
        EnsembleConfig(spec, 0)
    with pytest.raises(ValueError):
        EnsembleConfig(spec, 3, p_list=(1.0,))


@pytest.mark.slow
def test_moment_stable_under_doubling():
    spec = _spec({"kind": "linear", "params": {"a": 0.1, "b": 0.05}}, n=99)
    small = run_ensemble(EnsembleConfig(spec, 200, base_seed=11))
    large = run_ensemble(EnsembleConfig(spec, 400, base_seed=11))
    (e1, s1), (e2, s2) = small.moments[2.0], large.moments[2.0]
    assert np.isfinite(e1) and np.isfinite(e2)
    assert abs(e2 - e1) < 3 * s1
    assert s2 < s1


def test_record_defaults():
    r = ReplicateRecord(0, 1)
    assert np.isnan(r.sup_u) and not r.converged
