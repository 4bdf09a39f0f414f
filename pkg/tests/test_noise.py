import numpy as np
import pytest

from reflspde import CoefficientPair, Diffusion, build_grid, discrete_green
from reflspde.noise import NoiseSample, derive_seed, sample_white_noise, stochastic_convolution


def test_same_seed_same_noise():
    g = build_grid(1, 20)
    a, b = sample_white_noise(g, 11), sample_white_noise(g, 11)
    np.testing.assert_array_equal(a.increments, b.increments)
    assert a.increments.shape == (20,)
    assert not np.array_equal(a.increments, sample_white_noise(g, 12).increments)


def test_derived_seeds_distinct_and_stable():
    seeds = [derive_seed(5, r) for r in range(1000)]
    assert len(set(seeds)) == 1000
    assert derive_seed(5, 3) == seeds[3]
    assert derive_seed(6, 3) != seeds[3]


def test_increment_moments():
    g = build_grid(1, 99)
    reps = 100_000
    dw = np.stack([sample_white_noise(g, derive_seed(1, r)).increments for r in range(reps)])
    mean = dw.mean(axis=0)
    se = np.sqrt(g.cell_volume / reps)
    assert np.all(np.abs(mean) <= 4 * se)
    var = dw.var(axis=0, ddof=1)
    assert np.all(np.abs(var / 0.01 - 1) < 0.05)


def test_replicate_streams_uncorrelated():
    g = build_grid(1, 50)
    a = np.concatenate([sample_white_noise(g, derive_seed(9, 2 * r)).increments for r in range(400)])
    b = np.concatenate([sample_white_noise(g, derive_seed(9, 2 * r + 1)).increments for r in range(400)])
    rho = np.corrcoef(a, b)[0, 1]
    assert abs(rho) < 4 / np.sqrt(a.size)


def test_zero_sigma_gives_zero():
    g = build_grid(1, 30)
    K = discrete_green(g)
    v = stochastic_convolution(K, CoefficientPair(), np.ones(30), sample_white_noise(g, 1))
    np.testing.assert_array_equal(v, 0.0)


def test_deterministic_increments_integrate_kernel():
    g = build_grid(1, 99)
    K = discrete_green(g)
    det = NoiseSample(g, np.full(g.size, g.cell_volume), 0)
    v = stochastic_convolution(K, CoefficientPair(sigma=Diffusion.constant(1.0)), np.zeros(g.size), det)
    x = g.points
    assert np.max(np.abs(v - x * (1 - x) / 2)) <= g.spacing**2


def test_linear_in_noise():
    g = build_grid(2, 6)
    K = discrete_green(g)
    cp = CoefficientPair(sigma=Diffusion.linear(0.3, 0.1), k=2)
    u = np.random.default_rng(0).normal(size=g.size)
    n1, n2 = sample_white_noise(g, 1), sample_white_noise(g, 2)
    both = NoiseSample(g, n1.increments + n2.increments, 0)
    np.testing.assert_allclose(stochastic_convolution(K, cp, u, both),
                               stochastic_convolution(K, cp, u, n1) + stochastic_convolution(K, cp, u, n2),
                               atol=1e-14)


def test_boundary_rows_small():
    g = build_grid(1, 199)
    K = discrete_green(g)
    row_l2 = np.sqrt(np.sum(K.values**2, axis=1) * g.cell_volume)
    assert row_l2[0] <= 2 * g.spacing
    assert row_l2[0] < row_l2[g.size // 2] / 10


def test_noise_csv(tmp_path):
    g = build_grid(1, 4)
    p = tmp_path / "w.csv"
    sample_white_noise(g, 3).to_csv(p)
    assert p.read_text().splitlines()[0] == "j,x_j,dW"


def test_mismatched_grid():
    from reflspde.grid import GridError
    g1, g2 = build_grid(1, 4), build_grid(1, 5)
    with pytest.raises(GridError):
        stochastic_convolution(discrete_green(g1), CoefficientPair(), np.zeros(4), sample_white_noise(g2, 0))
