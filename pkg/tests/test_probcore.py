import numpy as np
import pytest
import scipy.stats

from mixlimit.probcore import (
    EmpiricalCF,
    FiniteJointDistribution,
    Sample,
    alpha_exact,
    empirical_cdf,
    empirical_cf,
    ks_distance,
    psd_check,
)


def brute_alpha(pmf):
    """Independent oracle: exhaust every event pair (A, B)."""
    pmf = np.asarray(pmf, dtype=float)
    nx, nz = pmf.shape
    px, pz = pmf.sum(axis=1), pmf.sum(axis=0)
    best = 0.0
    for ma in range(1 << nx):
        a = [i for i in range(nx) if ma >> i & 1]
        for mb in range(1 << nz):
            b = [k for k in range(nz) if mb >> k & 1]
            pab = pmf[np.ix_(a, b)].sum() if a and b else 0.0
            pa = px[a].sum() if a else 0.0
            pb = pz[b].sum() if b else 0.0
            best = max(best, abs(pab - pa * pb))
    return best


def random_pmf(rng, nx, nz):
    m = rng.random((nx, nz))
    return m / m.sum()


# ---------------------------------------------------------------- empirical_cf

def test_cf_point_mass_at_origin():
    cf = empirical_cf(Sample(np.zeros(3)), [-2.0, -1.0, 0.0, 1.0, 2.0])
    assert np.allclose(cf.values, 1.0)


def test_cf_single_point():
    b, t = 0.7, 1.3
    cf = empirical_cf(Sample(np.array([b])), [-t, 0.0, t])
    assert cf.values[2] == pytest.approx(np.exp(1j * t * b), abs=1e-15)


def test_cf_two_point_is_cosine():
    sample = Sample(np.array([1.0, -1.0]))
    grid = np.linspace(-3, 3, 13)
    cf = empirical_cf(sample, grid)
    # direct two-term summation oracle
    direct = 0.5 * (np.exp(1j * grid * 1.0) + np.exp(1j * grid * -1.0))
    assert np.allclose(cf.values, direct, atol=1e-15)
    assert np.allclose(cf.values.imag, 0.0, atol=1e-15)
    assert np.allclose(cf.values.real, np.cos(grid), atol=1e-15)


def test_cf_rejects_empty_sample():
    with pytest.raises(ValueError):
        Sample(np.array([]))


def test_cf_rejects_asymmetric_grid_naming_frequency():
    with pytest.raises(ValueError, match="0.7"):
        empirical_cf(Sample(np.array([1.0])), [-1.0, 0.0, 0.7])
    with pytest.raises(ValueError, match="0"):
        empirical_cf(Sample(np.array([1.0])), [-1.0, 1.0])


def test_cf_invariants_random_samples():
    rng = np.random.default_rng(5)
    for _ in range(10):
        x = rng.standard_normal(rng.integers(1, 200))
        r = float(rng.uniform(0.5, 4.0))
        grid = np.linspace(-r, r, 2 * int(rng.integers(2, 12)) + 1)
        cf = empirical_cf(Sample(x), grid)
        i0 = len(grid) // 2
        assert cf.values[i0] == 1.0
        assert np.array_equal(cf.values[::-1], np.conj(cf.values))
        assert np.all(np.abs(cf.values) <= 1.0 + 1e-9)


def test_cf_difference_matrix_is_psd():
    # an empirical CF is exactly positive-definite: the ratio-free matrix
    # phi(t_j - t_k) built from one sample must pass at tol 1e-9
    rng = np.random.default_rng(17)
    x = rng.standard_normal(500)
    t = np.linspace(-2, 2, 21)
    diffs = np.round(t[:, None] - t[None, :], 12)
    freqs = np.unique(diffs)
    cf = empirical_cf(Sample(x), freqs)
    M = cf.at(diffs)
    res = psd_check(M, tol=1e-9)
    assert res["is_psd"]


def test_cf_lookup_off_grid_rejected():
    cf = empirical_cf(Sample(np.array([1.0])), [-1.0, 0.0, 1.0])
    with pytest.raises(ValueError, match="not on the stored grid"):
        cf.at(np.array([0.5]))


# ---------------------------------------------------------------- psd_check

def test_psd_constant_one_rank_one():
    M = np.ones((3, 3))
    res = psd_check(M, tol=1e-9)
    assert res["is_psd"] and res["worst_violation"] >= -1e-12


def test_psd_gaussian_kernel_matches_eig_oracle():
    t = np.array([-1.0, 0.0, 1.0])
    M = np.exp(-((t[:, None] - t[None, :]) ** 2) / 2)
    res = psd_check(M, tol=1e-9)
    oracle = np.linalg.eigvalsh(M).min()   # independent eigensolver
    assert res["is_psd"]
    assert res["worst_violation"] == pytest.approx(oracle, abs=1e-10)
    assert oracle > 0


def test_psd_detects_indefinite():
    # psi(t) = 1 + t^2 on {-1, 0, 1}: leading 2x2 minor [[1,2],[2,1]] has det -3
    t = np.array([-1.0, 0.0, 1.0])
    M = 1.0 + (t[:, None] - t[None, :]) ** 2
    res = psd_check(M, tol=1e-9)
    assert not res["is_psd"]
    assert res["worst_violation"] < -0.5


def test_psd_rejects_non_hermitian():
    with pytest.raises(ValueError, match="Hermitian"):
        psd_check(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_psd_rejects_negative_tol():
    with pytest.raises(ValueError):
        psd_check(np.eye(2), tol=-1.0)


# ---------------------------------------------------------------- ks_distance

def test_ks_own_ecdf_is_zero():
    rng = np.random.default_rng(1)
    x = rng.standard_normal(50)
    assert ks_distance(Sample(x), empirical_cdf(x)) == 0.0


def test_ks_point_mass_vs_normal():
    assert ks_distance(Sample(np.array([0.0])), scipy.stats.norm.cdf) == pytest.approx(0.5, abs=1e-12)


def test_ks_two_points_vs_uniform():
    u = lambda x: np.clip(x, 0.0, 1.0)
    assert ks_distance(Sample(np.array([0.25, 0.75])), u) == pytest.approx(0.25, abs=1e-12)


def test_ks_triangle_like_bound():
    rng = np.random.default_rng(2)
    x = Sample(rng.standard_normal(200))
    f = scipy.stats.norm.cdf
    g = lambda t: scipy.stats.norm.cdf(t, scale=1.5)
    zs = np.linspace(-10, 10, 4001)
    sup_fg = np.max(np.abs(f(zs) - g(zs)))
    assert ks_distance(x, f) <= ks_distance(x, g) + sup_fg + 1e-12


def test_ks_rejects_decreasing_reference():
    with pytest.raises(ValueError):
        ks_distance(Sample(np.array([0.0, 1.0])), lambda t: -np.asarray(t))


# ---------------------------------------------------------------- alpha_exact

def test_alpha_product_measure_is_zero():
    rng = np.random.default_rng(3)
    px = rng.dirichlet(np.ones(3))
    pz = rng.dirichlet(np.ones(4))
    j = FiniteJointDistribution(np.arange(3), np.arange(4), np.outer(px, pz))
    assert alpha_exact(j) <= 1e-15


def test_alpha_diagonal_half():
    j = FiniteJointDistribution([0, 1], [0, 1], [[0.5, 0.0], [0.0, 0.5]])
    assert alpha_exact(j) == pytest.approx(0.25, abs=1e-15)
    assert brute_alpha(j.pmf) == pytest.approx(0.25, abs=1e-15)


def test_alpha_weakly_dependent_2x2():
    pmf = [[0.3, 0.2], [0.2, 0.3]]
    j = FiniteJointDistribution([0, 1], [0, 1], pmf)
    assert alpha_exact(j) == pytest.approx(0.05, abs=1e-15)
    # optimum sits at A={x1}, B={z1}
    assert abs(0.3 - 0.5 * 0.5) == pytest.approx(0.05)
    assert brute_alpha(pmf) == pytest.approx(0.05, abs=1e-15)


def test_alpha_matches_brute_force_random():
    rng = np.random.default_rng(4)
    for _ in range(25):
        nx, nz = int(rng.integers(2, 4)), int(rng.integers(2, 5))
        pmf = random_pmf(rng, nx, nz)
        j = FiniteJointDistribution(np.arange(nx), np.arange(nz), pmf)
        assert alpha_exact(j) == pytest.approx(brute_alpha(pmf), abs=1e-13)


def test_alpha_range_and_transpose_symmetry():
    rng = np.random.default_rng(6)
    for _ in range(20):
        pmf = random_pmf(rng, 3, 3)
        j = FiniteJointDistribution(np.arange(3), np.arange(3), pmf)
        a = alpha_exact(j)
        assert 0.0 <= a <= 0.25 + 1e-12
        assert a == pytest.approx(alpha_exact(j.transpose()), abs=1e-13)


def test_alpha_coarsening_never_increases():
    rng = np.random.default_rng(7)
    for _ in range(20):
        pmf = random_pmf(rng, 3, 3)
        merged = np.vstack([pmf[0] + pmf[1], pmf[2]])
        fine = FiniteJointDistribution(np.arange(3), np.arange(3), pmf)
        coarse = FiniteJointDistribution(np.arange(2), np.arange(3), merged)
        assert alpha_exact(coarse) <= alpha_exact(fine) + 1e-13


def test_alpha_enumeration_limit():
    n = 22
    pmf = np.full((n, 2), 1.0 / (2 * n))
    j = FiniteJointDistribution(np.arange(n), np.arange(2), pmf)
    assert alpha_exact(j) <= 1e-15          # small side is enumerated: fine
    big = FiniteJointDistribution(np.arange(n), np.arange(n), np.eye(n) / n)
    with pytest.raises(ValueError, match="limit"):
        alpha_exact(big)


def test_joint_distribution_validation():
    with pytest.raises(ValueError, match="sum"):
        FiniteJointDistribution([0, 1], [0, 1], [[0.5, 0.0], [0.0, 0.4]])
    with pytest.raises(ValueError, match="nonnegative"):
        FiniteJointDistribution([0, 1], [0, 1], [[0.6, 0.5], [0.0, -0.1]])
