import numpy as np
import pytest
import scipy.integrate
import scipy.stats

from mixlimit.probcore import Sample, ks_distance
from mixlimit.selfdecomp import (
    BDLPSpec,
    DiscreteJumps,
    DyadicTowerJumps,
    NormalJumps,
    log_moment_check,
    sample_random_integral,
    scale_sample,
    selfdecomp_frequencies,
    selfdecomp_test,
    selfdecomp_test_sample,
    uniform_grid,
)

GAUSS_CF = lambda t: np.exp(-np.asarray(t, dtype=float) ** 2 / 2.0)
EXP_CF = lambda t: 1.0 / (1.0 - 1j * np.asarray(t, dtype=float))
UNIF_CF = lambda t: np.sinc(np.asarray(t, dtype=float) / np.pi)

# exact-formula eigen-oracle values for the uniform(-1,1) CF ratio matrix
# on the default grid (41 points, radius 8), computed before the build
UNIFORM_VIOLATION = {0.3: -12.698861, 0.8: -12.542182}


# ---------------------------------------------------------------- scaling

def test_scale_identity_and_point():
    s = Sample(np.array([1.0, 2.0]))
    assert np.array_equal(scale_sample(s, 1.0).points, s.points)
    assert scale_sample(Sample(np.array([3.0])), -0.5).points[0, 0] == -1.5


def test_scale_zero_rejected():
    with pytest.raises(ValueError):
        scale_sample(Sample(np.array([1.0])), 0.0)


def test_scale_variance():
    rng = np.random.default_rng(0)
    s = Sample(rng.standard_normal(100_000))
    assert scale_sample(s, 0.5).points.var() == pytest.approx(0.25, rel=0.03)


def test_scale_semigroup():
    rng = np.random.default_rng(1)
    s = Sample(rng.standard_normal(100))
    # exact for dyadic factors, where float multiplication is error-free
    lhs = scale_sample(scale_sample(s, 0.5), 0.25).points
    assert np.array_equal(lhs, scale_sample(s, 0.125).points)
    # within one rounding step otherwise
    lhs = scale_sample(scale_sample(s, 0.3), 0.7).points
    rhs = scale_sample(s, 0.3 * 0.7).points
    assert np.max(np.abs(lhs - rhs)) <= 2 * np.spacing(np.abs(rhs)).max()


def test_scale_distributes_over_sums():
    # c (x + y) = c x + c y pointwise: scaled sum-sample equals sum of scaled
    rng = np.random.default_rng(2)
    x, y = rng.standard_normal(100), rng.standard_normal(100)
    c = 0.6
    lhs = scale_sample(Sample(x + y), c).points
    rhs = scale_sample(Sample(x), c).points + scale_sample(Sample(y), c).points
    assert np.allclose(lhs, rhs, atol=0.0)


# ---------------------------------------------------------------- CF ratio test

def test_gaussian_cf_passes_all_c():
    rep = selfdecomp_test(GAUSS_CF, (0.3, 0.5, 0.8))
    assert rep.verdict == "pass"
    assert all(r["psd_pass"] for r in rep.per_c)


def test_gaussian_ratio_matches_closed_form():
    # phi(s)/phi(cs) = exp(-s^2 (1-c^2)/2), entrywise to 1e-12
    t = uniform_grid(8.0, 41)
    s = t[:, None] - t[None, :]
    for c in (0.3, 0.5, 0.8):
        ratio = GAUSS_CF(s) / GAUSS_CF(c * s)
        closed = np.exp(-(s ** 2) * (1 - c ** 2) / 2.0)
        assert np.max(np.abs(ratio - closed)) < 1e-12


def test_exponential_cf_passes_with_mixture_identity():
    rep = selfdecomp_test(EXP_CF, (0.3, 0.5, 0.8))
    assert rep.verdict == "pass"
    # algebraic decomposition: phi(t)/phi(ct) = c + (1-c)/(1-it)
    t = np.linspace(-16, 16, 101)
    for c in (0.3, 0.5, 0.8):
        ratio = EXP_CF(t) / EXP_CF(c * t)
        mixture = c + (1 - c) * EXP_CF(t)
        assert np.max(np.abs(ratio - mixture)) < 1e-12


def test_uniform_cf_fails_with_pinned_magnitude():
    rep = selfdecomp_test(UNIF_CF, (0.3, 0.5, 0.8), grid_radius=8.0)
    assert rep.verdict == "fail"
    by_c = {r["c"]: r for r in rep.per_c}
    for c, expected in UNIFORM_VIOLATION.items():
        assert not by_c[c]["psd_pass"]
        assert by_c[c]["worst_violation"] == pytest.approx(expected, abs=1e-4)
        # independent eigensolver oracle
        t = uniform_grid(8.0, 41)
        s = t[:, None] - t[None, :]
        M = UNIF_CF(s) / UNIF_CF(c * s)
        oracle = np.linalg.eigvalsh(0.5 * (M + M.T)).min()
        assert by_c[c]["worst_violation"] == pytest.approx(oracle, abs=1e-8)


def test_empirical_gaussian_sample_passes_small_radius():
    rng = np.random.default_rng(3)
    s = Sample(rng.standard_normal(10_000))
    rep = selfdecomp_test_sample(s, (0.3, 0.5, 0.8))
    assert rep.verdict == "pass"
    assert all(r["worst_violation"] >= -1e-3 for r in rep.per_c)


def test_empirical_wide_grid_is_inconclusive_not_pass():
    # on a radius-8 grid the denominators of a gaussian empirical CF sink
    # below the sampling-noise floor; the verdict must refuse to resolve
    rng = np.random.default_rng(4)
    s = Sample(rng.standard_normal(10_000))
    rep = selfdecomp_test_sample(s, (0.5, 0.8), grid_radius=8.0)
    assert rep.verdict == "inconclusive"
    assert any(r["inconclusive_at"] is not None for r in rep.per_c)


def test_report_json_schema():
    rep = selfdecomp_test(GAUSS_CF, (0.5,))
    import json
    doc = json.loads(rep.to_json())
    row = doc["per_c"][0]
    assert set(row) == {"c", "psd_pass", "worst_violation", "grid_radius", "inconclusive_at"}


def test_c_outside_unit_interval_rejected():
    for bad in (0.0, 1.0, -0.2, 1.4):
        with pytest.raises(ValueError):
            selfdecomp_test(GAUSS_CF, (bad,))


def test_frequency_set_contains_scaled_lattice():
    freqs = selfdecomp_frequencies((0.5,), 1.0, 5)
    t = uniform_grid(1.0, 5)
    for d in (t[:, None] - t[None, :]).ravel():
        assert np.any(np.abs(freqs - d) < 1e-12)
        assert np.any(np.abs(freqs - 0.5 * d) < 1e-12)


# ---------------------------------------------------------------- random integral

def test_drift_only_exact_any_step_count():
    expect = 2.0 * (1.0 - np.exp(-20.0))
    for n_steps in (1, 7, 64, 1000):
        s = sample_random_integral(BDLPSpec(drift=2.0), 20.0, n_steps, 4, seed=0)
        assert np.max(np.abs(s.points - expect)) < 1e-8


def test_gaussian_bdlp_variance():
    # isometry: Var = sigma^2 integral e^{-2t} dt = 1/2
    s = sample_random_integral(BDLPSpec(gaussian_sigma=1.0), 20.0, 400, 100_000, seed=1)
    assert s.points.var() == pytest.approx(0.5, rel=0.03)


def test_compound_poisson_bdlp_moments():
    law = DiscreteJumps((-1.0, 1.0), (0.5, 0.5))
    s = sample_random_integral(BDLPSpec(jump_rate=1.0, jump_law=law), 20.0, 50, 100_000, seed=2)
    assert s.points.mean() == pytest.approx(0.0, abs=0.01)
    assert s.points.var() == pytest.approx(0.5, rel=0.05)


def test_integral_determinism():
    a = sample_random_integral(BDLPSpec(gaussian_sigma=1.0, jump_rate=2.0,
                                        jump_law=NormalJumps()), 10.0, 50, 100, seed=5)
    b = sample_random_integral(BDLPSpec(gaussian_sigma=1.0, jump_rate=2.0,
                                        jump_law=NormalJumps()), 10.0, 50, 100, seed=5)
    assert np.array_equal(a.points, b.points)


def test_resolution_doubling_ks_small():
    s1 = sample_random_integral(BDLPSpec(gaussian_sigma=1.0), 20.0, 200, 50_000, seed=6)
    s2 = sample_random_integral(BDLPSpec(gaussian_sigma=1.0), 20.0, 400, 50_000, seed=7)
    x2 = np.sort(s2.points[:, 0])
    cdf2 = lambda x: np.searchsorted(x2, np.asarray(x), side="right") / len(x2)
    assert ks_distance(Sample(s1.points[:, 0]), cdf2) < 0.01


def test_integral_validation():
    with pytest.raises(ValueError, match="t_max"):
        sample_random_integral(BDLPSpec(drift=1.0), 2.0, 10, 10, seed=0)
    with pytest.raises(ValueError, match="n_steps"):
        sample_random_integral(BDLPSpec(drift=1.0), 10.0, 0, 10, seed=0)
    with pytest.raises(ValueError, match="jump_law"):
        BDLPSpec(jump_rate=1.0)
    with pytest.raises(ValueError, match="nonnegative"):
        BDLPSpec(gaussian_sigma=-1.0)


# ---------------------------------------------------------------- log moment

def test_log_moment_drift_only_exact():
    res = log_moment_check(BDLPSpec(drift=1.0), 1000, seed=0)
    assert res["estimate"] == pytest.approx(np.log(2.0), abs=1e-15)
    assert res["diagnostic"] == "finite"


def test_log_moment_gaussian_matches_quadrature():
    oracle, err = scipy.integrate.quad(
        lambda z: np.log1p(abs(z)) * scipy.stats.norm.pdf(z), -np.inf, np.inf
    )
    assert err < 1e-6
    assert oracle == pytest.approx(0.5348, abs=5e-4)   # frozen before the build
    res = log_moment_check(BDLPSpec(gaussian_sigma=1.0), 100_000, seed=1)
    assert res["diagnostic"] == "finite"
    assert res["estimate"] == pytest.approx(oracle, abs=0.02)


def test_log_moment_divergent_jump_law_fires():
    # P(J = 2^(2^k)) = 2^-k: sum 2^-k log(1 + 2^(2^k)) ~ sum log 2 diverges
    bdlp = BDLPSpec(jump_rate=1.0, jump_law=DyadicTowerJumps())
    res = log_moment_check(bdlp, 100_000, seed=2)
    assert res["diagnostic"] == "suspect-infinite"
