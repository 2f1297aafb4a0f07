import math
import time

import numpy as np
import pytest
from scipy import integrate, stats

from dnaga._util import ZETA
from dnaga.channel import ChannelParams, path_loss_db, signal_shadow_moments
from dnaga.core import (
    CdfCurve,
    FitError,
    GaussianApprox,
    PowerLognormal,
    RegionMoments,
    analyze_cell,
    db_sum_samples,
    fit_power_lognormal,
    interference_path_moments,
    outer_rule_for,
    per_cell_interference_gaussian,
    power_lognormal_cdf_db,
    power_lognormal_cdf_mw,
    power_lognormal_pdf_db,
    power_lognormal_pdf_mw,
    power_normal_stats,
    signal_cdf,
    signal_gaussian,
    signal_path_moments,
    sir_cdf,
)
from dnaga.fading import FadingModel, fading_db_cdf, fading_db_moments
from dnaga.quadrature import gauss_hermite, std_normal_cdf
from dnaga.scenario import generate_hex_lattice

from conftest import isolated, pair

RAY = FadingModel.rayleigh()
NAK = FadingModel.nakagami(10, 0.1)
GH30 = gauss_hermite(30)


def annulus_log_moments(r1, r2):
    """Mean and variance of ln r for r with density 2r / (r2^2 - r1^2) on [r1, r2]."""
    def m1(r):
        return r * r * math.log(r) - r * r / 2

    def m2(r):
        return r * r * math.log(r) ** 2 - r * r * math.log(r) + r * r / 2

    a = r2 * r2 - r1 * r1
    e1 = (m1(r2) - m1(r1)) / a
    e2 = (m2(r2) - m2(r1)) / a
    return e1, e2 - e1 * e1


# --- region moments

def test_signal_moments_match_closed_form_annulus(params):
    # lattice spacing is larger than two coverage radii, so the centre region is a full annulus
    dep = generate_hex_lattice(55.43, 19)
    got = signal_path_moments(dep, 0, params, n_samples=400_000, seed=3)
    e, v = annulus_log_moments(0.01, 0.04)
    k = (params.eta - 1) * params.alpha * ZETA        # (eta-1) * 10 alpha log10 r = k ln r
    mu = (params.eta - 1) * params.a_db + k * e
    var = k * k * v
    assert abs(got.mu_l - mu) < 3 * got.std_error
    assert got.var_l == pytest.approx(var, rel=0.01)


def test_signal_moments_vanish_at_full_compensation(hex19):
    m = signal_path_moments(hex19, 0, ChannelParams(eta=1.0), n_samples=1000, seed=1)
    assert (m.mu_l, m.var_l) == (0.0, 0.0)


def test_interference_moments_symmetric_pair(params):
    dep = pair(0.2)
    a = interference_path_moments(dep, 0, 1, params, n_samples=200_000, seed=1)
    b = interference_path_moments(dep, 1, 0, params, n_samples=200_000, seed=1)
    assert abs(a.mu_l - b.mu_l) < 3 * math.hypot(a.std_error, b.std_error)


def test_interference_moments_decrease_with_distance():
    p = ChannelParams(eta=0.999999)
    mus = [interference_path_moments(pair(d), 0, 1, p, n_samples=50_000, seed=2).mu_l
           for d in (0.1, 0.2, 0.4)]
    assert mus[0] > mus[1] > mus[2]


def test_interference_moments_against_brute_force(params):
    D = 0.3
    got = interference_path_moments(pair(D), 0, 1, params, n_samples=10 ** 6, seed=4)
    # independent oracle: inverse-CDF radius draw around the interferer at (D, 0)
    rng = np.random.default_rng(2024)
    n = 10 ** 7
    r = np.sqrt(rng.uniform(0.01 ** 2, 0.04 ** 2, n))
    th = rng.uniform(0, 2 * np.pi, n)
    x, y = D + r * np.cos(th), r * np.sin(th)
    vals = params.eta * path_loss_db(params, r) - path_loss_db(params, np.hypot(x, y))
    se = math.hypot(got.std_error, vals.std() / math.sqrt(n))
    assert abs(got.mu_l - vals.mean()) < 3 * se


def test_interference_moments_reject_self(hex19, params):
    with pytest.raises(ValueError):
        interference_path_moments(hex19, 2, 2, params, n_samples=10)


# --- Gaussian approximations

def test_per_cell_gaussian_example(params):
    q = per_cell_interference_gaussian(RegionMoments(-50.0, 10.0), params, RAY)
    assert q.mean == pytest.approx(-128.507, abs=1e-3)
    assert q.var == pytest.approx(205.025, abs=1e-3)
    mu_h, var_h = fading_db_moments(RAY)
    assert q.mean == -76 - 50 + mu_h
    assert q.var == 10 + 164 + var_h


def test_per_cell_gaussian_degenerate():
    p = ChannelParams(eta=1e-12)
    q = per_cell_interference_gaussian(RegionMoments(-40.0, 0.0), p, FadingModel.deterministic())
    assert q.mean == pytest.approx(-116.0)
    assert q.var == pytest.approx(100.0)


def test_signal_gaussian(params):
    g = signal_gaussian(RegionMoments(-17.0, 1.5), params)
    assert g.mean == -93.0
    assert g.var == 1.5 + signal_shadow_moments(params)[1]
    assert g.var == pytest.approx(5.5)
    assert signal_gaussian(RegionMoments(0.0, 0.0), ChannelParams(eta=1.0)) == GaussianApprox(-76.0, 0.0)


# --- power-normal / power-lognormal law

def test_power_normal_stats_closed_forms():
    assert power_normal_stats(1.0) == pytest.approx((0.0, 1.0), abs=1e-9)
    # max of two standard normals: mean 1/sqrt(pi), variance 1 - 1/pi
    assert power_normal_stats(2.0) == pytest.approx((1 / math.sqrt(math.pi), 1 - 1 / math.pi), abs=1e-9)


def test_power_lognormal_cdf_examples():
    q = np.linspace(-20, 20, 41)
    pl1 = PowerLognormal(1.0, 3.0, 4.0)
    assert np.allclose(power_lognormal_cdf_db(pl1, q), std_normal_cdf((q - 3) / 4), atol=1e-15)
    assert power_lognormal_cdf_db(PowerLognormal(2.0, -5.0, 2.0), -5.0) == pytest.approx(0.25)


def test_power_lognormal_densities_normalise():
    pl = PowerLognormal(3.0, 1.0, 4.0)
    v = integrate.quad(lambda x: power_lognormal_pdf_mw(pl, x), 0, np.inf, limit=500)[0]
    assert v == pytest.approx(1.0, abs=1e-6)
    d = integrate.quad(lambda x: power_lognormal_pdf_db(pl, x), -np.inf, np.inf)[0]
    assert d == pytest.approx(1.0, abs=1e-9)
    assert power_lognormal_cdf_mw(pl, 10 ** 0.1) == pytest.approx(power_lognormal_cdf_db(pl, 1.0))
    with pytest.raises(ValueError):
        power_lognormal_pdf_mw(pl, 0.0)


def test_power_lognormal_quantile_inverts_cdf():
    pl = PowerLognormal(50.0, -130.0, 12.0)
    p = np.linspace(0.01, 0.99, 9)
    assert np.allclose(power_lognormal_cdf_db(pl, pl.quantile_db(p)), p, atol=1e-12)


# --- fit

def test_fit_single_cell_is_exact():
    pl = fit_power_lognormal([GaussianApprox(-120.0, 25.0)])
    assert (pl.lam, pl.mu_q, pl.sigma_q) == pytest.approx((1.0, -120.0, 5.0), abs=1e-6)


def test_fit_two_identical_cells_against_monte_carlo():
    cells = [GaussianApprox(0.0, 1.0)] * 2
    pl = fit_power_lognormal(cells)
    rng = np.random.default_rng(77)
    y = rng.standard_normal((10 ** 7, 2))
    q = ZETA * np.log(np.exp(y / ZETA).sum(axis=1))
    assert stats.kstest(q, lambda v: power_lognormal_cdf_db(pl, v)).statistic <= 0.01


def test_fit_matches_target_db_moments():
    rng = np.random.default_rng(8)
    cells = [GaussianApprox(m, v) for m, v in zip(rng.uniform(-140, -120, 40), rng.uniform(150, 230, 40))]
    pl = fit_power_lognormal(cells, n_samples=50_000, seed=5)
    x = db_sum_samples(cells, 50_000, seed=5)
    # fitted moments by direct integration of the fitted density
    lo, hi = pl.quantile_db(1e-14), pl.quantile_db(1 - 1e-15)
    m1 = integrate.quad(lambda q: q * power_lognormal_pdf_db(pl, q), lo, hi, limit=200)[0]
    m2 = integrate.quad(lambda q: (q - m1) ** 2 * power_lognormal_pdf_db(pl, q), lo, hi, limit=200)[0]
    assert m1 == pytest.approx(x.mean(), rel=1e-6)
    assert m2 == pytest.approx(x.var(), rel=1e-6)
    assert 1.0 <= pl.lam <= 40.0


def test_fit_lambda_bounded_by_cell_count():
    cells = [GaussianApprox(-130.0, 200.0)] * 30
    pl = fit_power_lognormal(cells, n_samples=20_000)
    assert 1.0 <= pl.lam <= 30.0


def test_fit_errors():
    with pytest.raises(ValueError):
        fit_power_lognormal([])
    with pytest.raises(FitError):
        fit_power_lognormal([GaussianApprox(0.0, 0.0)])


def test_db_sum_samples_chunked_equals_cached():
    cells = [GaussianApprox(-100.0 - i, 50.0) for i in range(10)]
    a = db_sum_samples(cells, 1000, seed=3)
    import dnaga.core as core
    old = core._CACHE_ENTRIES
    try:
        core._CACHE_ENTRIES = 700          # forces chunked generation
        b = db_sum_samples(cells, 1000, seed=3)
    finally:
        core._CACHE_ENTRIES = old
    assert np.allclose(a, b, rtol=0, atol=1e-12)


# --- Theorem 1 / Theorem 2 sums

def test_signal_cdf_degenerate_gaussian():
    assert signal_cdf(GaussianApprox(0.0, 0.0), RAY, GH30, 0.0) == pytest.approx(1 - math.exp(-1))
    x = np.linspace(-30, 10, 81)
    assert np.allclose(signal_cdf(GaussianApprox(-5.0, 0.0), NAK, GH30, x), fading_db_cdf(NAK, x + 5.0), atol=1e-15)


def test_signal_cdf_matches_direct_convolution():
    g = GaussianApprox(-93.0, 6.0)
    x = np.linspace(-110, -80, 31)
    ref = [integrate.quad(lambda t: stats.norm.pdf(t, g.mean, g.std) * fading_db_cdf(RAY, xx - t),
                          g.mean - 12 * g.std, g.mean + 12 * g.std)[0] for xx in x]
    assert np.allclose(signal_cdf(g, RAY, GH30, x), ref, atol=1e-6)


def test_sir_cdf_reduces_to_shifted_signal_cdf():
    g = GaussianApprox(-93.0, 6.0)
    pl = PowerLognormal(1.0, -120.0, 1e-9)
    z = np.linspace(-10, 50, 61)
    assert np.allclose(sir_cdf(g, RAY, pl, GH30, z), signal_cdf(g, RAY, GH30, z + pl.mu_q), atol=1e-6)


def test_sir_cdf_is_valid_and_matches_double_integral():
    g = GaussianApprox(-93.0, 6.0)
    pl = PowerLognormal(20.0, -130.0, 12.0)
    z = np.linspace(-40, 60, 201)
    f = sir_cdf(g, RAY, pl, GH30, z, outer_rule_for(pl))
    assert np.all(np.diff(f) >= 0) and f.min() >= 0 and f.max() <= 1
    for zz in (-5.0, 5.0, 20.0):
        ref = integrate.quad(lambda q: power_lognormal_pdf_db(pl, q) * signal_cdf(g, RAY, GH30, zz + q),
                             pl.quantile_db(1e-12), pl.quantile_db(1 - 1e-12), limit=200)[0]
        # Gauss-Hermite truncation error of the outer sum is of order 1e-5 here
        assert sir_cdf(g, RAY, pl, GH30, zz, outer_rule_for(pl)) == pytest.approx(ref, abs=5e-5)


def test_sir_cdf_tabulated_inner_matches_direct():
    g = GaussianApprox(-93.0, 6.0)
    pl = PowerLognormal(200.0, -137.0, 14.0)
    z = np.linspace(-30, 30, 121)
    outer = outer_rule_for(pl)
    assert np.allclose(sir_cdf(g, RAY, pl, GH30, z, outer, x_step=0.01),
                       sir_cdf(g, RAY, pl, GH30, z, outer), atol=1e-5)


def test_outer_rule_grows_with_lambda():
    assert outer_rule_for(PowerLognormal(1.0, 0.0, 1.0)).order == 30
    assert outer_rule_for(PowerLognormal(200.0, 0.0, 1.0)).order > 30


# --- CdfCurve

def test_cdf_curve_csv_round_trip(tmp_path):
    c = CdfCurve(np.linspace(-1, 1, 7) / 3, np.linspace(0, 1, 7) ** 2 / 7)
    c.to_csv(tmp_path / "c.csv")
    back = CdfCurve.from_csv(tmp_path / "c.csv")
    assert np.allclose(back.grid, c.grid, rtol=1e-14) and np.allclose(back.probs, c.probs, rtol=1e-14)
    assert (tmp_path / "c.csv").read_text().startswith("value_db,cdf\n")


def test_cdf_curve_quantile():
    c = CdfCurve(np.array([0.0, 1.0, 2.0]), np.array([0.0, 0.5, 1.0]))
    assert c.median() == 1.0
    assert c(1.5) == 0.75


# --- end to end

def test_two_cell_toy(params):
    dep = generate_hex_lattice(55.43, 2)
    a = analyze_cell(dep, 0, params, RAY, n_samples=20_000, fit_samples=20_000)
    assert 0.5 <= a.aggregate.lam <= 2.0
    for c in (a.signal_cdf, a.interference_cdf, a.sir_cdf):
        assert c.is_valid()


def test_analyze_is_deterministic_and_thread_independent(hex19, params):
    kw = dict(n_samples=5000, fit_samples=10_000, seed=9)
    a = analyze_cell(hex19, 0, params, NAK, threads=1, **kw)
    b = analyze_cell(hex19, 0, params, NAK, threads=4, **kw)
    c = analyze_cell(hex19, 0, params, NAK, threads=1, **kw)
    for x, y in ((a, b), (a, c)):
        assert x.sir_cdf == y.sir_cdf and x.signal_cdf == y.signal_cdf
        assert x.aggregate == y.aggregate


def test_analyze_hex228_runtime(hex228, params):
    t = time.perf_counter()
    a = analyze_cell(hex228, 0, params, RAY, n_samples=100_000)
    assert time.perf_counter() - t < 60
    assert len(a.interference) == 227


def test_analyze_rejects_bad_victim(hex19, params):
    with pytest.raises(ValueError):
        analyze_cell(hex19, 19, params, RAY, n_samples=100)
    with pytest.raises(ValueError):
        analyze_cell(generate_hex_lattice(55.43, 1), 0, params, RAY, n_samples=100)
