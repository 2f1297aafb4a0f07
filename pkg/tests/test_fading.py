import math

import numpy as np
import pytest
from scipy import integrate, stats

from dnaga._util import ZETA
from dnaga.fading import FadingModel, fading_db_cdf, fading_db_moments, sample_fading_db

RAY = FadingModel.rayleigh()
NAK = FadingModel.nakagami(10, 0.1)


def incomplete_gamma_series(a, x, terms=200):
    """P(a, x) by the power series x^a e^-x / Gamma(a+1) * sum x^n / ((a+1)...(a+n))."""
    total, term = 1.0, 1.0
    for n in range(1, terms):
        term *= x / (a + n)
        total += term
    return math.exp(a * math.log(x) - x - math.lgamma(a + 1)) * total


def test_cdf_examples():
    assert fading_db_cdf(RAY, 0.0) == pytest.approx(1 - math.exp(-1), rel=1e-14)
    assert fading_db_cdf(RAY, -60.0) == pytest.approx(1e-6, rel=1e-5)
    assert fading_db_cdf(NAK, 0.0) == pytest.approx(incomplete_gamma_series(10, 10), rel=1e-12)
    assert fading_db_cdf(NAK, 0.0) == pytest.approx(0.5421, abs=1e-4)


def test_moment_examples():
    m, v = fading_db_moments(RAY)
    assert (m, v) == pytest.approx((-ZETA * np.euler_gamma, ZETA ** 2 * math.pi ** 2 / 6), rel=1e-12)
    # hand-rounded reference values; the closed forms above are the exact check
    assert (m, v) == pytest.approx((-2.50676, 31.0246), abs=1e-3)
    h9 = sum(1 / n for n in range(1, 10))
    psi10 = h9 - np.euler_gamma
    psi1_10 = math.pi ** 2 / 6 - sum(1 / n ** 2 for n in range(1, 10))
    m, v = fading_db_moments(NAK)
    assert m == pytest.approx(ZETA * (psi10 + math.log(0.1)), rel=1e-12)
    assert v == pytest.approx(ZETA ** 2 * psi1_10, rel=1e-12)
    assert (m, v) == pytest.approx((-0.22076, 1.98352), abs=1e-4)
    assert fading_db_moments(FadingModel.nakagami(1, 1)) == fading_db_moments(RAY)
    assert fading_db_moments(FadingModel.deterministic()) == (0.0, 0.0)


@pytest.mark.parametrize("model", [RAY, NAK])
def test_moments_match_monte_carlo(model):
    x = sample_fading_db(model, np.random.default_rng(5), 10 ** 7)
    m, v = fading_db_moments(model)
    n = len(x)
    assert abs(x.mean() - m) < 3 * math.sqrt(v / n)
    # SE of the sample variance: sqrt((mu4 - var^2) / n)
    mu4 = np.mean((x - x.mean()) ** 4)
    assert abs(x.var() - v) < 3 * math.sqrt((mu4 - x.var() ** 2) / n)


@pytest.mark.parametrize("model", [RAY, NAK])
def test_moments_match_cdf_integration(model):
    m, v = fading_db_moments(model)
    # integrate against the density obtained by differentiating the CDF analytically
    def pdf(h):
        e = math.exp(h / ZETA)
        k, th = (1.0, 1.0) if model.kind == "rayleigh" else (model.k, model.theta)
        return stats.gamma.pdf(e, k, scale=th) * e / ZETA
    lo, hi = m - 40 * math.sqrt(v), m + 15 * math.sqrt(v)
    m1 = integrate.quad(lambda h: h * pdf(h), lo, hi, epsabs=1e-12, limit=200)[0]
    m2 = integrate.quad(lambda h: (h - m1) ** 2 * pdf(h), lo, hi, epsabs=1e-12, limit=200)[0]
    assert m1 == pytest.approx(m, abs=1e-6)
    assert m2 == pytest.approx(v, abs=1e-6)


def test_sampling_examples():
    x = sample_fading_db(RAY, np.random.default_rng(1), 10 ** 6)
    assert abs(np.mean(x <= 0) - 0.63212) < 0.002
    y = sample_fading_db(NAK, np.random.default_rng(2), 10 ** 6)
    assert abs(y.mean() + 0.22076) < 3 * y.std() / 1e3
    a = sample_fading_db(NAK, np.random.default_rng(3), 100)
    b = sample_fading_db(NAK, np.random.default_rng(3), 100)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("model", [RAY, NAK])
def test_cdf_shape_and_self_consistency(model):
    h = np.linspace(-200, 40, 5001)
    f = fading_db_cdf(model, h)
    assert np.all(np.diff(f) >= 0)
    assert f[0] < 1e-15 and f[-1] == pytest.approx(1.0, abs=1e-12)
    n = 10 ** 5
    x = sample_fading_db(model, np.random.default_rng(9), n)
    assert stats.kstest(x, lambda v: fading_db_cdf(model, v)).statistic <= 1.63 / math.sqrt(n)


def test_rayleigh_is_nakagami_unit():
    h = np.linspace(-40, 15, 111)
    assert np.allclose(fading_db_cdf(RAY, h), fading_db_cdf(FadingModel.nakagami(1, 1), h), atol=1e-14)


def test_invalid_models():
    with pytest.raises(ValueError):
        FadingModel.nakagami(0, 1)
    with pytest.raises(ValueError):
        FadingModel("rician")
