import math

import numpy as np
import pytest
from scipy.integrate import quad

from mixquant.marginals import bates, exponential, marginal_from_config, normal, uniform

ALL_MARGINALS = [uniform(), exponential(), normal(), bates(2), bates(3), bates(5)]


@pytest.mark.parametrize("m", ALL_MARGINALS, ids=lambda m: m.name)
def test_cdf_nondecreasing_on_random_grid(m):
    rng = np.random.default_rng(11)
    xs = np.sort(m.inv_cdf(rng.uniform(0.001, 0.999, 500)))
    vals = np.asarray(m.cdf(xs))
    assert np.all(np.diff(vals) >= 0)


@pytest.mark.parametrize("m", ALL_MARGINALS, ids=lambda m: m.name)
def test_inverse_function_laws(m):
    rng = np.random.default_rng(12)
    for t in rng.uniform(0.001, 0.999, 200):
        x = m.quantile(float(t))
        assert float(m.cdf(x)) >= t - 1e-12          # F(F^-1(t)) >= t
    for x in m.inv_cdf(rng.uniform(0.01, 0.99, 200)):
        t = float(m.cdf(x))
        if 0.0 < t < 1.0:
            assert m.quantile(t) <= x + 1e-9         # F^-1(F(x)) <= x


@pytest.mark.parametrize("m", ALL_MARGINALS, ids=lambda m: m.name)
def test_pdf_integrates_to_one(m):
    lo = m.support.lo if math.isfinite(m.support.lo) else m.quantile(1e-10)
    hi = m.support.hi if math.isfinite(m.support.hi) else m.quantile(1 - 1e-10)
    total, _ = quad(lambda x: float(m.pdf(x)), lo, hi, limit=200,
                    points=[x for x in m.density_peaks if lo < x < hi] or None)
    assert abs(total - 1.0) < 1e-6


@pytest.mark.parametrize("m", ALL_MARGINALS, ids=lambda m: m.name)
def test_pdf_positive_at_supported_quantiles(m):
    for p in np.linspace(0.01, 0.99, 25):
        assert float(m.pdf(m.quantile(float(p)))) > 0.0


def test_uniform_basics():
    m = uniform()
    assert float(m.cdf(0.25)) == 0.25
    assert m.quantile(0.5) == 0.5
    assert m.pdf_derivative_bound == 0.0


def test_exponential_median_is_log_two():
    assert exponential().quantile(0.5) == pytest.approx(math.log(2.0), abs=1e-15)


def test_normal_quantiles_match_scipy():
    from scipy.stats import norm as sp_norm

    m = normal()
    for p in (0.05, 0.5, 0.975):
        assert m.quantile(p) == pytest.approx(sp_norm.ppf(p), abs=1e-12)
    assert m.pdf_derivative_bound == pytest.approx(
        math.exp(-0.5) / math.sqrt(2 * math.pi), rel=1e-12)


def test_bates_symmetry_and_triangle_density():
    b2 = bates(2)
    assert float(b2.cdf(0.5)) == pytest.approx(0.5, abs=1e-15)
    # mean of two uniforms has the triangle density, slope +-4
    assert float(b2.pdf(0.5)) == pytest.approx(2.0, abs=1e-12)
    assert float(b2.pdf(0.25)) == pytest.approx(1.0, abs=1e-12)
    assert b2.pdf_derivative_bound == pytest.approx(4.0, abs=1e-9)


def test_bates_cdf_matches_monte_carlo():
    rng = np.random.default_rng(202)
    for k in (2, 3, 5):
        m = bates(k)
        sample = rng.random((10 ** 5, k)).mean(axis=1)
        for x in (0.2, 0.5, 0.8):
            assert float(m.cdf(x)) == pytest.approx((sample <= x).mean(), abs=0.01)


def test_bates_inverse_roundtrip():
    m = bates(3)
    for t in (0.01, 0.2, 0.5, 0.8, 0.99):
        assert float(m.cdf(m.quantile(t))) == pytest.approx(t, abs=1e-12)


def test_config_roundtrip():
    m = marginal_from_config("exponential", {"rate": 2.0})
    assert m.quantile(0.5) == pytest.approx(math.log(2.0) / 2.0)
    assert marginal_from_config("bates3").name == "bates3"
    with pytest.raises(Exception):
        marginal_from_config("cauchy")
