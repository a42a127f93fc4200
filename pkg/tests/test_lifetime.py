import math

import numpy as np
import pytest
from scipy import integrate

from flightfall.errors import DomainError
from flightfall.lifetime import Exponential, Gamma, gamma_density, parse_lifetime

SPECS = [Exponential(2.0), Exponential(0.3), Gamma(2.0, 5.0), Gamma(0.7, 2.5), Gamma(3.0, 11.2)]


def test_exponential_density_at_zero():
    assert Exponential(2.0).density(0.0) == 2.0


def test_gamma_density_at_mode():
    g = Gamma(2.0, 5.0)
    assert g.mode() == 2.0
    expected = 2**5 * 2**4 * math.exp(-4) / 24
    assert g.density(2.0) == pytest.approx(expected, rel=1e-14)
    assert g.density(2.0) == pytest.approx(0.3907336, abs=1e-7)
    t = np.linspace(0.01, 10, 2001)
    assert t[np.argmax(g.density(t))] == pytest.approx(2.0, abs=0.01)


def test_density_case_split():
    assert Gamma(2.0, 5.0).density(-1.0) == 0.0
    assert Gamma(2.0, 5.0).density(0.0) == 0.0
    assert Exponential(2.0).density(-1e-9) == 0.0


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_density_integrates_to_one(spec):
    val, _ = integrate.quad(spec.density, 0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=200)
    assert val == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("spec", SPECS, ids=str)
@pytest.mark.parametrize("s", [0.0, 0.5, 1.0, 3.0])
def test_laplace_matches_quadrature(spec, s):
    val, _ = integrate.quad(lambda t: math.exp(-s * t) * spec.density(t), 0, np.inf, epsabs=1e-13, epsrel=1e-12)
    assert spec.laplace(s) == pytest.approx(val, abs=1e-9)


def test_laplace_examples():
    assert Exponential(2.0).laplace(1.0) == pytest.approx(2 / 3, rel=1e-15)
    assert Gamma(2.0, 5.0).laplace(1.0) == pytest.approx((2 / 3) ** 5, rel=1e-15)
    assert Gamma(2.0, 5.0).laplace(1.0) == pytest.approx(0.1316872, abs=1e-7)
    for spec in SPECS:
        assert spec.laplace(0.0) == 1.0


def test_gamma_shape_one_is_exponential():
    t = np.linspace(0.001, 8, 300)
    np.testing.assert_allclose(gamma_density(2.0, 1.0, t), Exponential(2.0).density(t), rtol=1e-13)


def test_gamma_shape_guard():
    with pytest.raises(DomainError):
        Gamma(2.0, 2.0)
    with pytest.raises(DomainError):
        Gamma(2.0, 1.5)
    semi = Gamma(2.0, 1.5, allow_semi_heavy=True)
    assert semi.density(1.0) > 0
    with pytest.raises(DomainError):
        Gamma(2.0, 0.9, allow_semi_heavy=True)
    with pytest.raises(DomainError):
        Exponential(0.0)


@pytest.mark.parametrize("spec", [Exponential(2.0), Gamma(2.0, 5.0)], ids=str)
def test_sample_moments(spec):
    rng = np.random.default_rng(7)
    n = 10**6
    x = spec.sample(rng, n)
    assert x.min() > 0
    sd = math.sqrt(spec.variance())
    assert abs(x.mean() - spec.mean()) <= 4 * sd / math.sqrt(n)
    # var of sample variance ~ (mu4 - sigma^4)/n; 5% is far outside that for these n
    assert x.var() == pytest.approx(spec.variance(), rel=0.01)


def test_sample_reproducible():
    a = Gamma(2.0, 5.0).sample(np.random.default_rng(3), 100)
    b = Gamma(2.0, 5.0).sample(np.random.default_rng(3), 100)
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_survival_inverse(spec):
    t = spec.survival_inverse(1e-12)
    assert spec.survival(t) == pytest.approx(1e-12, rel=1e-6)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("exp(mu=2)", Exponential(2.0)),
        ("gamma(mu=2, alpha=5)", Gamma(2.0, 5.0)),
        (" Gamma( alpha = 3.5 , mu=0.5 ) ", Gamma(0.5, 3.5)),
    ],
)
def test_parse_lifetime(text, expected):
    assert parse_lifetime(text) == expected


@pytest.mark.parametrize("text", ["weibull(k=2)", "exp(2)", "gamma(mu=2, beta=1)", "exp(mu=x)"])
def test_parse_lifetime_rejects(text):
    with pytest.raises(ValueError):
        parse_lifetime(text)
