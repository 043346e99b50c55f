import cmath
import math

import numpy as np
import pytest
from scipy import integrate

from hoercalc.errors import InputError
from hoercalc.functions import (
    function_from_spec,
    gaussian,
    logistic_density,
    reference_family,
    resolvent,
    sector_function_from_spec,
    sector_power,
    sector_resolvent,
    tanh,
)

WITH_COEFFICIENT = [f for f in reference_family() if f.coefficient is not None]


def synthesize(f, z):
    """[DERIVED] int g(s) e^{-isz} ds by scipy quad, split at the coefficient's kink."""
    coef = lambda s: complex(np.asarray(f.coefficient(np.array([s])))[0])
    def part(func):
        total = 0.0
        for a, b in ((-80.0, 0.0), (0.0, 80.0)):
            total += integrate.quad(lambda s: func(coef(s) * cmath.exp(-1j * s * z)), a, b, limit=400)[0]
        return total
    return complex(part(lambda w: w.real), part(lambda w: w.imag))


@pytest.mark.parametrize("f", WITH_COEFFICIENT, ids=lambda f: f.label)
def test_closed_form_coefficients(f):
    z = 0.3 + 0.4 * min(f.theta, 1.0) * 1j
    assert synthesize(f, z) == pytest.approx(complex(f(np.array(z))), rel=1e-8, abs=1e-10)


def test_lower_half_plane_resolvent():
    f = resolvent(-2j)
    assert synthesize(f, 0.5 - 0.3j) == pytest.approx(complex(f(np.array(0.5 - 0.3j))), rel=1e-8)


def test_family_is_closed_under_star():
    for f in reference_family():
        z = np.array([0.4 + 0.3j * min(f.theta, 1.0)])
        assert f.star()(z)[0] == pytest.approx(np.conj(f(np.conj(z)))[0])


def test_product_and_translation():
    f = gaussian() * tanh()
    z = np.array([0.2 + 0.1j])
    assert f(z)[0] == pytest.approx((np.exp(-z**2) * np.tanh(z))[0])
    assert gaussian().translated(1.0)(z)[0] == pytest.approx(np.exp(-((z - 1.0) ** 2))[0])
    assert f.theta == tanh().theta


def test_logistic_density_has_unit_mass():
    """[DERIVED] quad mass of the logistic density."""
    eta = logistic_density(2.0)
    mass = integrate.quad(lambda x: complex(eta(np.array(x))).real, -60, 60)[0]
    assert mass == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("spec, label", [("gauss", "gauss"), ("resolvent:2i", "r(0+2j)"), ("mod:1", "mod(1)"),
                                         ("gauss-tanh", "gauss*tanh"), ("tanh", "tanh")])
def test_specs(spec, label):
    assert function_from_spec(spec).label == label


@pytest.mark.parametrize("spec", ["", "gauss:x", "tanh:2", "bessel"])
def test_bad_specs(spec):
    with pytest.raises(InputError):
        function_from_spec(spec)


def test_sector_specs_and_pullback():
    f = sector_function_from_spec("power:2")
    w = np.array([2.0 * np.exp(0.3j)])
    assert f(w)[0] == pytest.approx(sector_power(2.0)(w)[0])
    assert f.pullback()(np.log(w))[0] == pytest.approx(f(w)[0])
    assert sector_resolvent(-1.0).angle == pytest.approx(math.pi)
    with pytest.raises(InputError):
        sector_function_from_spec("wave")
