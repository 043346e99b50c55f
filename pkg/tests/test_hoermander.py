import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from hoercalc.errors import InputError
from hoercalc.functions import constant, gaussian, gaussian_tanh, modulation, resolvent, sech_power, tanh
from hoercalc.hoermander import (
    Localizer,
    build_partition,
    calderon_residual,
    coefficient_decay,
    hoermander_norm,
    representation_residual,
    windowed_lr_bound,
)
from hoercalc.sampling import Grid
from hoercalc.strip_spaces import StripFunctionRep, hardy2_norm
from hoercalc.weights import Weight

GAUSS = Localizer.gaussian()


def gaussian_window_norm(omega, weight=lambda s: 1.0, shift=0.0):
    """[DERIVED] ||v(s) e^{omega|s|} e^{-(s-shift)^2/4}/(2 sqrt pi)||_2 by scipy quad."""
    integrand = lambda s: (weight(s) * math.exp(omega * abs(s) - (s - shift) ** 2 / 4) / (2 * math.sqrt(math.pi))) ** 2
    return math.sqrt(integrate.quad(integrand, -60, 60, points=[0.0, shift], limit=400)[0])


class TestLocalizers:
    def test_normalized_has_unit_mass(self):
        for loc in (GAUSS, Localizer.sech_power(2), Localizer.fourier_of_bump()):
            assert loc.normalized().l2_norm() == pytest.approx(1.0, rel=1e-10)

    def test_bump_l2_by_plancherel(self):
        """[DERIVED] ||psi||_2^2 = 2 pi int exp(-2/(1-s^2)) ds, the integral by scipy quad."""
        exact = math.sqrt(2 * math.pi * integrate.quad(lambda s: math.exp(-2 / (1 - s * s)), -1, 1)[0])
        assert Localizer.fourier_of_bump().l2_norm() == pytest.approx(exact, rel=1e-10)
        assert Localizer.fourier_of_bump().scaled(-2.0).l2_norm() == pytest.approx(2 * exact, rel=1e-10)

    def test_sech_l2(self):
        """[DERIVED] int sech^4 = 4/3."""
        assert Localizer.sech_power(2).l2_norm() == pytest.approx(math.sqrt(4 / 3), rel=1e-10)

    def test_gaussian_l2(self):
        assert GAUSS.l2_norm() == pytest.approx((math.pi / 2) ** 0.25, rel=1e-12)

    def test_star_and_scale(self):
        loc = Localizer.modulated_gaussian(1.5)
        z = np.array([0.3 + 0.2j])
        assert loc.star()(z)[0] == pytest.approx(np.conj(loc(np.conj(z)))[0])
        assert loc.scaled(2.0)(z)[0] == pytest.approx(2 * loc(z)[0])

    def test_fourier_of_bump_is_entire_and_decays(self):
        loc = Localizer.fourier_of_bump()
        assert loc.strip_margin == math.inf
        mags = np.abs(loc(np.array([0.0, 10.0, 40.0, 160.0]) + 1j))
        # the transform of a C^infinity bump decays faster than any power but only root-exponentially
        assert np.all(np.diff(mags) < 0)
        assert mags[-1] * 160.0**2 < 0.1 * mags[0]

    def test_decay_constant_is_finite(self):
        assert 0 < Localizer.sech_power(2).decay_constant(1.0) < math.inf


class TestHoermanderNorm:
    def test_constant_with_gaussian_window(self):
        """Every window of 1 is a translate of the Gaussian, so the norm is the Gaussian's."""
        for omega in (0.0, 0.5, 1.0):
            est = hoermander_norm(constant(), omega=omega)
            assert est.value == pytest.approx(gaussian_window_norm(omega), rel=1e-9)

    def test_modulation_with_polynomial_weight(self):
        """[DERIVED] windows of e^{-i s0 z} have the Gaussian coefficient shifted to s = -s0."""
        s0 = 3.0
        est = hoermander_norm(modulation(s0), weight=Weight.poly(1.0), omega=0.5)
        exact = gaussian_window_norm(0.5, lambda s: 1 + abs(s), shift=-s0)
        assert est.value == pytest.approx(exact, rel=1e-9)

    def test_refinement_flag(self):
        assert hoermander_norm(resolvent(2j), omega=0.5).convergence_flag

    def test_homogeneous(self):
        base = hoermander_norm(gaussian_tanh(), omega=0.5).value
        assert hoermander_norm(gaussian_tanh().scaled(-3j), omega=0.5).value == pytest.approx(3 * base, rel=1e-12)

    @settings(max_examples=10, deadline=None)
    @given(shift=st.integers(-8, 8))
    def test_lattice_translation_invariance(self, shift):
        a = 0.25 * shift
        base = hoermander_norm(sech_power(2), omega=0.5, t_range=20, refine=False).value
        moved = hoermander_norm(sech_power(2).translated(a), omega=0.5, t_range=20, refine=False).value
        assert moved == pytest.approx(base, rel=1e-10)

    @pytest.mark.parametrize("f", [resolvent(2j), tanh(), gaussian(), modulation(1.0)], ids=lambda f: f.label)
    def test_localizers_are_equivalent(self, f):
        a = hoermander_norm(f, GAUSS, weight=Weight.poly(1.0), omega=0.5).value
        b = hoermander_norm(f, Localizer.sech_power(2), weight=Weight.poly(1.0), omega=0.5).value
        assert abs(math.log(a / b)) <= math.log(4)

    def test_bounded_function_embedding(self):
        """||f||_Hor(St_w) <= ||loc||_{H^2(St_1)} sup_{St_1} |f| for f = r_{2i}."""
        hardy = hardy2_norm(StripFunctionRep.from_function(gaussian(), 1.0), 1.0).value
        assert hoermander_norm(resolvent(2j), omega=0.5).value <= hardy * 1.0

    def test_strip_representation_input(self):
        rep = StripFunctionRep.from_function(gaussian(), 0.5)
        assert hoermander_norm(rep).value == pytest.approx(hoermander_norm(gaussian(), omega=0.5).value, rel=1e-10)

    def test_localizer_must_cover_the_strip(self):
        with pytest.raises(InputError):
            hoermander_norm(constant(), Localizer.sech_power(2), omega=2.0)

    def test_lattice_validation(self):
        with pytest.raises(InputError):
            hoermander_norm(constant(), t_step=0.0)


class TestReproducingFormulas:
    @pytest.mark.parametrize("f", [constant(), modulation(1.0), resolvent(2j)], ids=lambda f: f.label)
    def test_calderon(self, f):
        assert calderon_residual(f, GAUSS, GAUSS, t_range=20, t_step=0.05) <= 1e-3

    def test_calderon_with_slowly_decaying_window(self):
        """The bump transform decays only root-exponentially, so the lattice must be wide.

        |psi|^2 is band-limited to |s| <= 2, so any lattice step below pi sums it exactly.
        """
        bump = Localizer.fourier_of_bump()
        assert calderon_residual(constant(), bump, bump, t_range=160, t_step=2.0) <= 1e-3

    def test_calderon_on_a_strip(self):
        residual = calderon_residual(tanh(), GAUSS, GAUSS, weight=Weight.poly(1.0), omega=0.5)
        assert residual <= 1e-3

    @pytest.mark.parametrize("f, z", [(constant(), 0.0), (resolvent(2j), 0.3 + 0.4j), (modulation(1.0), 1.0)])
    def test_pointwise_representation(self, f, z):
        assert representation_residual(f, GAUSS, z) <= 1e-9

    def test_coefficient_decay_dominates_real_windows(self):
        lattice = np.linspace(-5, 5, 41)
        decay = coefficient_decay(resolvent(2j), GAUSS, lattice, omega=0.5)
        hor = hoermander_norm(resolvent(2j), omega=0.5)
        assert decay.sup > 0
        assert decay.sup <= 10 * hor.value


class TestPartition:
    def test_sums_to_one(self):
        part = build_partition(1.0, 1.0)
        t = np.linspace(-5, 5, 501)
        assert np.abs(sum(part.phi(t - n) for n in range(-40, 41)) - 1).max() <= 1e-8
        assert np.abs(sum(part.psi(t - n) ** 3 for n in range(-40, 41)) - 1).max() <= 1e-8

    def test_positive_real_part_in_strip(self):
        part = build_partition(1.0, 1.0)
        rng = np.random.default_rng(1)
        z = rng.uniform(-30, 30, 1000) + 1j * rng.uniform(-1, 1, 1000)
        assert np.all(part.phi(z).real > 0)

    def test_eta_has_unit_mass(self):
        part = build_partition(0.5, 2.0)
        mass = integrate.quad(lambda x: part.eta(np.array(x)).real, -60, 60)[0]
        assert mass == pytest.approx(1.0, rel=1e-10)

    @pytest.mark.parametrize("theta, alpha", [(0.0, 1.0), (1.0, 2.0), (1.0, -1.0)])
    def test_parameter_validation(self, theta, alpha):
        with pytest.raises(InputError):
            build_partition(theta, alpha)


class TestWindowedBound:
    def test_interpolation_bound_holds(self):
        for r in (1.0, 4 / 3, 1.5, 2.0):
            bound = windowed_lr_bound(resolvent(2j), GAUSS, r, weight=Weight.poly(1.0), omega=0.5)
            assert bound.value <= bound.interpolation_bound * (1 + 1e-9)

    def test_r_validation(self):
        with pytest.raises(InputError):
            windowed_lr_bound(resolvent(2j), GAUSS, 3.0)


def test_default_grid_is_used():
    est = hoermander_norm(gaussian(), grid=Grid(16.0, 2048))
    assert est.value == pytest.approx(hoermander_norm(gaussian()).value, rel=1e-8)
