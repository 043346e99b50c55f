import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from hoercalc.errors import InputError, InvalidWeightError
from hoercalc.sampling import Grid, SampledFunction
from hoercalc.weights import Weight, admissibility_report, inverse_norm, smooth_equivalent, weighted_norm

ADMISSIBLE = [Weight.poly(0.5), Weight.poly(1.0), Weight.poly(2.0), Weight.polylog(0.0, 1.0), Weight.polylog(1.0, 2.0)]


def gaussian_mass(grid):
    return SampledFunction.from_function(lambda s: np.exp(-(s**2) / 4) / (2 * math.sqrt(math.pi)), grid)


class TestWeight:
    def test_constant_is_one(self):
        assert np.all(Weight.constant()(np.linspace(-1e6, 1e6, 11)) == 1.0)

    def test_values_below_one_rejected(self):
        with pytest.raises(InvalidWeightError):
            Weight.custom(lambda s: 0.5 + 0 * s).checked(np.zeros(3))
        with pytest.raises(InvalidWeightError):
            Weight.table([0, 1], [0.9, 2.0])

    def test_non_finite_rejected(self):
        with pytest.raises(InputError):
            Weight.custom(lambda s: np.exp(s)).checked(np.array([1e4]))

    @pytest.mark.parametrize("spec", ["poly:1.5", "polylog:0.5:1.2", "const"])
    def test_spec_roundtrip(self, spec):
        assert Weight.from_spec(spec).describe() == spec

    def test_table_spec(self, tmp_path):
        path = tmp_path / "w.csv"
        path.write_text("s,v\n-10,11\n0,1\n10,11\n")
        weight = Weight.from_spec(f"table:{path}")
        assert weight(np.array([5.0]))[0] == pytest.approx(6.0)
        assert weight(np.array([50.0]))[0] == pytest.approx(11.0)

    @pytest.mark.parametrize("spec", ["poly", "poly:x", "bogus:1", "polylog:1", "table:/nonexistent.csv"])
    def test_bad_specs(self, spec):
        with pytest.raises(InputError):
            Weight.from_spec(spec)

    @pytest.mark.parametrize("weight", ADMISSIBLE, ids=lambda v: v.describe())
    def test_deterministic_and_finite_far_out(self, weight):
        s = np.linspace(-1e6, 1e6, 10001)
        first = weight.checked(s)
        assert np.all(np.isfinite(first)) and np.array_equal(first, weight(s))


class TestAdmissibility:
    def test_linear_weight(self):
        """[PAPER] 1+|s| is admissible with M_v = 1."""
        report = admissibility_report(Weight.poly(1.0), scan_range=1e6)
        assert report.m_v_estimate == pytest.approx(1.0, abs=1e-6)
        assert report.doubling_trend == "bounded"
        assert report.growth_exponent == pytest.approx(1.0, abs=0.01)
        # 1/(1+|s|) is square integrable, so strong admissibility holds
        assert report.strongly_admissible
        assert report.inverse_square_integral == pytest.approx(2.0, rel=1e-3)

    def test_constant_weight(self):
        """[TRIVIAL] v(s+t)/(v(s)+v(t)) = 1/2."""
        report = admissibility_report(Weight.constant())
        assert report.m_v_estimate == 0.5
        assert not report.strongly_admissible

    def test_log_doubling(self):
        """[PAPER] doubling constant of ln(e+|s|) is at most 1 + ln 2."""
        assert admissibility_report(Weight.polylog(0.0, 1.0)).doubling_sup <= 1 + math.log(2) + 1e-6

    def test_root_exponential_diverges(self):
        report = admissibility_report(Weight.custom(lambda s: np.exp(np.sqrt(np.abs(s)))))
        assert report.doubling_trend == "diverging"
        assert not report.admissible

    def test_inverse_square_integral_against_quad(self):
        """[DERIVED] int (1+|s|)^{-3} ds = 1 by quadrature."""
        report = admissibility_report(Weight.poly(1.5))
        exact = 2 * integrate.quad(lambda s: (1 + s) ** -3, 0, np.inf)[0]
        assert report.inverse_square_integral == pytest.approx(exact, rel=1e-4)

    @pytest.mark.parametrize("weight", ADMISSIBLE, ids=lambda v: v.describe())
    def test_subadditivity_on_fresh_lattice(self, weight):
        report = admissibility_report(weight)
        rng = np.random.default_rng(3)
        s, t = rng.uniform(-1e3, 1e3, (2, 20000))
        ratio = weight(s + t) / (weight(s) + weight(t))
        assert ratio.max() <= report.m_v_estimate + 1e-6

    @pytest.mark.parametrize("alpha", [0.5, 2.0, 3.0])
    @pytest.mark.parametrize("weight", ADMISSIBLE[:3], ids=lambda v: v.describe())
    def test_powers_stay_admissible(self, weight, alpha):
        assert admissibility_report(weight.power(alpha)).doubling_trend == "bounded"

    @pytest.mark.parametrize("weight", ADMISSIBLE, ids=lambda v: v.describe())
    def test_polynomial_domination(self, weight):
        report = admissibility_report(weight)
        s = np.linspace(-1e3, 1e3, 20001)
        assert np.max(weight(s) / (1 + np.abs(s)) ** (report.growth_exponent + 0.1)) < 1e3

    def test_report_invariants_and_cache(self):
        weight = Weight.poly(1.0)
        report = weight.report()
        assert report is weight.report()
        assert report.m_v_estimate >= 0.5
        assert set(report.to_dict()) >= {"m_v_estimate", "doubling_sup", "strongly_admissible"}

    def test_input_validation(self):
        with pytest.raises(InputError):
            admissibility_report(Weight.poly(1.0), scan_range=-1)
        with pytest.raises(InputError):
            admissibility_report(Weight.poly(1.0), samples=10)


class TestSmoothEquivalent:
    def test_constant_is_reproduced(self):
        smooth = smooth_equivalent(Weight.constant(), 1.0)
        assert np.abs(smooth(np.linspace(-50, 50, 101)) - 1.0).max() <= 1e-14

    def test_even_stays_even(self):
        smooth = smooth_equivalent(Weight.poly(1.0), 0.7)
        s = np.linspace(0, 100, 1001)
        assert np.abs(smooth(s) - smooth(-s)).max() <= 1e-12

    def test_equivalence_ratio_is_finite(self):
        smooth = smooth_equivalent(Weight.poly(1.0), 1.0)
        ratio = smooth.meta["equivalence_ratio"]
        assert 1.0 <= ratio < 4 * smooth.meta["kernel_sup"] ** 2

    def test_width_validation(self):
        with pytest.raises(InputError):
            smooth_equivalent(Weight.poly(1.0), 0.0)


class TestWeightedNorm:
    def test_gaussian_mass(self):
        """[DERIVED] unit Gaussian mass."""
        assert weighted_norm(gaussian_mass(Grid()), Weight.constant(), 0.0, 1.0) == pytest.approx(1.0, abs=1e-8)

    def test_linear_weight_mass(self):
        """[DERIVED] int (1+|s|) e^{-s^2/4}/(2 sqrt pi) ds = 1 + 2/sqrt(pi)."""
        value = weighted_norm(gaussian_mass(Grid()), Weight.poly(1.0), 0.0, 1.0)
        assert value == pytest.approx(1 + 2 / math.sqrt(math.pi), rel=1e-9)

    def test_exponential_weight_against_quad(self):
        """[DERIVED] ||e^{0.5|s|} e^{-s^2/4}||_2 by scipy quad."""
        grid = Grid()
        f = SampledFunction.from_function(lambda s: np.exp(-(s**2) / 4), grid)
        exact = math.sqrt(2 * integrate.quad(lambda s: math.exp(s - s * s / 2), 0, 60)[0])
        assert weighted_norm(f, Weight.constant(), 0.5, 2.0) == pytest.approx(exact, rel=1e-9)

    def test_zero(self):
        zero = SampledFunction.zeros(Grid())
        for p in (1.0, 2.0, math.inf):
            assert weighted_norm(zero, Weight.poly(1.0), 0.3, p) == 0.0

    def test_sup_norm(self):
        assert weighted_norm(gaussian_mass(Grid()), Weight.constant(), 0.0, math.inf) == pytest.approx(
            1 / (2 * math.sqrt(math.pi)))

    @pytest.mark.parametrize("p, omega", [(0.5, 0.0), (2.0, -1.0)])
    def test_input_validation(self, p, omega):
        with pytest.raises(InputError):
            weighted_norm(gaussian_mass(Grid()), Weight.constant(), omega, p)

    @settings(max_examples=20, deadline=None)
    @given(shift=st.floats(-3, 3), scale=st.floats(0.3, 3))
    def test_monotone_in_weight(self, shift, scale):
        f = SampledFunction.from_function(lambda s: np.exp(-scale * (s - shift) ** 2), Grid())
        assert weighted_norm(f, Weight.constant()) <= weighted_norm(f, Weight.poly(1.0)) * (1 + 1e-12)

    def test_inverse_norm_against_quad(self):
        """[DERIVED] ||1/(1+|s|)||_2 on [-32, 32] by scipy quad."""
        grid = Grid()
        exact = math.sqrt(2 * integrate.quad(lambda s: (1 + s) ** -2, 0, 32)[0])
        assert inverse_norm(Weight.poly(1.0), grid) == pytest.approx(exact, rel=1e-6)
