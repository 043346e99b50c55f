import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import linalg

from hoercalc.calculus import (
    CalculusResult,
    elementary_contour,
    gaussian_approximation_harness,
    meda_hoermander,
    regularizer_profile,
    sector_calculus,
    sobolev_integral,
    spectral_oracle,
)
from hoercalc.errors import DivergenceError, DomainError, InputError
from hoercalc.functions import (
    constant,
    gaussian,
    gaussian_tanh,
    modulation,
    resolvent,
    sector_bump,
    sector_constant,
    sector_power,
    tanh,
)
from hoercalc.operators import DiagonalizableOperator, imaginary_power, injective_part
from hoercalc.strip_spaces import StripFunctionRep
from hoercalc.weights import Weight

STRIP_METHODS = {
    "contour": lambda A, f: elementary_contour(A, f),
    "sobolev": lambda A, f: sobolev_integral(A, StripFunctionRep.from_function(f, A.strip_height)),
    "meda": lambda A, f: meda_hoermander(A, f),
}


class TestSpectralOracle:
    def test_matches_matrix_exponential(self, rng):
        """[DERIVED] exp(-A^2) by scipy.linalg.expm."""
        A = DiagonalizableOperator.random_strip(5, 0.5, rng)
        expected = linalg.expm(-A.matrix @ A.matrix)
        assert np.abs(spectral_oracle(A, gaussian()).matrix - expected).max() <= 1e-10

    def test_matches_matrix_inverse(self, rng):
        """[DERIVED] (2i - A)^{-1} by numpy.linalg.inv."""
        A = DiagonalizableOperator.random_strip(5, 0.5, rng)
        expected = np.linalg.inv(2j * np.eye(5) - A.matrix)
        assert np.abs(spectral_oracle(A, resolvent(2j)).matrix - expected).max() <= 1e-10

    def test_undefined_at_eigenvalue(self):
        with pytest.raises(DomainError):
            spectral_oracle(DiagonalizableOperator.from_eig([2.0]), lambda z: 1 / (z - 2))


class TestStripMethods:
    @pytest.mark.parametrize("method", STRIP_METHODS)
    @pytest.mark.parametrize("f", [gaussian(), resolvent(2j), gaussian_tanh()], ids=lambda f: f.label)
    def test_agree_with_oracle(self, method, f):
        rng = np.random.default_rng(11)
        for _ in range(3):
            A = DiagonalizableOperator.random_strip(4, 0.5, rng)
            assert STRIP_METHODS[method](A, f).relative_deviation <= 1e-6

    def test_scalar_contour(self):
        """[TRIVIAL] e^{-0^2} = 1."""
        result = elementary_contour(DiagonalizableOperator.from_eig([0.0]), gaussian())
        assert abs(result.matrix[0, 0] - 1) <= 1e-10

    @pytest.mark.parametrize("f", [modulation(1.0), tanh(), constant()], ids=lambda f: f.label)
    def test_contour_rejects_non_integrable(self, f):
        """Symmetric truncation would cancel these tails; absolute integrability must fail instead."""
        with pytest.raises(DivergenceError):
            elementary_contour(DiagonalizableOperator.from_eig([0.0, 1.0]), f)

    @settings(max_examples=10, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_contour_is_multiplicative(self, seed):
        A = DiagonalizableOperator.random_strip(3, 0.4, np.random.default_rng(seed))
        product = elementary_contour(A, gaussian() * resolvent(2j)).matrix
        separate = elementary_contour(A, gaussian()).matrix @ elementary_contour(A, resolvent(2j)).matrix
        assert np.abs(product - separate).max() <= 1e-8 * max(1.0, np.abs(product).max())

    def test_sobolev_richardson_flag(self):
        A = DiagonalizableOperator.from_eig([0.7])
        smooth = sobolev_integral(A, StripFunctionRep.from_function(gaussian(), 0.0))
        kinked = sobolev_integral(A, StripFunctionRep.from_function(resolvent(2j), 0.0))
        assert not smooth.meta["richardson"]
        assert kinked.meta["richardson"] and kinked.relative_deviation <= 1e-8


class TestMeda:
    def test_constant_gives_identity(self):
        result = meda_hoermander(DiagonalizableOperator.from_eig([0.0, 1.0]), constant())
        assert np.abs(result.matrix - np.eye(2)).max() <= 1e-8

    def test_bounded_non_integrable(self):
        result = meda_hoermander(DiagonalizableOperator.from_eig([-1.0, 0.0, 2.0]), tanh())
        assert result.relative_deviation <= 1e-6

    def test_bounds_are_ordered(self):
        A = DiagonalizableOperator.random_self_adjoint(4, np.random.default_rng(1))
        result = meda_hoermander(A, resolvent(2j), bound_weight=Weight.poly(1.0))
        norm = np.linalg.norm(result.matrix, 2)
        assert norm <= result.meta["triangle_bound"] * (1 + 1e-9)
        assert result.meta["triangle_bound"] <= result.meta["product_bound"] * (1 + 1e-9)

    def test_localizer_must_not_vanish_at_zero(self):
        from hoercalc.hoermander import Localizer

        vanishing = Localizer("custom", lambda z: np.asarray(z, dtype=complex) * np.exp(-np.asarray(z) ** 2), 1.0)
        with pytest.raises(InputError):
            meda_hoermander(DiagonalizableOperator.from_eig([0.0]), constant(), phi=vanishing)


class TestRegularizer:
    def test_constant_is_not_a_regularizer(self):
        A = DiagonalizableOperator.random_self_adjoint(4, np.random.default_rng(1))
        assert not regularizer_profile(A, constant(), Weight.constant()).is_regularizer

    def test_gaussian_is_a_regularizer(self):
        A = DiagonalizableOperator.random_self_adjoint(4, np.random.default_rng(1))
        profile = regularizer_profile(A, gaussian(), Weight.poly(1.0))
        assert profile.is_regularizer
        assert profile.l2_profile <= profile.widened_profile

    def test_undefined_h(self):
        with pytest.raises(DomainError):
            regularizer_profile(DiagonalizableOperator.from_eig([1.0]), lambda z: 1 / (z - 1), Weight.constant())


class TestHarness:
    def test_deviations_shrink(self):
        rng = np.random.default_rng(2)
        A = DiagonalizableOperator.from_eig(rng.uniform(-0.3, 0.3, 4))
        report = gaussian_approximation_harness(A, resolvent(2j))
        assert report.monotone
        assert report.deviations[-1] <= 0.01
        assert 0 < report.k_estimate < 10

    def test_oracle_method_without_norms(self):
        A = DiagonalizableOperator.from_eig([0.1, -0.2])
        report = gaussian_approximation_harness(A, constant(), method="oracle", norms=False)
        assert report.deviations[0] == pytest.approx(1 - math.exp(-0.04), rel=1e-10)
        assert math.isnan(report.k_estimate)

    def test_method_validation(self):
        with pytest.raises(InputError):
            gaussian_approximation_harness(DiagonalizableOperator.from_eig([0.0]), constant(), method="contour")


class TestSectorCalculus:
    def test_power_pullback_is_not_contour_integrable(self):
        A = DiagonalizableOperator.from_eig([1.0, 2.0], kind="sectorial")
        with pytest.raises(DivergenceError):
            sector_calculus(A, sector_power(1.0), "contour")

    @pytest.mark.parametrize("method", ["oracle", "meda"])
    def test_power_functions(self, method):
        A = DiagonalizableOperator.from_eig([1.0, 2.0, 4.0], kind="sectorial")
        for s0 in (1.0, 2.0):
            result = sector_calculus(A, sector_power(s0), method)
            assert np.abs(result.matrix - imaginary_power(A, s0)).max() <= 1e-8

    @pytest.mark.parametrize("method", ["oracle", "contour", "sobolev", "meda"])
    def test_bump(self, method):
        A = DiagonalizableOperator.from_eig([1.0, 2.0, 4.0], kind="sectorial")
        assert sector_calculus(A, sector_bump(), method).deviation_from_oracle <= 1e-6

    def test_constant_through_meda(self):
        A = DiagonalizableOperator.from_eig([0.5, 3.0], kind="sectorial")
        assert np.abs(sector_calculus(A, sector_constant(), "meda").matrix - np.eye(2)).max() <= 1e-8

    def test_injective_part_is_lifted(self):
        basis = np.array([[1.0, 1.0], [0.0, 1.0]])
        A = DiagonalizableOperator.from_eig([0.0, 2.0], basis, kind="sectorial")
        result = sector_calculus(injective_part(A), sector_power(1.0), "oracle")
        assert np.abs(result.matrix @ basis[:, 0]).max() <= 1e-12
        assert result.matrix @ basis[:, 1] == pytest.approx(2.0 ** -1j * basis[:, 1])

    def test_zero_eigenvalue_needs_injective_part(self):
        with pytest.raises(DomainError):
            sector_calculus(DiagonalizableOperator.from_eig([0.0, 1.0], kind="sectorial"), sector_bump())

    def test_unknown_method(self):
        with pytest.raises(InputError):
            sector_calculus(DiagonalizableOperator.from_eig([1.0], kind="sectorial"), sector_bump(), "magic")


def test_result_serialization(tmp_path):
    result = elementary_contour(DiagonalizableOperator.from_eig([0.0, 1.0 + 0.2j]), gaussian())
    result.to_json(tmp_path / "r.json")
    data = json.loads((tmp_path / "r.json").read_text())
    assert data["method"] == result.method and data["dim"] == 2
    back = np.array([[complex(*z) for z in row] for row in data["matrix"]])
    assert np.array_equal(back, result.matrix)
    result.to_csv(tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "row,col,re,im" and len(lines) == 5
    assert isinstance(result, CalculusResult)
