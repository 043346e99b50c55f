import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hoercalc.errors import DegenerateInputError, DomainError, InputError, RangeError, SpectralCollisionError
from hoercalc.operators import (
    DiagonalizableOperator,
    group_orbit,
    imaginary_power,
    injective_part,
    interpolation_upper_bound,
    matrix_p_norm,
    resolvent,
    strip_type_constant,
)


def brute_force_p_norm(M, p, samples=200_000):
    """[DERIVED] max ||Mx||_p over a dense sweep of the real unit l^p circle."""
    angle = np.linspace(0, 2 * np.pi, samples, endpoint=False)
    x = np.vstack([np.cos(angle), np.sin(angle)])
    x = x / (np.abs(x) ** p).sum(axis=0) ** (1 / p)
    return float(((np.abs(M @ x) ** p).sum(axis=0) ** (1 / p)).max())


class TestModel:
    def test_matrix_reconstructs(self, rng):
        A = DiagonalizableOperator.random_strip(5, 0.5, rng)
        eig = np.sort_complex(np.linalg.eigvals(A.matrix))
        assert np.allclose(eig, np.sort_complex(A.eig), atol=1e-10)

    def test_from_matrix(self):
        A = DiagonalizableOperator.from_matrix([[1.0, 2.0], [0.0, -1.0]])
        assert A.strip_height == 0.0
        assert np.allclose(A.matrix, [[1.0, 2.0], [0.0, -1.0]])

    def test_random_self_adjoint_is_normal(self, rng):
        A = DiagonalizableOperator.random_self_adjoint(6, rng)
        assert A.is_normal() and np.allclose(A.matrix, A.matrix.conj().T)

    def test_eigenvalues_must_fit_the_strip(self):
        with pytest.raises(DomainError):
            DiagonalizableOperator.from_eig([1 + 2j], omega=1.0)

    def test_eigenvalues_must_fit_the_sector(self):
        with pytest.raises(DomainError):
            DiagonalizableOperator.from_eig([-1.0], kind="sectorial", omega=1.0)

    def test_basis_inverse_checked(self):
        with pytest.raises(InputError):
            DiagonalizableOperator([1.0, 2.0], np.eye(2), 2 * np.eye(2))

    @pytest.mark.parametrize("kwargs", [{"kind": "disc"}, {"p_index": 0.5}])
    def test_bad_parameters(self, kwargs):
        with pytest.raises(InputError):
            DiagonalizableOperator.from_eig([1.0], **kwargs)

    def test_save_load_roundtrip(self, rng, tmp_path):
        A = DiagonalizableOperator.random_strip(4, 0.7, rng, p_index=3.0)
        A.save(tmp_path / "a.json")
        B = DiagonalizableOperator.load(tmp_path / "a.json")
        assert np.array_equal(A.eig, B.eig) and np.array_equal(A.basis, B.basis)
        assert (B.p_index, B.kind, B.omega) == (A.p_index, A.kind, A.omega)

    def test_log_of_sectorial(self):
        A = DiagonalizableOperator.from_eig([1.0, 1j, math.e], kind="sectorial")
        assert np.allclose(A.log().eig, [0.0, 1j * math.pi / 2, 1.0])

    def test_log_needs_injective(self):
        with pytest.raises(DomainError):
            DiagonalizableOperator.from_eig([0.0, 1.0], kind="sectorial").log()


class TestFunctionsOfA:
    def test_resolvent_identity(self, rng):
        A = DiagonalizableOperator.random_strip(5, 0.5, rng)
        lam, mu = 0.3 + 1j, -1 - 2j
        lhs = resolvent(A, lam) - resolvent(A, mu)
        rhs = (mu - lam) * resolvent(A, lam) @ resolvent(A, mu)
        assert np.abs(lhs - rhs).max() <= 1e-10

    def test_resolvent_inverts(self, rng):
        A = DiagonalizableOperator.random_strip(4, 0.5, rng)
        R = resolvent(A, 2j)
        assert np.abs(R @ (2j * np.eye(4) - A.matrix) - np.eye(4)).max() <= 1e-10

    def test_resolvent_collision(self):
        with pytest.raises(SpectralCollisionError):
            resolvent(DiagonalizableOperator.from_eig([1.0, 2.0]), 2.0)

    def test_group_law(self, rng):
        A = DiagonalizableOperator.random_strip(4, 0.3, rng)
        U = group_orbit(A, [0.7, 1.1, 1.8])
        assert np.abs(U[0] @ U[1] - U[2]).max() <= 1e-10

    def test_group_overflow(self):
        with pytest.raises(RangeError):
            group_orbit(DiagonalizableOperator.from_eig([1j]), 1e3)

    def test_imaginary_power_of_diagonal(self):
        """[TRIVIAL] d^{-is} entrywise."""
        d = np.array([0.5, 2.0, 7.0])
        A = DiagonalizableOperator.from_eig(d, kind="sectorial")
        assert np.allclose(np.diag(imaginary_power(A, 1.3)), d ** (-1.3j))

    def test_imaginary_power_needs_injective(self):
        with pytest.raises(DomainError):
            imaginary_power(DiagonalizableOperator.from_eig([0.0, 1.0], kind="sectorial"), 1.0)


class TestInjectivePart:
    def test_lift_annihilates_kernel(self):
        basis = np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0], [0.0, 0.0, 1.0]])
        A = DiagonalizableOperator.from_eig([0.0, 1.0, 4.0], basis, kind="sectorial")
        part = injective_part(A)
        M = part.function(np.sqrt)
        assert part.operator.dim == 2
        assert np.abs(M @ basis[:, 0]).max() <= 1e-12
        assert np.abs(M @ M - A.matrix).max() <= 1e-10

    def test_full_rank_keeps_model(self):
        A = DiagonalizableOperator.from_eig([1.0, 2.0], kind="sectorial")
        assert injective_part(A).operator is A

    def test_zero_operator(self):
        part = injective_part(DiagonalizableOperator.from_eig([0.0, 0.0], kind="sectorial"))
        assert part.empty
        with pytest.raises(DegenerateInputError):
            part.function(np.sqrt)


class TestMatrixPNorm:
    @pytest.mark.parametrize("p", [1.0, 2.0, math.inf])
    def test_exact_cases(self, p):
        M = np.array([[1.0, -2.0], [3.0, 0.5]])
        est = matrix_p_norm(M, p)
        assert est.exact
        assert est.value == pytest.approx(np.linalg.norm(M, {1.0: 1, 2.0: 2, math.inf: np.inf}[p]), rel=1e-12)

    @pytest.mark.parametrize("p", [4 / 3, 3.0])
    def test_against_brute_force(self, p):
        M = np.array([[1.0, -2.0], [3.0, 0.5]])
        est = matrix_p_norm(M, p)
        assert not est.exact
        assert est.value == pytest.approx(brute_force_p_norm(M, p), rel=1e-6)

    @settings(max_examples=30, deadline=None)
    @given(M=arrays(float, (3, 3), elements=st.floats(-5, 5)), p=st.floats(1.1, 6.0))
    def test_between_column_norm_and_interpolation(self, M, p):
        est = matrix_p_norm(M, p).value
        columns = (np.abs(M) ** p).sum(axis=0) ** (1 / p)
        assert columns.max() - 1e-12 <= est <= interpolation_upper_bound(M, p) * (1 + 1e-12)

    def test_subspace_restriction(self):
        M = np.diag([5.0, 1.0, 2.0])
        sub = np.array([[0.0], [1.0], [1.0]])
        assert matrix_p_norm(M, 2.0, subspace=sub).value == pytest.approx(math.sqrt(2.5), rel=1e-12)
        assert matrix_p_norm(M, 3.0, subspace=sub).value == pytest.approx((9 / 2) ** (1 / 3), rel=1e-8)
        assert matrix_p_norm(M, 3.0, subspace=np.zeros((3, 0))).value == 0.0

    def test_weights_conjugate(self):
        """[TRIVIAL] a diagonal matrix keeps its norm under any diagonal weight."""
        M = np.diag([1.0, -3.0])
        assert matrix_p_norm(M, 3.0, weights=np.array([1.0, 7.0])).value == pytest.approx(3.0, rel=1e-8)

    @pytest.mark.parametrize("M, p", [(np.ones((2, 3)), 2.0), (np.full((2, 2), np.nan), 2.0), (np.eye(2), 0.5)])
    def test_input_validation(self, M, p):
        with pytest.raises(InputError):
            matrix_p_norm(M, p)


class TestStripType:
    def test_normal_model(self, rng):
        """[DERIVED] ||R(lam)|| = 1/dist(lam, spectrum) for normal A, so the sup is 1/omega'."""
        A = DiagonalizableOperator.random_self_adjoint(4, rng)
        assert strip_type_constant(A, 1.0) == pytest.approx(1.0, rel=1e-10)

    def test_non_normal_is_larger(self):
        A = DiagonalizableOperator.from_eig([0.0, 0.1], np.array([[1.0, 1.0], [0.0, 0.1]]))
        assert strip_type_constant(A, 1.0) > 1.0

    def test_needs_wider_strip(self, rng):
        with pytest.raises(InputError):
            strip_type_constant(DiagonalizableOperator.random_strip(3, 0.5, rng), 0.4)
