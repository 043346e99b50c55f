"""Finite-dimensional diagonalizable operator models and matrix p-norms.

A model stores ``A = V diag(eig) V^{-1}``; every function of ``A`` used in
the package is built from that factorization, so the spectral oracle is
exact up to the conditioning of ``V``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import optimize

from .errors import DegenerateInputError, DomainError, InputError, RangeError, SpectralCollisionError

COLLISION_TOL = 1e-12
FACTOR_TOL = 1e-10
ZERO_TOL = 1e-12
EXP_LIMIT = 700.0


@dataclass(frozen=True, eq=False)
class DiagonalizableOperator:
    """``A = basis @ diag(eig) @ basis_inv`` with spectrum in a strip or sector."""

    eig: np.ndarray
    basis: np.ndarray
    basis_inv: np.ndarray
    p_index: float = 2.0
    kind: str = "strip"
    omega: float = 0.0

    def __post_init__(self):
        eig = np.array(self.eig, dtype=complex).reshape(-1)
        basis = np.array(self.basis, dtype=complex)
        basis_inv = np.array(self.basis_inv, dtype=complex)
        n = eig.size
        if basis.shape != (n, n) or basis_inv.shape != (n, n):
            raise InputError("basis matrices must be square and match the number of eigenvalues")
        if not (np.all(np.isfinite(eig)) and np.all(np.isfinite(basis)) and np.all(np.isfinite(basis_inv))):
            raise InputError("operator data must be finite")
        if n and np.linalg.norm(basis @ basis_inv - np.eye(n)) > FACTOR_TOL:
            raise InputError("basis_inv is not the inverse of basis")
        if self.kind not in ("strip", "sectorial"):
            raise InputError(f"unknown operator kind {self.kind!r}")
        if not 1 <= self.p_index <= math.inf:
            raise InputError("p must lie in [1, inf]")
        tol = 1e-12 * max(1.0, float(np.abs(eig).max(initial=0.0)))
        if self.kind == "strip" and np.any(np.abs(eig.imag) > self.omega + tol):
            raise DomainError("eigenvalues leave the strip of the declared height")
        if self.kind == "sectorial":
            nz = eig[np.abs(eig) > ZERO_TOL]
            if np.any(np.abs(np.angle(nz)) > self.omega + 1e-12):
                raise DomainError("eigenvalues leave the sector of the declared angle")
        for name, arr in (("eig", eig), ("basis", basis), ("basis_inv", basis_inv)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "p_index", float(self.p_index))
        object.__setattr__(self, "omega", float(self.omega))

    # constructors -----------------------------------------------------
    @classmethod
    def from_eig(cls, eig, basis=None, p_index: float = 2.0, kind: str = "strip",
                 omega: float | None = None) -> "DiagonalizableOperator":
        eig = np.asarray(eig, dtype=complex).reshape(-1)
        basis = np.eye(eig.size, dtype=complex) if basis is None else np.asarray(basis, dtype=complex)
        if omega is None:
            omega = _natural_omega(eig, kind)
        return cls(eig, basis, np.linalg.inv(basis), p_index, kind, omega)

    @classmethod
    def from_matrix(cls, matrix, p_index: float = 2.0, kind: str = "strip",
                    omega: float | None = None) -> "DiagonalizableOperator":
        eig, basis = np.linalg.eig(np.asarray(matrix, dtype=complex))
        return cls.from_eig(eig, basis, p_index, kind, omega)

    @classmethod
    def random_strip(cls, n: int, height: float, rng: np.random.Generator, spread: float = 3.0,
                     max_condition: float = 50.0, p_index: float = 2.0) -> "DiagonalizableOperator":
        """Random non-normal model with eigenvalues in ``[-spread, spread] x [-height, height]``."""
        eig = rng.uniform(-spread, spread, n) + 1j * rng.uniform(-height, height, n)
        for _ in range(100):
            basis = np.eye(n) + 0.5 * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(n)
            if np.linalg.cond(basis) <= max_condition:
                break
        return cls.from_eig(eig, basis, p_index, "strip", height)

    @classmethod
    def random_self_adjoint(cls, n: int, rng: np.random.Generator, spread: float = 3.0,
                            p_index: float = 2.0) -> "DiagonalizableOperator":
        q, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        eig = rng.uniform(-spread, spread, n)
        return cls(eig, q, q.conj().T, p_index, "strip", 0.0)

    # views ------------------------------------------------------------
    @property
    def dim(self) -> int:
        return int(self.eig.size)

    @property
    def matrix(self) -> np.ndarray:
        return self.apply(lambda z: z)

    @property
    def strip_height(self) -> float:
        return float(np.abs(self.eig.imag).max(initial=0.0))

    def is_normal(self, tol: float = 1e-10) -> bool:
        return bool(np.linalg.norm(self.basis.conj().T @ self.basis - np.eye(self.dim)) <= tol)

    def apply(self, fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """``V diag(fn(eig)) V^{-1}``."""
        vals = np.asarray(fn(self.eig), dtype=complex)
        return (self.basis * vals) @ self.basis_inv

    def apply_diag(self, vals: np.ndarray) -> np.ndarray:
        """``V diag(vals) V^{-1}``; ``vals`` may carry leading batch axes."""
        vals = np.asarray(vals, dtype=complex)
        return np.einsum("ij,...j,jk->...ik", self.basis, vals, self.basis_inv)

    def log(self) -> "DiagonalizableOperator":
        """``log A`` by the principal logarithm (sectorial, injective models only)."""
        if np.any(np.abs(self.eig) <= ZERO_TOL):
            raise DomainError("log A needs an injective operator; take injective_part first")
        return DiagonalizableOperator(np.log(self.eig), self.basis, self.basis_inv, self.p_index, "strip",
                                      max(self.omega, float(np.abs(np.angle(self.eig)).max())))

    # persistence ------------------------------------------------------
    def to_dict(self) -> dict:
        def pairs(a):
            return [[float(z.real), float(z.imag)] for z in np.asarray(a).reshape(-1)]

        return {
            "dim": self.dim,
            "eig": pairs(self.eig),
            "basis": pairs(self.basis),
            "p": "inf" if math.isinf(self.p_index) else self.p_index,
            "kind": self.kind,
            "omega": self.omega,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DiagonalizableOperator":
        try:
            n = int(data["dim"])
            eig = np.array([complex(a, b) for a, b in data["eig"]])
            basis = np.array([complex(a, b) for a, b in data["basis"]]).reshape(n, n)
            p = float(data.get("p", 2.0))
            return cls.from_eig(eig, basis, p, data.get("kind", "strip"), data.get("omega"))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed operator description: {exc}") from exc

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    @classmethod
    def load(cls, path) -> "DiagonalizableOperator":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _natural_omega(eig: np.ndarray, kind: str) -> float:
    if kind == "sectorial":
        nz = eig[np.abs(eig) > ZERO_TOL]
        return float(np.abs(np.angle(nz)).max(initial=0.0))
    return float(np.abs(eig.imag).max(initial=0.0))


@dataclass(frozen=True, eq=False)
class InjectivePart:
    """Restriction of ``A`` to ``ran(A)`` in eigen-coordinates.

    ``operator`` acts on coordinates ``c``; the vector in the ambient space
    is ``embedding @ c``.  ``lift`` turns a diagonal function of the
    restricted model into an ambient matrix that annihilates ``ker(A)``.
    """

    operator: DiagonalizableOperator | None
    embedding: np.ndarray
    coembedding: np.ndarray
    empty: bool = False

    def lift(self, vals: np.ndarray) -> np.ndarray:
        vals = np.asarray(vals, dtype=complex)
        return np.einsum("ij,...j,jk->...ik", self.embedding, vals, self.coembedding)

    def function(self, fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        if self.empty:
            raise DegenerateInputError("empty injective part")
        return self.lift(fn(self.operator.eig))


def injective_part(A: DiagonalizableOperator) -> InjectivePart:
    """Drop the zero eigenvalues; keep the embedding of ``ran(A)``."""
    keep = np.abs(A.eig) > ZERO_TOL * max(1.0, float(np.abs(A.eig).max(initial=0.0)))
    r = int(keep.sum())
    emb = A.basis[:, keep]
    coemb = A.basis_inv[keep, :]
    if r == 0:
        return InjectivePart(None, emb, coemb, empty=True)
    if r == A.dim:
        return InjectivePart(A, emb, coemb)
    eig = A.eig[keep]
    op = DiagonalizableOperator(eig, np.eye(r), np.eye(r), A.p_index, A.kind, _natural_omega(eig, A.kind))
    return InjectivePart(op, emb, coemb)


def resolvent(A: DiagonalizableOperator, lam: complex) -> np.ndarray:
    """``(lam - A)^{-1}``."""
    lam = complex(lam)
    dist = np.abs(lam - A.eig)
    if A.dim and dist.min() <= COLLISION_TOL:
        raise SpectralCollisionError(f"lambda = {lam} lies within {COLLISION_TOL:g} of the spectrum")
    return A.apply(lambda z: 1.0 / (lam - z))


def group_orbit(A: DiagonalizableOperator, s) -> np.ndarray:
    """``U_s = exp(-i s A)``; ``s`` may be an array, giving a stack of matrices."""
    s = np.asarray(s, dtype=float)
    expo = np.multiply.outer(s, A.eig)
    if np.any(np.abs((-1j * expo).real) > EXP_LIMIT):
        raise RangeError("exp(-isA) overflows: |Im eig| * |s| exceeds 700")
    return A.apply_diag(np.exp(-1j * expo))


def imaginary_power(A: DiagonalizableOperator, s) -> np.ndarray:
    """``A^{-is} = exp(-i s log A)`` with the principal logarithm."""
    if np.any(np.abs(A.eig) <= ZERO_TOL):
        raise DomainError("A has a zero eigenvalue; compute on injective_part(A)")
    s = np.asarray(s, dtype=float)
    return A.apply_diag(np.exp(-1j * np.multiply.outer(s, np.log(A.eig))))


# matrix p-norms ----------------------------------------------------------

@dataclass(frozen=True)
class PNormEstimate:
    value: float
    exact: bool
    best_start: np.ndarray | None = field(default=None, repr=False)

    def __float__(self):
        return self.value


def _vec_norm(x: np.ndarray, p: float, axis=0) -> np.ndarray:
    if math.isinf(p):
        return np.abs(x).max(axis=axis)
    return (np.abs(x) ** p).sum(axis=axis) ** (1.0 / p)


def _dual(x: np.ndarray, p: float) -> np.ndarray:
    """Columnwise ``y`` with ``||y||_q = 1`` and ``<y, x> = ||x||_p``."""
    mag = np.abs(x)
    # angle-based phase avoids overflow when |x| is subnormal
    phase = np.where(mag > 0, np.exp(1j * np.angle(x)), 0.0) if np.iscomplexobj(x) else np.sign(x)
    if math.isinf(p):
        y = np.zeros_like(x)
        k = np.argmax(mag, axis=0)
        cols = np.arange(x.shape[1])
        y[k, cols] = phase[k, cols]
        return y
    y = phase * mag ** (p - 1.0)
    nrm = _vec_norm(x, p) ** (p - 1.0)
    return y / np.where(nrm > 0, nrm, 1.0)


def matrix_p_norm(M, p: float, subspace: np.ndarray | None = None, weights: np.ndarray | None = None,
                  starts: int = 32, iterations: int = 60, seed: int = 0, polish: bool = True) -> PNormEstimate:
    """``sup ||M x||_p / ||x||_p`` over ``x`` (in ``span(subspace)`` if given).

    ``weights`` turns the norms into ``(sum mu_k |x_k|^p)^{1/p}``.  The result
    is exact for ``p`` in ``{1, 2, inf}`` on the full space (and for ``p = 2``
    on subspaces); otherwise it is a lower estimate from a dual-vector power
    iteration started at random vectors and all coordinate directions.
    """
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    if M.ndim != 2 or M.shape[1] != n:
        raise InputError("expected a square matrix")
    if not np.all(np.isfinite(M)):
        raise InputError("matrix has non-finite entries")
    if not 1 <= p <= math.inf:
        raise InputError("p must lie in [1, inf]")
    if weights is not None:
        mu = np.asarray(weights, dtype=float)
        scale = np.ones(n) if math.isinf(p) else mu ** (1.0 / p)
        M = (scale[:, None] * M) / scale[None, :]
        if subspace is not None:
            subspace = scale[:, None] * np.asarray(subspace, dtype=complex)
    if subspace is not None:
        subspace = np.asarray(subspace, dtype=complex)
        if subspace.shape[1] == 0:
            return PNormEstimate(0.0, True)
        q, _ = np.linalg.qr(subspace)
        if q.shape[1] == n:
            subspace = None
    if subspace is None:
        if p == 1:
            return PNormEstimate(float(np.abs(M).sum(axis=0).max()), True)
        if math.isinf(p):
            return PNormEstimate(float(np.abs(M).sum(axis=1).max()), True)
        if p == 2:
            return PNormEstimate(float(np.linalg.norm(M, 2)), True)
        return _power_estimate(M, p, None, starts, iterations, seed, polish)
    if p == 2:
        return PNormEstimate(float(np.linalg.norm(M @ q, 2)), True)
    return _power_estimate(M, p, q, starts, iterations, seed, polish)


def _power_estimate(M, p, q, starts, iterations, seed, polish=True) -> PNormEstimate:
    n = M.shape[0]
    rng = np.random.default_rng(seed)
    real = np.all(M.imag == 0) and (q is None or np.all(q.imag == 0))
    rand = rng.standard_normal((n, starts))
    if not real:
        rand = rand + 1j * rng.standard_normal((n, starts))
    x = np.hstack([np.eye(n), rand]).astype(complex)
    if q is not None:
        x = q @ (q.conj().T @ x)
        x = x[:, _vec_norm(x, p) > 1e-12]
    qq = math.inf if p == 1 else (1.0 if math.isinf(p) else p / (p - 1.0))
    x = x / _vec_norm(x, p)
    best_vals = _vec_norm(M @ x, p)
    best_x = x.copy()
    for _ in range(iterations):
        y = M @ x
        z = _dual(y, p)
        w = M.conj().T @ z
        x_new = _dual(w, qq)
        if q is not None:
            x_new = q @ (q.conj().T @ x_new)
        nrm = _vec_norm(x_new, p)
        ok = nrm > 1e-14
        x = np.where(ok, x_new / np.where(ok, nrm, 1.0), x)
        vals = _vec_norm(M @ x, p)
        better = vals > best_vals
        best_vals = np.where(better, vals, best_vals)
        best_x[:, better] = x[:, better]
    k = int(np.argmax(best_vals))
    value, start = float(best_vals[k]), best_x[:, k]
    if q is not None and polish:
        value, start = _polish(M, p, q, start, value, real)
    return PNormEstimate(value, False, start)


def _polish(M, p, q, x0, value, real):
    """Local maximization of the norm ratio in subspace coordinates."""
    r = q.shape[1]
    c0 = q.conj().T @ x0

    def unpack(v):
        return v[:r] if real else v[:r] + 1j * v[r:]

    def ratio(v):
        x = q @ unpack(v)
        den = _vec_norm(x, p)
        return -float(_vec_norm(M @ x, p) / den) if den > 0 else 0.0

    v0 = c0.real if real else np.concatenate([c0.real, c0.imag])
    res = optimize.minimize(ratio, v0, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-13,
                                                                     "maxiter": 400 * r})
    if -res.fun > value:
        x = q @ unpack(res.x)
        return float(-res.fun), x / _vec_norm(x, p)
    return value, x0


def interpolation_upper_bound(M, p: float) -> float:
    """Riesz-Thorin upper bound ``||M||_1^{1/p} ||M||_inf^{1-1/p}``."""
    M = np.asarray(M)
    n1 = float(np.abs(M).sum(axis=0).max())
    ninf = float(np.abs(M).sum(axis=1).max())
    if math.isinf(p):
        return ninf
    return n1 ** (1.0 / p) * ninf ** (1.0 - 1.0 / p)


def strip_type_constant(A: DiagonalizableOperator, omega_prime: float, points: int = 400) -> float:
    """Sampled ``sup ||R(lam, A)||_p`` over ``Im lam = +-omega'``, ``|Re lam| <= 1e3``."""
    if omega_prime <= A.strip_height:
        raise InputError("omega' must exceed the strip height of A")
    base = np.geomspace(1e-3, 1e3, points // 2)
    re = np.unique(np.concatenate([-base, [0.0], base, A.eig.real]))
    best = 0.0
    for sign in (1.0, -1.0):
        for x in re:
            R = resolvent(A, x + 1j * sign * omega_prime)
            best = max(best, matrix_p_norm(R, A.p_index, starts=4, iterations=20).value)
    if A.p_index == 2 and A.is_normal():
        best = max(best, float(1.0 / np.min(omega_prime - np.abs(A.eig.imag))))
    return best
