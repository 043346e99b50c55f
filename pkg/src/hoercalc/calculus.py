"""Four evaluations of ``f(A)`` for diagonalizable models and their cross-checks.

* ``spectral_oracle``: ``V diag(f(eig)) V^{-1}``, the ground truth.
* ``elementary_contour``: Cauchy integral over the boundary of a strip.
* ``sobolev_integral``: ``int f~(s) exp(-isA) ds`` from the stored coefficient.
* ``meda_hoermander``: ``int F_s(A) exp(-isA) ds`` with windowed coefficients
  ``F_s(z) = (tau_z phi * f)~(s)``.

Integral methods work eigenvalue by eigenvalue and reassemble with ``V``;
by linearity this equals integrating the matrix-valued integrands.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
import numpy as np

from .errors import ContourProximityError, DivergenceError, DomainError, InputError, RangeError
from .functions import HolomorphicFunction, SectorFunction, gaussian
from .hoermander import Localizer, coefficient_decay, hoermander_norm, _center_samples
from .operators import DiagonalizableOperator, InjectivePart, interpolation_upper_bound
from .sampling import Grid, fourier_inverse_rows
from .strip_spaces import StripFunctionRep
from .weights import Weight, inverse_norm

CONTOUR_TAIL_TOL = 1e-11
ABSOLUTE_DECAY = 0.5  # shell-mass ratio; 1/x tails give 1, 1/x^2 tails 1/4
MAX_TRUNCATION = 1e6
SOBOLEV_TAIL_TOL = 1e-10
REGULARIZER_TOL = 0.05
EXP_LIMIT = 700.0
NOISE_FLOOR = 1e-13


@dataclass(frozen=True)
class CalculusResult:
    matrix: np.ndarray = field(repr=False)
    method: str
    meta: dict = field(default_factory=dict)
    deviation_from_oracle: float = 0.0
    relative_deviation: float = 0.0

    def to_dict(self) -> dict:
        mat = np.asarray(self.matrix)
        return {
            "method": self.method,
            "dim": int(mat.shape[0]),
            "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in mat],
            "deviation_from_oracle": self.deviation_from_oracle,
            "relative_deviation": self.relative_deviation,
            "meta": _jsonable(self.meta),
        }

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    def to_csv(self, path) -> None:
        mat = np.asarray(self.matrix)
        rows = ["row,col,re,im"]
        for i in range(mat.shape[0]):
            for j in range(mat.shape[1]):
                rows.append(f"{i},{j},{mat[i, j].real!r},{mat[i, j].imag!r}")
        Path(path).write_text("\n".join(rows) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def _evaluate(f, z: np.ndarray) -> np.ndarray:
    with np.errstate(all="ignore"):
        return np.asarray(f(z), dtype=complex)


def _finish(A: DiagonalizableOperator, vals: np.ndarray, method: str, f, meta: dict) -> CalculusResult:
    mat = A.apply_diag(vals)
    oracle = A.apply_diag(_evaluate(f, A.eig))
    dev = float(np.linalg.norm(mat - oracle, 2)) if A.dim else 0.0
    scale = float(np.linalg.norm(oracle, 2)) if A.dim else 0.0
    rel = dev / scale if scale > 0 else dev
    return CalculusResult(mat, method, meta, dev, rel)


def spectral_oracle(A: DiagonalizableOperator, f) -> CalculusResult:
    """``V diag(f(eig)) V^{-1}``."""
    vals = _evaluate(f, A.eig)
    if not np.all(np.isfinite(vals)):
        raise DomainError("f is undefined at an eigenvalue of A")
    return CalculusResult(A.apply_diag(vals), "oracle", {}, 0.0, 0.0)


def contour_height(A: DiagonalizableOperator, theta: float) -> float:
    """Default contour height: geometric mean of spectral height and margin, kept off both."""
    height = A.strip_height
    place = theta if math.isfinite(theta) else height + 1.0
    return max(math.sqrt(height * place), height + 0.25 * (place - height))


def elementary_contour(A: DiagonalizableOperator, f, omega_prime: float | None = None,
                       truncation: float = 40.0, theta: float | None = None, step: float | None = None,
                       adaptive: bool = True, tol: float = CONTOUR_TAIL_TOL) -> CalculusResult:
    """``(1/2 pi i) int_{boundary St_omega'} f(w) R(w, A) dw`` by sinh-mapped trapezoid sums.

    The lower line runs left to right, the upper line right to left.  With
    ``adaptive`` the truncation is enlarged fourfold while the contribution
    of ``T/2 <= |Re w| <= T`` exceeds ``tol``.  Symmetric truncation can
    cancel the tails of the two lines (``tanh``, constants), so absolute
    integrability of ``f R`` is checked separately and its failure raises
    :class:`DivergenceError`.
    """
    if theta is None:
        theta = getattr(f, "theta", math.inf)
    height = A.strip_height
    if omega_prime is None:
        omega_prime = contour_height(A, theta)
    if not height < omega_prime < theta:
        raise InputError(f"contour height {omega_prime} must lie strictly between {height} and {theta}")
    gap = min(omega_prime - height, theta - omega_prime)
    reach = max(1.0, float(np.abs(A.eig.real).max(initial=0.0)))
    if step is None:
        step = gap / (12.0 * math.sqrt(2.0) * reach)
    local = reach * math.sqrt(2.0) * step  # x-spacing near the eigenvalues
    dist = omega_prime - np.abs(A.eig.imag)
    if np.any(dist < 10 * local):
        raise ContourProximityError("an eigenvalue lies within 10 quadrature steps of the contour")

    T = float(truncation)
    while True:
        U = math.asinh(T / reach)
        u = np.arange(-math.ceil(U / step), math.ceil(U / step) + 1) * step
        x = reach * np.sinh(u)
        w = step * reach * np.cosh(u)
        lower = x - 1j * omega_prime
        upper = x + 1j * omega_prime
        fl, fu = _evaluate(f, lower), _evaluate(f, upper)
        if not (np.all(np.isfinite(fl)) and np.all(np.isfinite(fu))):
            raise DivergenceError("f is not finite on the contour")
        terms = (w * fl)[:, None] / (lower[:, None] - A.eig[None, :]) - (w * fu)[:, None] / (
            upper[:, None] - A.eig[None, :]
        )
        terms /= 2j * math.pi
        vals = terms.sum(axis=0)
        scale = max(1.0, float(np.abs(vals).max(initial=0.0)))
        outer = np.abs(x) >= T / 2
        tail = float(np.abs(terms[outer].sum(axis=0)).max(initial=0.0)) if A.dim else 0.0
        _check_absolute_decay(x, w, fl, fu, A, T, tol * scale)
        if tail <= tol * scale or not adaptive:
            break
        if T * 4 > MAX_TRUNCATION:
            raise DivergenceError(f"contour integral not converged at truncation {T:g}", partial=A.apply_diag(vals))
        T *= 4
    meta = {"omega_prime": omega_prime, "truncation": T, "step": step, "nodes": int(2 * u.size), "tail": tail}
    return _finish(A, vals, "contour", f, meta)


def _check_absolute_decay(x, w, fl, fu, A, T, floor) -> None:
    """Raise unless the mass of ``|f R|`` on ``[T/2, T]`` is well below that on ``[T/8, T/4]``."""
    if not A.dim:
        return
    dist = np.abs(x[:, None] - A.eig[None, :]).min(axis=1)  # |R| ~ 1/dist away from the spectrum
    mass = w * (np.abs(fl) + np.abs(fu)) / np.maximum(dist, 1.0) / (2 * math.pi)
    far = mass[np.abs(x) >= T / 2].sum()
    near = mass[(np.abs(x) >= T / 8) & (np.abs(x) <= T / 4)].sum()
    if far > floor and far > ABSOLUTE_DECAY * near:
        raise DivergenceError(f"f R(., A) is not absolutely integrable on the contour "
                              f"(outer/inner shell mass {far / near if near else math.inf:.2f})")


def _orbit_phases(A: DiagonalizableOperator, s: np.ndarray) -> np.ndarray:
    expo = -1j * np.multiply.outer(s, A.eig)
    if np.any(expo.real > EXP_LIMIT):
        raise RangeError("group orbit overflows on the coefficient grid")
    return np.exp(expo)


def _denoise(coeffs: np.ndarray) -> np.ndarray:
    """Zero coefficients at roundoff level so the group growth cannot amplify them."""
    mags = np.abs(coeffs)
    peak = mags.max(axis=-1, keepdims=True)
    return np.where(mags >= NOISE_FLOOR * peak, coeffs, 0.0)


def _check_tail(integrand: np.ndarray, edge: int, what: str, partial) -> None:
    peak = integrand.max(initial=0.0)
    if peak <= 0:
        return
    tail = max(integrand[:edge].max(), integrand[-edge:].max()) / peak
    if tail > SOBOLEV_TAIL_TOL:
        raise DivergenceError(f"group growth overwhelms the decay of {what} (tail {tail:.1e})", partial=partial)


def _coefficient_sum(A: DiagonalizableOperator, rep: StripFunctionRep) -> np.ndarray:
    phases = _orbit_phases(A, rep.coeff.nodes)
    g = _denoise(rep.coeff.values)
    vals = rep.grid.spacing * (g @ phases)
    integrand = (np.abs(g)[:, None] * np.abs(phases)).max(axis=1)
    _check_tail(integrand, max(1, rep.grid.points // 64), f"the coefficient of {rep.label}", A.apply_diag(vals))
    return vals


def sobolev_integral(A: DiagonalizableOperator, f: StripFunctionRep, extrapolate: bool = True) -> CalculusResult:
    """``sum_s f~(s) exp(-isA) h`` over the coefficient grid.

    Jump coefficients get one Richardson step on the refined grid when the
    representation carries its analytic source.
    """
    vals = _coefficient_sum(A, f)
    meta = {"grid": f.grid.to_dict(), "richardson": False}
    if extrapolate and f.coeff.jumps and f.source is not None:
        fine = _coefficient_sum(A, f.refined())
        meta["richardson"] = True
        meta["error_estimate"] = float(np.abs(fine - vals).max(initial=0.0))
        vals = (4.0 * fine - vals) / 3.0
    source = f.source if f.source is not None else (lambda z: f.evaluate(z, extrapolate=False))
    return _finish(A, vals, "sobolev_integral", source, meta)


def _matrix_norms(A: DiagonalizableOperator, diag_rows: np.ndarray) -> np.ndarray:
    """Operator norms of ``V diag(row) V^{-1}`` for each row (upper bounds for p != 2)."""
    p = A.p_index
    if p == 2 and A.is_normal():
        return np.abs(diag_rows).max(axis=1)
    mats = A.apply_diag(diag_rows)
    if p == 2:
        return np.linalg.norm(mats, 2, axis=(1, 2))
    return np.array([interpolation_upper_bound(m, p) for m in mats])


def meda_hoermander(A: DiagonalizableOperator, f, phi: Localizer | None = None, weight: Weight | None = None,
                    omega: float = 0.0, grid: Grid | None = None, bound_weight: Weight | None = None,
                    z_lattice=None) -> CalculusResult:
    """``f(A) = sum_s F_s(A) exp(-isA) h`` with ``F_s(z) = (tau_z phi * f)~(s)`` and ``phi(0) = 1``.

    ``meta`` carries the triangle bound ``sum ||F_s(A)|| ||U_s|| h``.  With
    ``bound_weight`` the decay constant ``C_phi``, ``||1/v||_1`` and the
    Hörmander estimate of ``f`` are measured and the product bound is added.
    """
    grid = grid or Grid()
    phi = phi or Localizer.gaussian()
    phi0 = complex(phi(np.array(0.0)))
    if phi0 == 0:
        raise InputError("phi(0) must be nonzero")
    if phi0 != 1:
        phi = phi.scaled(1.0 / phi0)
    xgrid = grid.dual()
    x = xgrid.nodes()
    fx = _center_samples(f, xgrid)
    rows = phi(x[None, :] - A.eig[:, None]) * fx[None, :]
    coeffs = fourier_inverse_rows(rows, xgrid)  # (n, N): F_s(eig_j)
    s = grid.nodes()
    phases = _orbit_phases(A, s)  # (N, n)
    h = grid.spacing
    coeffs = _denoise(coeffs)
    integrand = coeffs.T * phases
    vals = h * integrand.sum(axis=0)
    _check_tail(np.abs(integrand).max(axis=1), max(1, grid.points // 64), "the windowed coefficients",
                A.apply_diag(vals))
    f_norms = _matrix_norms(A, coeffs.T)
    u_norms = _matrix_norms(A, phases)
    meta = {"grid": grid.to_dict(), "triangle_bound": float(h * np.sum(f_norms * u_norms))}
    if bound_weight is not None:
        hor = hoermander_norm(f, Localizer.gaussian(), weight=bound_weight, omega=omega, grid=grid, refine=False)
        lattice = np.concatenate([A.eig, np.linspace(-20, 20, 161)]) if z_lattice is None else z_lattice
        decay = coefficient_decay(f, phi, lattice, weight=bound_weight, omega=omega, grid=grid)
        inv_l1 = inverse_norm(bound_weight, grid, 0.0, 1.0)
        c_phi = decay.sup / hor.value if hor.value > 0 else 0.0
        meta.update(hoermander=hor.value, decay_sup=decay.sup, c_phi=c_phi, inverse_weight_l1=inv_l1,
                    product_bound=c_phi * inv_l1 * hor.value)
    return _finish(A, vals, "meda", f if not isinstance(f, StripFunctionRep) else _as_source(f), meta)


def _as_source(rep: StripFunctionRep):
    return rep.source if rep.source is not None else (lambda z: rep.evaluate(z, extrapolate=False))


@dataclass(frozen=True)
class RegularizerProfile:
    l2_profile: float
    widened_profile: float
    is_regularizer: bool


def regularizer_profile(A: DiagonalizableOperator, h, weight: Weight, omega: float = 0.0,
                        grid: Grid | None = None) -> RegularizerProfile:
    """``max_{i,j} || e^{-omega|s|}/v(s) * (exp(-isA) h(A))_{ij} ||_{L^2(ds)}`` with a domain-doubling check."""
    grid = grid or Grid()
    hvals = _evaluate(h, A.eig)
    if not np.all(np.isfinite(hvals)):
        raise DomainError("h is undefined at an eigenvalue")

    def profile(g: Grid) -> float:
        s = g.nodes()
        damp = np.exp(-omega * np.abs(s)) / weight.checked(s)
        mats = A.apply_diag(_orbit_phases(A, s) * hvals[None, :])
        sq = g.spacing * np.sum(np.abs(mats * damp[:, None, None]) ** 2, axis=0)
        return float(np.sqrt(sq.max(initial=0.0)))

    base = profile(grid)
    wide = profile(grid.widened())
    change = abs(wide - base) / wide if wide > 0 else 0.0
    return RegularizerProfile(base, wide, bool(change < REGULARIZER_TOL))


@dataclass(frozen=True)
class ApproximationReport:
    n_list: tuple
    deviations: tuple
    hoermander_norms: tuple
    f_norm: float
    k_estimate: float
    monotone: bool


def gaussian_approximation_harness(A: DiagonalizableOperator, f: HolomorphicFunction, n_list=(1, 4, 16, 64),
                                   method: str = "meda", weight: Weight | None = None, omega: float = 0.0,
                                   grid: Grid | None = None, norms: bool = True) -> ApproximationReport:
    """Evaluate ``g_n = exp(-z^2/n) f`` and track ``||g_n(A) - f(A)||`` and ``||g_n||_Hör / ||f||_Hör``."""
    if method not in ("meda", "oracle"):
        raise InputError("method must be 'meda' or 'oracle'")
    grid = grid or Grid()
    weight = weight or Weight.constant()
    target = spectral_oracle(A, f).matrix
    devs, hors = [], []
    for n in n_list:
        g = gaussian(float(n)) * f
        if method == "meda":
            mat = meda_hoermander(A, g, grid=grid).matrix
        else:
            mat = spectral_oracle(A, g).matrix
        devs.append(float(np.linalg.norm(mat - target, 2)))
        if norms:
            hors.append(hoermander_norm(g, weight=weight, omega=omega, grid=grid, refine=False).value)
    f_norm = hoermander_norm(f, weight=weight, omega=omega, grid=grid, refine=False).value if norms else math.nan
    k_est = max(hors) / f_norm if norms and f_norm > 0 else math.nan
    monotone = all(b <= a * (1 + 1e-12) + 1e-14 for a, b in zip(devs, devs[1:]))
    return ApproximationReport(tuple(n_list), tuple(devs), tuple(hors), f_norm, k_est, monotone)


def sector_calculus(A, f: SectorFunction, method: str = "contour", **kwargs) -> CalculusResult:
    """``f(A) = [f(e^z)](log A)`` evaluated by a strip method on ``log A``.

    ``A`` is a sectorial model without zero eigenvalues, or an
    :class:`InjectivePart`, in which case the result is lifted back to the
    ambient space (acting as zero on the kernel).
    """
    part = None
    if isinstance(A, InjectivePart):
        if A.empty:
            raise DomainError("empty injective part")
        part, A = A, A.operator
    if np.any(np.abs(A.eig) <= 1e-12):
        raise DomainError("zero eigenvalue present; pass injective_part(A)")
    log_a = A.log()
    pulled = f.pullback()
    if method == "oracle":
        res = spectral_oracle(log_a, pulled)
    elif method == "contour":
        res = elementary_contour(log_a, pulled, **kwargs)
    elif method == "sobolev":
        rep = StripFunctionRep.from_function(pulled, log_a.strip_height, grid=kwargs.pop("grid", None))
        res = sobolev_integral(log_a, rep, **kwargs)
    elif method == "meda":
        res = meda_hoermander(log_a, pulled, **kwargs)
    else:
        raise InputError(f"unknown method {method!r}")
    direct = A.apply(f)
    mat = res.matrix
    dev = float(np.linalg.norm(mat - direct, 2))
    scale = float(np.linalg.norm(direct, 2))
    if part is not None and part.embedding.shape[1] < part.embedding.shape[0]:
        mat = part.embedding @ mat @ part.coembedding
    meta = dict(res.meta, strip_method=res.method)
    return CalculusResult(mat, f"sector/{res.method}", meta, dev, dev / scale if scale > 0 else dev)
