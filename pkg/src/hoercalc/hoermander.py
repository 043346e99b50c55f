"""Hörmander-type norms on strips: sup over translates of windowed Sobolev norms.

For a localizer ``psi`` the norm of ``f`` is
``sup_t || tau_t psi * f ||_{W^2_v(St_omega)}``.  Every windowed product is
formed on the real line (center line of the strip), transformed to its
coefficient by FFT and measured with the weight ``v e^{omega|s|}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import DegenerateInputError, DivergenceError, InputError
from .functions import HolomorphicFunction
from .sampling import Grid, fourier_inverse_rows, kink_corrected_sum
from .strip_spaces import StripFunctionRep
from .weights import Weight

DIVERGENCE_TOL = 1e-6
LATTICE_TOL = 1e-4
CHUNK = 256
NOISE_FLOOR = 1e-13


@dataclass(frozen=True, eq=False)
class Localizer:
    """A nonzero holomorphic window decaying on ``St_strip_margin``."""

    kind: str
    func: Callable[[np.ndarray], np.ndarray]
    strip_margin: float
    decay_order: float = 2.0
    label: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(over="ignore", invalid="ignore"):
            return np.asarray(self.func(z), dtype=complex)

    # constructors -----------------------------------------------------
    @classmethod
    def gaussian(cls) -> "Localizer":
        return cls("gaussian", lambda z: np.exp(-(z**2)), math.inf, label="G")

    @classmethod
    def modulated_gaussian(cls, frequency: float) -> "Localizer":
        return cls("modulated_gaussian", lambda z: np.exp(-(z**2) + 1j * frequency * z), math.inf,
                   label=f"G*e^(i{frequency:g}z)")

    @classmethod
    def sech_power(cls, k: int = 2) -> "Localizer":
        return cls("sech_power", lambda z: 1.0 / np.cosh(z) ** k, math.pi / 2, label=f"sech^{k}")

    @classmethod
    def fourier_of_bump(cls, width: float = 1.0, nodes: int = 96) -> "Localizer":
        """Transform of ``exp(-1/(1-(s/width)^2))`` on ``|s| < width``; entire."""
        x, w = np.polynomial.legendre.leggauss(nodes)
        s = width * x
        b = w * width * np.exp(-1.0 / (1.0 - x**2))

        def func(z):
            z = np.asarray(z, dtype=complex)
            return (np.exp(-1j * z[..., None] * s) @ b)

        # The node sum never decays on the far real line, so the norm comes from Plancherel.
        plancherel = math.sqrt(2 * math.pi * float(np.sum(w * width * np.exp(-2.0 / (1.0 - x**2)))))
        return cls("fourier_of_bump", func, math.inf, label=f"bump^({width:g})", _cache={"l2": plancherel})

    @classmethod
    def from_function(cls, fn: HolomorphicFunction, kind: str = "custom") -> "Localizer":
        return cls(kind, fn.func, fn.theta, label=fn.label)

    # derived windows --------------------------------------------------
    def _known_l2(self, factor: float) -> dict:
        return {"l2": factor * self._cache["l2"]} if "l2" in self._cache else {}

    def scaled(self, c: complex) -> "Localizer":
        f = self.func
        return Localizer(self.kind, lambda z: c * f(z), self.strip_margin, self.decay_order, self.label,
                         self._known_l2(abs(c)))

    def star(self) -> "Localizer":
        f = self.func
        return Localizer(self.kind, lambda z: np.conj(f(np.conj(z))), self.strip_margin, self.decay_order,
                         self.label + "*", self._known_l2(1.0))

    def l2_norm(self) -> float:
        if "l2" not in self._cache:
            def density(x):
                value = abs(complex(self(np.array(x))[()])) ** 2
                return value if math.isfinite(value) else 0.0  # complex cosh/exp give nan at +-inf

            val, _ = integrate.quad(density, -np.inf, np.inf, limit=400)
            self._cache["l2"] = math.sqrt(val)
        return self._cache["l2"]

    def normalized(self) -> "Localizer":
        """Rescaled so that ``int |psi|^2 = 1`` on the real line."""
        norm = self.l2_norm()
        if norm == 0:
            raise DegenerateInputError("localizer vanishes identically")
        return self.scaled(1.0 / norm)

    def support_radius(self, rel_tol: float = 1e-17, limit: float = 1e4) -> float:
        """Smallest ``R`` with ``|psi(x)| <= rel_tol * max|psi|`` for ``|x| >= R`` (sampled)."""
        key = ("radius", rel_tol)
        if key not in self._cache:
            x = np.linspace(-limit, limit, 400001)
            mags = np.concatenate([np.abs(self(part)) for part in np.array_split(x, 40)])
            mags = np.where(np.isfinite(mags), mags, 0.0)  # overflow in cosh etc. far out
            peak = mags.max()
            if peak == 0:
                raise DegenerateInputError("localizer vanishes identically")
            big = np.abs(x[mags > rel_tol * peak])
            self._cache[key] = float(big.max()) if big.size else 0.0
        return self._cache[key]

    def decay_constant(self, height: float, order: float | None = None) -> float:
        """Measured ``C`` with ``|psi(z)| <= C (1+|Re z|)^{-order}`` on ``|Im z| <= height``."""
        order = self.decay_order if order is None else order
        x = np.linspace(-60, 60, 2401)
        worst = 0.0
        for y in np.linspace(-height, height, 9):
            worst = max(worst, float(np.max(np.abs(self(x + 1j * y)) * (1 + np.abs(x)) ** order)))
        return worst


@dataclass(frozen=True)
class HoermanderEstimate:
    value: float
    t_range: float
    t_step: float
    argmax_t: float
    convergence_flag: bool
    refined_value: float
    profile: tuple = field(repr=False, default=())  # (t values, norms)

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class DecayProfile:
    s: np.ndarray = field(repr=False)
    profile: np.ndarray = field(repr=False)
    sup: float
    argmax_s: float
    ratio: float | None = None


@dataclass(frozen=True)
class WindowedBound:
    value: float
    l2: float
    linf: float
    interpolation_bound: float
    r_prime: float


# helpers -----------------------------------------------------------------

def _as_callable(f) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(f, HolomorphicFunction):
        return f.__call__
    if isinstance(f, StripFunctionRep):
        if f.source is not None:
            return f.source.__call__
        return lambda z: f.evaluate(z, extrapolate=False)
    if callable(f):
        return lambda z: np.asarray(f(np.asarray(z, dtype=complex)), dtype=complex)
    raise InputError("expected a holomorphic function, a strip representation or a callable")


def _center_samples(f, xgrid: Grid) -> np.ndarray:
    if isinstance(f, StripFunctionRep) and f.source is None and f.grid.dual().same_as(xgrid):
        return f.center_line().values
    vals = _as_callable(f)(xgrid.nodes().astype(complex))
    if not np.all(np.isfinite(vals)):
        raise InputError("function is not finite on the real line")
    return vals


def _defaults(f, weight, omega):
    if isinstance(f, StripFunctionRep):
        weight = weight if weight is not None else f.weight
        omega = omega if omega is not None else f.height
    return (weight or Weight.constant()), (0.0 if omega is None else float(omega))


def _lattice(t_range: float, t_step: float) -> np.ndarray:
    if t_step <= 0 or t_range < 0:
        raise InputError("t_step must be positive and t_range nonnegative")
    k = int(math.floor(t_range / t_step + 1e-9))
    return t_step * np.arange(-k, k + 1)


def default_t_range(f_samples: np.ndarray, xgrid: Grid, loc: Localizer) -> float:
    """``20 (1 + width)`` of the relevant support, capped so windows stay inside the grid."""
    mags = np.abs(f_samples)
    peak = mags.max()
    x = xgrid.nodes()
    width = float(np.abs(x[mags > 1e-8 * peak]).max()) if peak > 0 else 0.0
    cap = max(xgrid.half_width - loc.support_radius() - 1.0, xgrid.half_width / 4)
    return min(20.0 * (1.0 + width), cap)


class _Windowed:
    """Weighted windowed coefficients ``v e^{omega|s|} (tau_t psi f)~`` for a batch of shifts."""

    def __init__(self, f, loc: Localizer, weight: Weight, omega: float, grid: Grid):
        self.grid = grid
        self.xgrid = grid.dual()
        self.x = self.xgrid.nodes()
        self.fx = _center_samples(f, self.xgrid)
        self.loc = loc
        s = grid.nodes()
        self.factor = weight.checked(s) * np.exp(omega * np.abs(s))
        self.edge = max(1, grid.points // 64)

    def coefficients(self, shifts: np.ndarray) -> np.ndarray:
        rows = self.loc(self.x[None, :] - np.asarray(shifts)[:, None]) * self.fx[None, :]
        return fourier_inverse_rows(rows, self.xgrid)

    def weighted(self, shifts: np.ndarray) -> np.ndarray:
        raw = np.abs(self.coefficients(shifts))
        # coefficients at roundoff level carry no information and would be amplified by the weight
        raw = np.where(raw >= NOISE_FLOOR * raw.max(axis=1, keepdims=True), raw, 0.0)
        out = raw * self.factor
        peak = out.max(axis=1)
        tail = np.maximum(out[:, : self.edge].max(axis=1), out[:, -self.edge :].max(axis=1))
        bad = (peak > 0) & (tail > DIVERGENCE_TOL * peak)
        if np.any(bad):
            raise DivergenceError(
                "windowed product is not in the weighted Sobolev space on this grid", partial=float(peak.max())
            )
        return out

    def norms(self, shifts: np.ndarray, p: float = 2.0) -> np.ndarray:
        vals = []
        for start in range(0, len(shifts), CHUNK):
            w = self.weighted(shifts[start : start + CHUNK])
            if math.isinf(p):
                vals.append(w.max(axis=1))
            else:
                vals.append(np.maximum(kink_corrected_sum(w**p, self.grid), 0.0) ** (1.0 / p))
        return np.concatenate(vals) if vals else np.zeros(0)


# operations --------------------------------------------------------------

def hoermander_norm(f, loc: Localizer | None = None, t_range: float | None = None, t_step: float = 0.25,
                    weight: Weight | None = None, omega: float | None = None, grid: Grid | None = None,
                    refine: bool = True) -> HoermanderEstimate:
    """Lattice maximum of ``|| tau_t loc * f ||_{W^2_v(St_omega)}`` with a refinement certificate."""
    loc = loc or Localizer.gaussian()
    weight, omega = _defaults(f, weight, omega)
    if grid is None:
        grid = f.grid if isinstance(f, StripFunctionRep) else Grid()
    if omega >= loc.strip_margin:
        raise InputError("localizer is not holomorphic on the requested strip")
    win = _Windowed(f, loc, weight, omega, grid)
    if t_range is None:
        t_range = default_t_range(win.fx, win.xgrid, loc)
    ts = _lattice(t_range, t_step)
    norms = win.norms(ts)
    k = int(np.argmax(norms))
    value = float(norms[k])
    refined, flag = value, True
    if refine:
        mids = ts[:-1] + t_step / 2
        extra = win.norms(mids)
        refined = max(value, float(extra.max()) if extra.size else value)
        flag = refined == 0 or (refined - value) / refined < LATTICE_TOL
    return HoermanderEstimate(value, float(t_range), float(t_step), float(ts[k]), bool(flag), refined,
                              (ts, norms))


def calderon_residual(f, phi: Localizer, psi: Localizer, t_range: float = 20.0, t_step: float = 0.05,
                      weight: Weight | None = None, omega: float | None = None,
                      grid: Grid | None = None, normalize: bool = True) -> float:
    """Relative W^2 error of ``phi f ~ sum_t (tau_t psi* phi)(tau_t psi f) dt``.

    ``psi`` is rescaled to unit L^2 mass on the line unless ``normalize`` is false.
    """
    weight, omega = _defaults(f, weight, omega)
    grid = grid or Grid()
    if normalize:
        mass = psi.l2_norm() ** 2
        if abs(mass - 1.0) > 1e-10:
            psi = psi.scaled(1.0 / math.sqrt(mass))
    xgrid = grid.dual()
    x = xgrid.nodes()
    target = phi(x) * _center_samples(f, xgrid)
    ts = _lattice(t_range, t_step)
    star = psi.star()
    acc = np.zeros_like(target)
    for start in range(0, len(ts), CHUNK):
        t = ts[start : start + CHUNK, None]
        acc += np.sum(star(x[None, :] - t) * psi(x[None, :] - t), axis=0) * t_step
    rows = np.vstack([target, target - acc * target])
    coeffs = fourier_inverse_rows(rows, xgrid)
    s = grid.nodes()
    factor = weight.checked(s) * np.exp(omega * np.abs(s))
    norms = np.sqrt(grid.spacing * np.sum((np.abs(coeffs) * factor) ** 2, axis=1))
    if norms[0] == 0:
        raise DegenerateInputError("phi * f vanishes; relative residual undefined")
    return float(norms[1] / norms[0])


def coefficient_decay(f, phi: Localizer, z_lattice, weight: Weight | None = None, omega: float | None = None,
                      grid: Grid | None = None, reference: float | None = None) -> DecayProfile:
    """``s -> sup_z v(s) e^{omega|s|} |(tau_z phi * f)~(s)|`` over complex shifts ``z``."""
    weight, omega = _defaults(f, weight, omega)
    grid = grid or Grid()
    win = _Windowed(f, phi, weight, omega, grid)
    zs = np.atleast_1d(np.asarray(z_lattice, dtype=complex))
    prof = np.zeros(grid.points)
    for start in range(0, len(zs), CHUNK):
        prof = np.maximum(prof, win.weighted(zs[start : start + CHUNK]).max(axis=0))
    k = int(np.argmax(prof))
    sup = float(prof[k])
    ratio = None if not reference else sup / reference
    return DecayProfile(grid.nodes(), prof, sup, float(grid.nodes()[k]), ratio)


def representation_residual(f, phi: Localizer, z_probe: complex, grid: Grid | None = None) -> float:
    """Error of ``phi(0) f(z) = int (tau_z phi * f)~(s) e^{-isz} ds`` at one probe point."""
    grid = grid or Grid()
    z = complex(z_probe)
    phi0 = complex(phi(np.array(0.0)))
    if phi0 == 0:
        raise InputError("phi(0) must be nonzero")
    xgrid = grid.dual()
    x = xgrid.nodes()
    fx = _center_samples(f, xgrid)
    coeff = fourier_inverse_rows((phi(x - z) * fx)[None, :], xgrid)[0]
    s = grid.nodes()
    rhs = grid.spacing * np.sum(coeff * np.exp(-1j * s * z))
    lhs = phi0 * complex(_as_callable(f)(np.array(z)))
    err = abs(lhs - rhs)
    return float(err / abs(lhs)) if lhs != 0 else float(err)


@dataclass(frozen=True)
class Partition:
    """Smooth partition of unity ``sum_n psi(z-n)^3 = sum_n phi(z-n) = 1`` on ``St_theta``."""

    eta: Localizer
    phi: Localizer
    psi: Localizer
    theta: float
    alpha: float


def build_partition(theta: float, alpha: float, nodes: int = 64) -> Partition:
    """Logistic-density partition: ``phi(z) = int_0^1 eta(s - z) ds``, ``psi = phi^(1/3)``."""
    if theta <= 0:
        raise InputError("theta must be positive")
    if not 0 < alpha < math.pi / (2 * theta):
        raise InputError(f"alpha must lie in (0, pi/(2 theta)) = (0, {math.pi / (2 * theta):.6g})")

    def eta(z):
        z = np.asarray(z, dtype=complex)
        return alpha / (4.0 * np.cosh(alpha * z / 2) ** 2)

    u, w = np.polynomial.legendre.leggauss(nodes)
    u = 0.5 * (u + 1.0)
    w = 0.5 * w

    def phi(z):
        z = np.asarray(z, dtype=complex)
        return eta(u - z[..., None]) @ w

    def psi(z):
        return np.power(phi(z), 1.0 / 3.0)

    margin = math.pi / alpha
    return Partition(
        Localizer("partition", eta, margin, label="eta"),
        Localizer("partition", phi, margin, label="phi"),
        Localizer("partition", psi, theta, label="psi"),
        float(theta),
        float(alpha),
    )


def windowed_lr_bound(f, psi: Localizer, r: float, t_range: float = 20.0, weight: Weight | None = None,
                      omega: float | None = None, grid: Grid | None = None) -> WindowedBound:
    """``sup_n || v e^{omega|s|} (tau_n psi f)~ ||_{L^{r'}}`` over integer shifts, with its L^2/L^inf bound."""
    if not 1 <= r <= 2:
        raise InputError("r must lie in [1, 2]")
    r_prime = math.inf if r == 1 else r / (r - 1)
    weight, omega = _defaults(f, weight, omega)
    grid = grid or Grid()
    win = _Windowed(f, psi, weight, omega, grid)
    ns = np.arange(-math.floor(t_range), math.floor(t_range) + 1, dtype=float)
    l2 = float(win.norms(ns, 2.0).max())
    linf = float(win.norms(ns, math.inf).max())
    if r_prime == 2:
        value = l2
    elif math.isinf(r_prime):
        value = linf
    else:
        value = float(win.norms(ns, r_prime).max())
    theta = 2.0 / r_prime
    bound = l2**theta * linf ** (1.0 - theta)
    return WindowedBound(value, l2, linf, bound, r_prime)
