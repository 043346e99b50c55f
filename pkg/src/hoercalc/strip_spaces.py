"""Weighted Sobolev, Fourier-algebra and Hardy spaces on horizontal strips.

A function ``f`` on ``St_omega = {|Im z| < omega}`` is stored through its
coefficient ``g = f~`` (inverse Fourier transform on the real line), so
that ``f(z) = int g(s) exp(-i z s) ds``.  The Sobolev norm is
``|| v e^{omega|s|} g ||_2`` and the Fourier-algebra norm the matching
``L^1`` norm.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import optimize

from .errors import DivergenceError, DivergenceWarning, DomainError, InputError
from .functions import HolomorphicFunction
from .sampling import (
    Grid,
    RefinementReport,
    SampledFunction,
    convolve,
    fourier_forward,
    fourier_inverse,
    refinement_report,
)
from .weights import Weight, weighted_norm

SPOT_TOL = 1e-8
FIT_TAIL_TOL = 1e-10
DIVERGENCE_TOL = 1e-6
NOISE_FLOOR = 1e-13


def _sample_coefficient(fn: HolomorphicFunction, grid: Grid) -> SampledFunction:
    s = grid.nodes()
    values = np.asarray(fn.coefficient(s), dtype=complex)
    jumps = []
    h = grid.spacing
    for s0, left, right in fn.jumps:
        k = (s0 + grid.half_width) / h
        idx = int(round(k))
        if abs(k - idx) > 1e-9 or not 0 <= idx < grid.points:
            warnings.warn(f"coefficient jump at s = {s0} is not on a grid node", DivergenceWarning)
            continue
        values[idx] = 0.5 * (left + right)
        jumps.append((idx, left, right))
    return SampledFunction(grid, values, tuple(jumps))


def _fit_from_center_line(func: Callable, grid: Grid, label: str) -> SampledFunction:
    xgrid = grid.dual()
    samples = np.asarray(func(xgrid.nodes().astype(complex)), dtype=complex)
    if not np.all(np.isfinite(samples)):
        raise InputError(f"{label}: non-finite center-line samples")
    peak = np.abs(samples).max()
    if peak == 0:
        return SampledFunction.zeros(grid)
    edge = max(1, grid.points // 64)
    tail = max(np.abs(samples[:edge]).max(), np.abs(samples[-edge:]).max()) / peak
    if tail > FIT_TAIL_TOL:
        raise DivergenceError(
            f"{label}: center-line samples do not decay (relative edge size {tail:.1e}); "
            "not representable on this grid",
            partial=tail,
        )
    coeff = fourier_inverse(SampledFunction(xgrid, samples), tail_tol=None).with_grid(grid)
    # roundoff in the fit would otherwise be amplified by e^{omega|s|}
    mags = np.abs(coeff.values)
    return SampledFunction(grid, np.where(mags >= NOISE_FLOOR * mags.max(), coeff.values, 0.0))


def reference_points(omega: float) -> np.ndarray:
    return np.array([0.0, 0.37 + 0.5j * omega, -0.81 - 0.5j * omega])


@dataclass(frozen=True, eq=False)
class StripFunctionRep:
    """Coefficient representation of a function on ``St_height``."""

    coeff: SampledFunction
    height: float
    weight: Weight
    label: str = ""
    source: HolomorphicFunction | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.height < 0 or not math.isfinite(self.height):
            raise InputError("strip height must be finite and nonnegative")

    # construction -----------------------------------------------------
    @classmethod
    def from_function(cls, fn: HolomorphicFunction, height: float, weight: Weight | None = None,
                      grid: Grid | None = None, verify: bool = True) -> "StripFunctionRep":
        """Closed-form coefficient when known, otherwise fit-then-verify from the center line."""
        grid = grid or Grid()
        weight = weight or Weight.constant()
        if height >= fn.theta:
            raise DomainError(f"{fn.label} is not holomorphic on a strip of height {height}")
        if fn.coefficient is not None:
            coeff = _sample_coefficient(fn, grid)
        else:
            coeff = _fit_from_center_line(fn, grid, fn.label)
        rep = cls(coeff, float(height), weight, fn.label, fn)
        if verify:
            rep.verify()
        return rep

    @classmethod
    def from_samples(cls, samples: SampledFunction, height: float, weight: Weight | None = None,
                     label: str = "") -> "StripFunctionRep":
        """Fit from center-line samples given on the dual of the coefficient grid."""
        coeff = fourier_inverse(samples)
        return cls(coeff, float(height), weight or Weight.constant(), label)

    @classmethod
    def zero(cls, height: float = 0.0, weight: Weight | None = None, grid: Grid | None = None):
        return cls(SampledFunction.zeros(grid or Grid()), height, weight or Weight.constant(), "0")

    # evaluation -------------------------------------------------------
    @property
    def grid(self) -> Grid:
        return self.coeff.grid

    def refined(self) -> "StripFunctionRep | None":
        if self.source is None:
            return None
        return StripFunctionRep.from_function(self.source, self.height, self.weight, self.grid.refined(), verify=False)

    def _raw_evaluate(self, z: np.ndarray) -> np.ndarray:
        s = self.coeff.nodes
        g = self.coeff.values
        out = np.empty(z.shape, dtype=complex)
        flat = z.reshape(-1)
        res = out.reshape(-1)
        for start in range(0, flat.size, 256):
            chunk = flat[start : start + 256]
            res[start : start + 256] = self.grid.spacing * (np.exp(-1j * np.outer(chunk, s)) @ g)
        return out

    def evaluate(self, z, extrapolate: bool = True) -> np.ndarray:
        """``f(z)`` by quadrature of the coefficient integral.

        Coefficients with jumps give second-order quadrature; when an
        analytic source is attached one Richardson step with the refined
        grid is applied.
        """
        z = np.asarray(z, dtype=complex)
        coarse = self._raw_evaluate(z)
        if extrapolate and self.coeff.jumps and self.source is not None:
            fine = self.refined()._raw_evaluate(z)
            return (4.0 * fine - coarse) / 3.0
        return coarse

    def verify(self, tol: float = SPOT_TOL) -> float:
        """Compare :meth:`evaluate` against the analytic source at three reference points."""
        if self.source is None:
            return 0.0
        pts = reference_points(self.height)
        got = self.evaluate(pts)
        want = self.source(pts)
        err = float(np.max(np.abs(got - want) / np.maximum(1.0, np.abs(want))))
        if err > tol:
            raise DivergenceError(f"{self.label}: spot-check error {err:.2e} exceeds {tol:.0e}", partial=err)
        return err

    def center_line(self) -> SampledFunction:
        """Samples of ``f`` on the real line (dual grid)."""
        return fourier_forward(self.coeff, tail_tol=None)

    # algebra ----------------------------------------------------------
    def translated(self, t: float) -> "StripFunctionRep":
        """``z -> f(z - t)``: coefficient times ``exp(i t s)``."""
        moved = self.coeff.multiply(np.exp(1j * t * self.coeff.nodes))
        src = None if self.source is None else self.source.translated(t)
        if src is not None and self.source.coefficient is not None:
            base = self.source.coefficient
            src = HolomorphicFunction(src.func, src.theta, src.label,
                                      lambda s: np.exp(1j * t * s) * base(s),
                                      tuple((s0, lo * np.exp(1j * t * s0), hi * np.exp(1j * t * s0))
                                            for s0, lo, hi in self.source.jumps))
        return StripFunctionRep(moved, self.height, self.weight, f"{self.label}(.-{t:g})", src)

    def times(self, other: "StripFunctionRep") -> "StripFunctionRep":
        """Pointwise product, computed as the convolution of coefficients."""
        coeff = convolve(self.coeff, other.coeff)
        return StripFunctionRep(coeff, self.height, self.weight, f"{self.label}*{other.label}")

    # persistence ------------------------------------------------------
    def save(self, path) -> None:
        path = Path(path)
        self.coeff.to_csv(path)
        meta = {"omega": self.height, "weight_spec": self.weight.spec, "label": self.label}
        path.with_suffix(path.suffix + ".json").write_text(json.dumps(meta, indent=2))

    @classmethod
    def load(cls, path) -> "StripFunctionRep":
        path = Path(path)
        meta = json.loads(path.with_suffix(path.suffix + ".json").read_text())
        spec = meta.get("weight_spec")
        weight = Weight.from_spec(spec) if spec else Weight.constant()
        return cls(SampledFunction.from_csv(path), float(meta["omega"]), weight, meta.get("label", ""))


@dataclass(frozen=True)
class LineFunction:
    samples: SampledFunction
    ordinate: float


@dataclass(frozen=True)
class HardyNorm:
    value: float
    ordinate: float

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class BoundaryValues:
    upper: LineFunction
    lower: LineFunction
    continuity: tuple  # ((delta, distance), ...)


def _exp_weighted_l2(coeff: SampledFunction, y: float, weight: Weight | None = None) -> float:
    factor = np.exp(y * coeff.nodes)
    if weight is not None:
        factor = factor * weight.checked(coeff.nodes)
    sq = coeff.multiply(factor).map(lambda z: np.abs(z) ** 2)
    return math.sqrt(coeff.grid.spacing * float(np.sum(sq.values.real)))


def _check_growth(coeff: SampledFunction, factor: np.ndarray, what: str) -> None:
    weighted = np.abs(coeff.values) * factor
    peak = weighted.max()
    if peak == 0:
        return
    edge = max(1, coeff.grid.points // 64)
    tail = max(weighted[:edge].max(), weighted[-edge:].max()) / peak
    if tail > DIVERGENCE_TOL:
        raise DivergenceError(f"{what}: weighted coefficient does not decay on the grid ({tail:.1e})", partial=tail)


def _extrapolated_norm(f: StripFunctionRep, p: float) -> float:
    """Weighted ``L^p`` norm; jump coefficients get one Richardson step on ``norm^p``."""
    coarse = weighted_norm(f.coeff, f.weight, f.height, p)
    if not (f.coeff.jumps and f.source is not None):
        return coarse
    fine = weighted_norm(f.refined().coeff, f.weight, f.height, p)
    return max((4.0 * fine**p - coarse**p) / 3.0, 0.0) ** (1.0 / p)


def sobolev_norm(f: StripFunctionRep) -> float:
    """``|| v e^{omega|s|} g ||_2``."""
    return _extrapolated_norm(f, 2.0)


def fourier_algebra_norm(f: StripFunctionRep) -> float:
    """``|| v e^{omega|s|} g ||_1``; warns when the weighted coefficient does not decay."""
    s = f.coeff.nodes
    weighted = np.abs(f.coeff.values) * f.weight.checked(s) * np.exp(f.height * np.abs(s))
    peak = weighted.max()
    edge = max(1, f.grid.points // 64)
    if peak > 0 and max(weighted[:edge].max(), weighted[-edge:].max()) / peak > DIVERGENCE_TOL:
        warnings.warn(f"{f.label}: coefficient not integrable within the grid", DivergenceWarning, stacklevel=2)
    return _extrapolated_norm(f, 1.0)


def norm_with_refinement(norm: Callable[[StripFunctionRep], float], f: StripFunctionRep) -> RefinementReport:
    """Evaluate a norm on the rep's grid and on the refined grid (needs an analytic source)."""
    if f.source is None:
        value = float(norm(f))
        return RefinementReport(value, value, 0.0, True)

    def compute(grid):
        return norm(StripFunctionRep.from_function(f.source, f.height, f.weight, grid, verify=False))

    return refinement_report(compute, f.grid, what=f"{norm.__name__}({f.label})")


def hardy2_norm(f: StripFunctionRep, omega_prime: float, ordinates: int = 64) -> HardyNorm:
    """``sup_{|y| <= omega'} || f(. + i y) ||_2`` computed as ``sqrt(2 pi) sup_y ||e^{ys} g||_2``."""
    if omega_prime <= 0:
        raise InputError("omega' must be positive")
    _check_growth(f.coeff, np.exp(omega_prime * np.abs(f.coeff.nodes)), f"hardy norm of {f.label}")
    ys = np.linspace(-omega_prime, omega_prime, ordinates)
    vals = np.array([_exp_weighted_l2(f.coeff, y) for y in ys])
    k = int(np.argmax(vals))
    best_y, best = float(ys[k]), float(vals[k])
    lo, hi = ys[max(k - 1, 0)], ys[min(k + 1, ordinates - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(lambda y: -_exp_weighted_l2(f.coeff, y), bounds=(lo, hi),
                                       method="bounded", options={"xatol": 1e-10})
        if -res.fun > best:
            best_y, best = float(res.x), float(-res.fun)
    return HardyNorm(math.sqrt(2 * math.pi) * best, best_y)


def line_function(f: StripFunctionRep, y: float) -> LineFunction:
    """``f_{|y} = (e^{ys} g)^`` on the dual grid (Richardson-corrected for jump coefficients)."""
    def raw(rep):
        return fourier_forward(rep.coeff.multiply(np.exp(y * rep.coeff.nodes)), tail_tol=None)

    coarse = raw(f)
    if f.coeff.jumps and f.source is not None:
        fine = raw(f.refined()).values
        n = f.grid.points
        middle = fine[n // 2 : n // 2 + n]
        coarse = SampledFunction(coarse.grid, (4.0 * middle - coarse.values) / 3.0)
    return LineFunction(coarse, float(y))


def line_sobolev_norm(f: StripFunctionRep, y: float) -> float:
    """``|| f_{|y} ||_{W^2_v(R)} = || v e^{ys} g ||_2``."""
    return _exp_weighted_l2(f.coeff, y, f.weight)


def boundary_values(f: StripFunctionRep, deltas=(0.1, 0.01, 0.001)) -> BoundaryValues:
    """Boundary lines ``f_{|+omega}`` and ``f_{|-omega}`` with an L^2 continuity check."""
    omega = f.height
    if omega <= 0:
        raise DomainError("boundary values need a strip of positive height")
    _check_growth(f.coeff, np.exp(omega * np.abs(f.coeff.nodes)), f"boundary values of {f.label}")
    upper = line_function(f, omega)
    lower = line_function(f, -omega)
    s = f.coeff.nodes
    dist = []
    for d in deltas:
        diff = f.coeff.multiply(np.exp((omega - d) * s) - np.exp(omega * s))
        sq = diff.map(lambda z: np.abs(z) ** 2)
        dist.append((d, math.sqrt(2 * math.pi * f.grid.spacing * float(np.sum(sq.values.real)))))
    return BoundaryValues(upper, lower, tuple(dist))


def boundary_norm_ratio(f: StripFunctionRep) -> float:
    """``(||f_{|omega}||^2 + ||f_{|-omega}||^2) / ||f||^2`` in the weighted Sobolev norms."""
    total = sobolev_norm(f) ** 2
    if total == 0:
        raise InputError("zero function")
    return (line_sobolev_norm(f, f.height) ** 2 + line_sobolev_norm(f, -f.height) ** 2) / total
