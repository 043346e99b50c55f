"""Function spaces on sectors ``S_omega = {|arg w| < omega}`` through the pullback ``z -> f(e^z)``.

Every sector object is a strip object in logarithmic coordinates: the
Sobolev and Hörmander norms of ``f`` are those of ``f(e^z)`` on the strip of
the same half-width.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import DegenerateInputError, DivergenceError, InputError, SupportError
from .functions import HolomorphicFunction, SectorFunction
from .hoermander import HoermanderEstimate, Localizer, hoermander_norm
from .sampling import Grid, fourier_inverse_rows
from .strip_spaces import SPOT_TOL, StripFunctionRep, reference_points, sobolev_norm
from .weights import Weight

CLASSICAL_GRID = Grid(512.0, 8192)


@dataclass(frozen=True, eq=False)
class SectorFunctionRep:
    """A sector function stored as the strip representation of its pullback.

    ``source`` is the analytic sector function when known.  The strip
    representation is built on first use, so functions outside the Sobolev
    space (constants, imaginary powers) can still be handed to the
    Hörmander norm, which only needs the pullback on the real line.
    """

    angle: float
    weight: Weight
    grid: Grid
    label: str = ""
    source: SectorFunction | None = field(default=None, repr=False)
    stored: StripFunctionRep | None = field(default=None, repr=False)

    def __post_init__(self):
        if not 0 <= self.angle < math.pi:
            raise InputError("sector angle must lie in [0, pi)")
        if self.source is None and self.stored is None:
            raise InputError("a sector representation needs a source function or a stored pullback")

    @classmethod
    def from_function(cls, f: SectorFunction, angle: float, weight: Weight | None = None,
                      grid: Grid | None = None) -> "SectorFunctionRep":
        if angle >= f.angle:
            raise InputError(f"{f.label} is holomorphic only on the sector of angle {f.angle:g}")
        return cls(float(angle), weight or Weight.constant(), grid or Grid(), f.label, f)

    @classmethod
    def from_strip(cls, rep: StripFunctionRep) -> "SectorFunctionRep":
        return cls(rep.height, rep.weight, rep.grid, rep.label, None, rep)

    @property
    def pullback_function(self) -> Callable[[np.ndarray], np.ndarray] | HolomorphicFunction | StripFunctionRep:
        """Whatever evaluates ``z -> f(e^z)`` most directly."""
        if self.source is not None:
            return self.source.pullback()
        return self.stored

    @cached_property
    def pullback(self) -> StripFunctionRep:
        """Strip representation of ``f(e^z)``; raises :class:`DivergenceError` outside ``W^2``."""
        if self.stored is not None:
            return self.stored
        rep = StripFunctionRep.from_function(self.source.pullback(), self.angle, self.weight, self.grid)
        self.verify(rep)
        return rep

    def evaluate(self, w) -> np.ndarray:
        """``f(w) = pullback(log w)`` with the principal logarithm."""
        w = np.asarray(w, dtype=complex)
        return self.pullback.evaluate(np.log(w))

    def verify(self, rep: StripFunctionRep | None = None, tol: float = SPOT_TOL) -> float:
        """Compare ``rep(log w)`` with the sector function at three reference points."""
        rep = rep or self.pullback
        if self.source is None:
            return 0.0
        w = np.exp(reference_points(self.angle))
        got = rep.evaluate(np.log(w))
        want = self.source(w)
        err = float(np.max(np.abs(got - want) / np.maximum(1.0, np.abs(want))))
        if err > tol:
            raise DivergenceError(f"{self.label}: sector spot-check error {err:.2e}", partial=err)
        return err

    def save(self, path) -> None:
        path = Path(path)
        self.pullback.save(path)
        sidecar = path.with_suffix(path.suffix + ".json")
        meta = json.loads(sidecar.read_text())
        meta.update(angle=self.angle, coords="log")
        sidecar.write_text(json.dumps(meta, indent=2))

    @classmethod
    def load(cls, path) -> "SectorFunctionRep":
        path = Path(path)
        meta = json.loads(path.with_suffix(path.suffix + ".json").read_text())
        if meta.get("coords") != "log":
            raise InputError("not a sector representation (missing coords = 'log')")
        return cls.from_strip(StripFunctionRep.load(path))


def sector_sobolev_norm(f: SectorFunctionRep) -> float:
    return sobolev_norm(f.pullback)


def sector_hoermander_norm(f: SectorFunctionRep, loc: Localizer | None = None, **kwargs) -> HoermanderEstimate:
    """Hörmander estimate of the pullback on the strip of half-width ``angle``."""
    kwargs.setdefault("weight", f.weight)
    kwargs.setdefault("omega", f.angle)
    kwargs.setdefault("grid", f.grid)
    return hoermander_norm(f.pullback_function, loc, **kwargs)


@dataclass(frozen=True)
class BoundaryRayEstimates:
    sector: float
    upper: float
    lower: float
    ratio: float  # sqrt(upper^2 + lower^2) / sector, in [1, 2]


def _shifted_localizer(loc: Localizer, y: float) -> Localizer:
    base = loc.func
    return Localizer(loc.kind, lambda z: base(z + 1j * y), loc.strip_margin - abs(y), loc.decay_order,
                     f"{loc.label}(.+{y:g}i)")


def boundary_ray_estimates(f: SectorFunctionRep, loc: Localizer | None = None,
                           t_step: float = 0.25) -> BoundaryRayEstimates:
    """Hörmander estimates on the rays ``arg w = +-angle`` against the sector estimate.

    On each ray the window is the strip window restricted to the boundary
    line, so the pointwise comparison ``max(e^{ws}, e^{-ws}) = e^{w|s|}``
    carries over to the supremum.
    """
    loc = loc or Localizer.gaussian()
    omega = f.angle
    if omega <= 0:
        raise InputError("boundary rays need a positive angle")
    pull = f.pullback_function
    call = pull.evaluate if isinstance(pull, StripFunctionRep) else pull
    sector = sector_hoermander_norm(f, loc, t_step=t_step, refine=False)
    rays = []
    for y in (omega, -omega):
        ray = hoermander_norm(lambda z, y=y: call(z + 1j * y), _shifted_localizer(loc, y), t_range=sector.t_range,
                              t_step=t_step, weight=f.weight, omega=0.0, grid=f.grid, refine=False)
        rays.append(ray.value)
    if sector.value == 0:
        raise DegenerateInputError("zero function")
    ratio = math.hypot(*rays) / sector.value
    return BoundaryRayEstimates(sector.value, rays[0], rays[1], ratio)


@dataclass(frozen=True)
class DensityWitness:
    norm: float
    projected_norm: float
    relative_gap: float
    centers: np.ndarray = field(repr=False)
    coefficients: np.ndarray = field(repr=False)


def density_witness(f: SectorFunctionRep, atoms: int = 64, scale: float = 1.0,
                    span: float | None = None) -> DensityWitness:
    """Project the pullback onto ``span{exp(-(z - c_k)^2 / scale)}`` in the weighted Sobolev norm."""
    rep = f.pullback
    s = rep.coeff.nodes
    factor = rep.weight.checked(s) * np.exp(rep.height * np.abs(s))
    if span is None:
        center = np.abs(rep.center_line().values)
        x = rep.grid.dual().nodes()
        span = min(float(np.abs(x[center > 1e-8 * center.max()]).max()), 16.0) if center.max() > 0 else 1.0
    centers = np.linspace(-span, span, atoms)
    gauss = math.sqrt(scale / (4 * math.pi)) * np.exp(-scale * s**2 / 4)
    basis = (factor * gauss)[:, None] * np.exp(1j * np.outer(s, centers))
    target = factor * rep.coeff.values
    coef, *_ = np.linalg.lstsq(basis, target, rcond=None)
    h = rep.grid.spacing
    norm = math.sqrt(h) * float(np.linalg.norm(target))
    proj = math.sqrt(h) * float(np.linalg.norm(basis @ coef))
    gap = abs(norm - proj) / norm if norm > 0 else 0.0
    return DensityWitness(norm, proj, gap, centers, coef)


def default_bump(lam: np.ndarray) -> np.ndarray:
    """Smooth bump supported on ``[1/2, 2]``."""
    lam = np.asarray(lam, dtype=float)
    inside = (lam > 0.5) & (lam < 2.0)
    safe = np.where(inside, lam, 1.0)
    return np.where(inside, np.exp(-1.0 / ((safe - 0.5) * (2.0 - safe))), 0.0)


@dataclass(frozen=True)
class ClassicalCheck:
    dilation_sup: float
    argmax_t: float
    bump_norm: float
    hoermander: float
    ratio: float

    def __float__(self):
        return self.dilation_sup


def classical_hoermander_check(m: Callable[[np.ndarray], np.ndarray], alpha: float,
                               bump: Callable[[np.ndarray], np.ndarray] = default_bump,
                               log_t_range: float = 10.0, log_t_step: float = 0.1,
                               grid: Grid = CLASSICAL_GRID, hoermander_grid: Grid | None = None) -> ClassicalCheck:
    """``sup_t || bump * m(t .) ||_{W^{alpha,2}(R)}`` against the Hörmander estimate of ``m(e^s)``.

    ``grid`` is the coefficient grid; the bump lives on its dual.  The
    second norm uses the weight ``(1+|s|)^alpha`` on the real line.
    """
    if alpha <= 0.5:
        raise InputError("alpha must exceed 1/2")
    xgrid = grid.dual()
    lam = xgrid.nodes()
    eta = np.asarray(bump(lam), dtype=complex)
    mags = np.abs(eta)
    if mags.max() == 0:
        raise DegenerateInputError("bump vanishes identically")
    support = lam[mags > 1e-14 * mags.max()]
    if support.min() <= 4 * xgrid.spacing:
        raise SupportError("bump must be supported away from 0 in the positive half-line")
    if support.max() >= 0.75 * xgrid.half_width:
        raise SupportError("bump support exceeds the sampling window")
    positive = lam > 0
    safe = np.where(positive, lam, 1.0)
    weight = Weight.poly(alpha)
    s = grid.nodes()
    factor = weight(s)
    h = grid.spacing

    def norms(ts: np.ndarray) -> np.ndarray:
        with np.errstate(all="ignore"):
            vals = np.asarray(m(np.outer(ts, safe)), dtype=complex)
        rows = np.where(positive, eta * vals, 0.0)
        if not np.all(np.isfinite(rows)):
            raise InputError("multiplier is not finite on the bump support")
        coeffs = fourier_inverse_rows(rows, xgrid)
        return np.sqrt(h * np.sum((np.abs(coeffs) * factor) ** 2, axis=1))

    k = int(round(log_t_range / log_t_step))
    ts = np.exp(log_t_step * np.arange(-k, k + 1))
    values = np.concatenate([norms(ts[i : i + 64]) for i in range(0, ts.size, 64)])
    best = int(np.argmax(values))
    bump_norm = _bump_norm(eta, xgrid, factor, h)
    hor = hoermander_norm(lambda z: m(np.exp(z)), weight=weight, omega=0.0, grid=hoermander_grid or Grid(),
                          refine=False)
    ratio = float(values[best] / hor.value) if hor.value > 0 else math.inf
    return ClassicalCheck(float(values[best]), float(ts[best]), bump_norm, hor.value, ratio)


def _bump_norm(eta: np.ndarray, xgrid: Grid, factor: np.ndarray, h: float) -> float:
    coeff = fourier_inverse_rows(eta[None, :], xgrid)[0]
    return float(np.sqrt(h * np.sum((np.abs(coeff) * factor) ** 2)))
