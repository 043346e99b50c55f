"""Uniform symmetric grids, sampled functions and FFT-based transforms.

Fourier convention (non-unitary)::

    forward:  f^(t)  = int f(s) exp(-i s t) ds
    inverse:  f~(s)  = (1/2pi) int f(t) exp(+i s t) dt

so that ||f^||_2^2 = 2pi ||f||_2^2 and (f g)~ = f~ * g~.

A grid with half-width L and N points samples ``s_k = -L + k h`` with
``h = 2L/N``; the sample at ``+L`` is omitted, which makes the plain
Riemann sum ``h * sum`` the periodic trapezoidal rule.  The dual grid has
spacing ``pi/L`` and half-width ``pi/h``.

Piecewise smooth functions may carry explicit jump data: at a jump index
the stored value is the average of the one-sided limits (the value the
trapezoidal rule needs), while the one-sided limits themselves are kept so
that nonlinear maps such as ``|f|**2`` are averaged after, not before, the
map is applied.
"""

from __future__ import annotations

import logging
import math
import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import ConfigurationError, ConvergenceWarning, InputError, TailWarning

LOGGER = logging.getLogger(__name__)

BINARY_MAGIC = b"HLAB"
BINARY_VERSION = 1
DEFAULT_TAIL_TOL = 1e-8
REFINEMENT_TOL = 1e-4


@dataclass(frozen=True)
class Grid:
    """Uniform grid on ``[-half_width, half_width)`` with ``points`` samples."""

    half_width: float = 32.0
    points: int = 4096

    def __post_init__(self):
        n = self.points
        if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
            raise ConfigurationError(f"grid size must be an integer, got {n!r}")
        if n < 8 or n & (n - 1):
            raise ConfigurationError(f"grid size must be a power of two >= 8, got {n}")
        if not (math.isfinite(self.half_width) and self.half_width > 0):
            raise ConfigurationError(f"half-width must be positive, got {self.half_width}")
        object.__setattr__(self, "points", int(n))
        object.__setattr__(self, "half_width", float(self.half_width))

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points

    @property
    def zero_index(self) -> int:
        return self.points // 2

    def nodes(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.points)

    def dual(self) -> "Grid":
        """Grid on which the transform of a function on this grid lives."""
        return Grid(math.pi / self.spacing, self.points)

    def refined(self) -> "Grid":
        """Same extent, twice the resolution."""
        return Grid(self.half_width, 2 * self.points)

    def widened(self) -> "Grid":
        """Twice the extent, same resolution."""
        return Grid(2 * self.half_width, 2 * self.points)

    def same_as(self, other: "Grid") -> bool:
        return self.points == other.points and math.isclose(
            self.half_width, other.half_width, rel_tol=1e-12
        )

    def to_dict(self) -> dict:
        return {"half_width": self.half_width, "points": self.points}


def _as_values(values, n: int) -> np.ndarray:
    arr = np.array(values, dtype=complex).reshape(-1)
    if arr.shape[0] != n:
        raise InputError(f"expected {n} samples, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise InputError("samples contain NaN or infinite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Complex samples ``values[k] ~ f(-L + k h)`` on a :class:`Grid`.

    ``jumps`` lists ``(index, left_limit, right_limit)`` triples for
    piecewise smooth functions; ``values[index]`` must equal the average.
    """

    grid: Grid
    values: np.ndarray
    jumps: tuple = field(default=())

    def __post_init__(self):
        if not isinstance(self.grid, Grid):
            raise InputError("grid must be a Grid instance")
        object.__setattr__(self, "values", _as_values(self.values, self.grid.points))
        cleaned = []
        for idx, left, right in self.jumps:
            idx = int(idx)
            if not 0 <= idx < self.grid.points:
                raise InputError(f"jump index {idx} outside the grid")
            left, right = complex(left), complex(right)
            if not (np.isfinite(left) and np.isfinite(right)):
                raise InputError("jump limits must be finite")
            cleaned.append((idx, left, right))
        object.__setattr__(self, "jumps", tuple(sorted(cleaned)))

    # construction -----------------------------------------------------
    @classmethod
    def from_function(cls, func: Callable, grid: Grid) -> "SampledFunction":
        return cls(grid, func(grid.nodes()))

    @classmethod
    def zeros(cls, grid: Grid) -> "SampledFunction":
        return cls(grid, np.zeros(grid.points, dtype=complex))

    # views ------------------------------------------------------------
    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes()

    def one_sided(self) -> tuple[np.ndarray, np.ndarray]:
        """Arrays of left and right limits (equal to ``values`` off jumps)."""
        left = np.array(self.values)
        right = np.array(self.values)
        for idx, lo, hi in self.jumps:
            left[idx], right[idx] = lo, hi
        return left, right

    # pointwise algebra ------------------------------------------------
    def map(self, op: Callable[[np.ndarray], np.ndarray]) -> "SampledFunction":
        """Apply an elementwise map, averaging the one-sided images at jumps."""
        out = np.asarray(op(self.values), dtype=complex)
        if not self.jumps:
            return SampledFunction(self.grid, out)
        idx = np.array([j[0] for j in self.jumps])
        lo = np.asarray(op(np.array([j[1] for j in self.jumps])), dtype=complex)
        hi = np.asarray(op(np.array([j[2] for j in self.jumps])), dtype=complex)
        out = np.array(out)
        out[idx] = 0.5 * (lo + hi)
        return SampledFunction(self.grid, out, tuple(zip(idx, lo, hi)))

    def multiply(self, factor) -> "SampledFunction":
        """Multiply by a continuous factor (array, scalar or SampledFunction)."""
        if isinstance(factor, SampledFunction):
            return self._combine(factor, np.multiply)
        arr = np.broadcast_to(np.asarray(factor, dtype=complex), self.values.shape)
        jumps = tuple((i, lo * arr[i], hi * arr[i]) for i, lo, hi in self.jumps)
        return SampledFunction(self.grid, self.values * arr, jumps)

    def _combine(self, other: "SampledFunction", op) -> "SampledFunction":
        if not self.grid.same_as(other.grid):
            raise InputError("grid mismatch")
        if not self.jumps and not other.jumps:
            return SampledFunction(self.grid, op(self.values, other.values))
        la, ra = self.one_sided()
        lb, rb = other.one_sided()
        lo, hi = op(la, lb), op(ra, rb)
        out = op(self.values, other.values)
        idx = sorted({j[0] for j in self.jumps} | {j[0] for j in other.jumps})
        out = np.array(out)
        for i in idx:
            out[i] = 0.5 * (lo[i] + hi[i])
        return SampledFunction(self.grid, out, tuple((i, lo[i], hi[i]) for i in idx))

    def __add__(self, other):
        if isinstance(other, SampledFunction):
            return self._combine(other, np.add)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, SampledFunction):
            return self._combine(other, np.subtract)
        return NotImplemented

    def __mul__(self, other):
        return self.multiply(other)

    __rmul__ = __mul__

    def __neg__(self):
        return self.multiply(-1.0)

    def conj(self) -> "SampledFunction":
        return self.map(np.conj)

    def abs(self) -> "SampledFunction":
        return self.map(np.abs)

    def max_abs(self) -> float:
        left, right = self.one_sided()
        return float(max(np.max(np.abs(left)), np.max(np.abs(right))))

    def with_grid(self, grid: Grid) -> "SampledFunction":
        return SampledFunction(grid, self.values, self.jumps)

    # serialization ----------------------------------------------------
    def to_csv(self, path) -> None:
        data = np.column_stack([self.nodes, self.values.real, self.values.imag])
        np.savetxt(path, data, delimiter=",", header="s,re,im", comments="", fmt="%.17g")

    @classmethod
    def from_csv(cls, path) -> "SampledFunction":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if data.shape[1] != 3:
            raise InputError("CSV must have columns s, re, im")
        n = data.shape[0]
        h = data[1, 0] - data[0, 0]
        grid = Grid(n * h / 2.0, n)
        if not np.allclose(data[:, 0], grid.nodes(), rtol=0, atol=1e-9 * max(1.0, grid.half_width)):
            raise InputError("CSV nodes are not a symmetric uniform grid")
        return cls(grid, data[:, 1] + 1j * data[:, 2])

    def to_bytes(self) -> bytes:
        head = BINARY_MAGIC + struct.pack("<IQd", BINARY_VERSION, self.grid.points, self.grid.half_width)
        body = np.empty(2 * self.grid.points, dtype="<f8")
        body[0::2] = self.values.real
        body[1::2] = self.values.imag
        return head + body.tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "SampledFunction":
        if blob[:4] != BINARY_MAGIC:
            raise InputError("bad magic; not a grid-function dump")
        version, n, half_width = struct.unpack("<IQd", blob[4:24])
        if version != BINARY_VERSION:
            raise InputError(f"unsupported dump version {version}")
        body = np.frombuffer(blob[24:], dtype="<f8")
        if body.size != 2 * n:
            raise InputError("truncated dump")
        return cls(Grid(half_width, int(n)), body[0::2] + 1j * body[1::2])

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> "SampledFunction":
        return cls.from_bytes(Path(path).read_bytes())


def check_tails(f: SampledFunction, tol: float = DEFAULT_TAIL_TOL, what: str = "function") -> float:
    """Relative size of the samples in the outer 1/32 of the grid; warns above ``tol``."""
    mags = np.abs(f.values)
    peak = mags.max()
    if peak == 0:
        return 0.0
    edge = max(1, f.grid.points // 32)
    ratio = float(max(mags[:edge].max(), mags[-edge:].max()) / peak)
    if ratio > tol:
        warnings.warn(
            f"{what} has relative tail mass {ratio:.2e} at the grid ends", TailWarning, stacklevel=3
        )
    return ratio


def _sign(n: int) -> np.ndarray:
    return np.where(np.arange(n) % 2 == 0, 1.0, -1.0)


def fourier_forward(g: SampledFunction, tail_tol: float | None = DEFAULT_TAIL_TOL) -> SampledFunction:
    """Transform ``g -> int g(s) exp(-i s t) ds`` sampled on the dual grid."""
    if tail_tol is not None:
        check_tails(g, tail_tol, "forward-transform input")
    n = g.grid.points
    sign = _sign(n)
    out = g.grid.spacing * sign * np.fft.fft(sign * g.values)
    return SampledFunction(g.grid.dual(), out)


def fourier_inverse(f: SampledFunction, tail_tol: float | None = DEFAULT_TAIL_TOL) -> SampledFunction:
    """Transform ``f -> (1/2pi) int f(t) exp(i s t) dt`` sampled on the dual grid."""
    if tail_tol is not None:
        check_tails(f, tail_tol, "inverse-transform input")
    n = f.grid.points
    sign = _sign(n)
    out = sign * np.fft.ifft(sign * f.values) / f.grid.dual().spacing
    return SampledFunction(f.grid.dual(), out)


def fourier_inverse_rows(rows: np.ndarray, grid: Grid) -> np.ndarray:
    """Row-wise inverse transform of a stack of samples on ``grid``."""
    sign = _sign(grid.points)
    return sign * np.fft.ifft(rows * sign, axis=-1) / grid.dual().spacing


def fourier_forward_rows(rows: np.ndarray, grid: Grid) -> np.ndarray:
    """Row-wise forward transform of a stack of samples on ``grid``."""
    sign = _sign(grid.points)
    return grid.spacing * sign * np.fft.fft(rows * sign, axis=-1)


def convolve(f: SampledFunction, g: SampledFunction) -> SampledFunction:
    """Linear convolution ``int f(t-s) g(s) ds`` restricted to the grid."""
    if not f.grid.same_as(g.grid):
        raise InputError("convolution needs both factors on the same grid")
    n = f.grid.points
    size = 2 * n
    full = np.fft.ifft(np.fft.fft(f.values, size) * np.fft.fft(g.values, size))
    start = n // 2
    return SampledFunction(f.grid, f.grid.spacing * full[start : start + n])


def integral(f: SampledFunction) -> complex:
    """Trapezoidal rule over the grid (periodic form ``h * sum``)."""
    return complex(f.grid.spacing * np.sum(f.values))


def kink_corrected_sum(values: np.ndarray, grid: Grid) -> np.ndarray:
    """``h * sum`` along the last axis with an Euler-Maclaurin correction for a kink at ``s = 0``.

    Integrands such as ``e^{2 omega |s|} |g|^2`` are continuous with a jump in
    the derivative at the origin, which limits the plain rule to ``O(h^2)``.
    The first two Euler-Maclaurin terms at the kink, with one-sided
    five-point differences, leave an ``O(h^6)`` error.
    """
    h = grid.spacing
    k = grid.zero_index
    ahead = np.stack([values[..., k + j] for j in range(5)])
    behind = np.stack([values[..., k - j] for j in range(5)])
    first = np.array([-25, 48, -36, 16, -3]) / (12 * h)
    third = np.array([-5, 18, -24, 14, -3]) / (2 * h**3)
    slope_jump = np.tensordot(first, ahead + behind, axes=1)  # F'(0+) - F'(0-)
    third_jump = np.tensordot(third, ahead + behind, axes=1)  # F'''(0+) - F'''(0-)
    return h * np.sum(values, axis=-1) + h**2 / 12 * slope_jump - h**4 / 720 * third_jump


def translate(f: SampledFunction, t: float) -> SampledFunction:
    """``x -> f(x - t)`` by modulating the inverse transform with ``exp(i t s)``."""
    coeff = fourier_inverse(f, tail_tol=None)
    moved = coeff.values * np.exp(1j * t * coeff.nodes)
    out = fourier_forward(SampledFunction(coeff.grid, moved), tail_tol=None)
    return SampledFunction(f.grid, out.values)


@dataclass(frozen=True)
class RefinementReport:
    """A quantity on a grid together with its value on the refined grid."""

    value: float
    refined: float
    relative_change: float
    converged: bool

    def __float__(self):
        return float(self.value)


def refinement_report(compute: Callable[[Grid], float], grid: Grid, tol: float = REFINEMENT_TOL,
                      what: str = "norm") -> RefinementReport:
    """Evaluate ``compute`` on ``grid`` and on ``grid.refined()``; warn if they differ."""
    coarse = float(compute(grid))
    fine = float(compute(grid.refined()))
    scale = max(abs(fine), abs(coarse))
    change = abs(fine - coarse) / scale if scale > 0 else 0.0
    converged = change <= tol
    if not converged:
        warnings.warn(
            f"{what} changed by {change:.2e} (relative) under grid refinement",
            ConvergenceWarning,
            stacklevel=2,
        )
    return RefinementReport(coarse, fine, change, converged)
