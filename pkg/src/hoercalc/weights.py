"""Admissible weights on the real line and their diagnostics.

A weight ``v`` is admissible when ``v >= 1`` and
``M_v = sup v(s+t) / (v(s) + v(t))`` is finite; it is strongly admissible
when in addition ``1/v`` is square integrable.  Every diagnostic here is a
sampled estimate: ``m_v_estimate`` is a lower bound for ``M_v`` and the
strong-admissibility decision combines a finite quadrature with a tail
bound extrapolated from the fitted growth exponent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import InputError, InvalidWeightError
from .sampling import SampledFunction, kink_corrected_sum

SLACK = 1e-6
DOUBLING_THRESHOLD = 1.05
TAIL_MARGIN = 0.05


@dataclass(frozen=True)
class AdmissibilityReport:
    m_v_estimate: float
    doubling_sup: float
    doubling_trend: str
    strongly_admissible: bool
    inverse_square_integral: float
    growth_exponent: float
    scan_range: float
    samples: int

    @property
    def admissible(self) -> bool:
        return self.doubling_trend == "bounded" and math.isfinite(self.m_v_estimate)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True, eq=False)
class Weight:
    """An immutable weight function with cached diagnostics.

    ``func`` maps a float array to a float array; ``family`` is one of
    ``poly``, ``polylog``, ``const``, ``table``, ``custom``.
    """

    func: Callable[[np.ndarray], np.ndarray]
    family: str = "custom"
    params: tuple = ()
    spec: str | None = None
    label: str = ""
    meta: dict = field(default_factory=dict, repr=False)
    _reports: dict = field(default_factory=dict, repr=False)

    def __call__(self, s) -> np.ndarray:
        arr = np.asarray(s, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            out = np.asarray(self.func(arr), dtype=float)
        return np.broadcast_to(out, arr.shape).copy() if out.shape != arr.shape else out

    def checked(self, s) -> np.ndarray:
        """Evaluate and enforce finiteness and ``v >= 1``."""
        vals = self(s)
        if not np.all(np.isfinite(vals)):
            raise InputError(f"weight {self.describe()} is not finite on the sample set")
        if np.any(vals < 1.0 - 1e-12):
            bad = float(np.asarray(s, dtype=float).reshape(-1)[np.argmin(vals.reshape(-1))])
            raise InvalidWeightError(f"weight {self.describe()} drops below 1 at s = {bad:g}")
        return vals

    def describe(self) -> str:
        return self.spec or self.label or self.family

    def power(self, alpha: float) -> "Weight":
        base = self.func
        return Weight(lambda s: base(s) ** alpha, "custom", (alpha,), label=f"({self.describe()})^{alpha:g}")

    def report(self, scan_range: float = 1e3, samples: int = 2000) -> AdmissibilityReport:
        """Cached :func:`admissibility_report`."""
        key = (float(scan_range), int(samples))
        if key not in self._reports:
            self._reports[key] = admissibility_report(self, scan_range, samples)
        return self._reports[key]

    # families ---------------------------------------------------------
    @classmethod
    def poly(cls, alpha: float) -> "Weight":
        if alpha < 0:
            raise InputError("polynomial weights need alpha >= 0")
        return cls(lambda s: (1.0 + np.abs(s)) ** alpha, "poly", (alpha,), spec=f"poly:{alpha:g}")

    @classmethod
    def polylog(cls, alpha: float, beta: float) -> "Weight":
        if alpha < 0 or beta < 0:
            raise InputError("polylog weights need alpha, beta >= 0")
        return cls(
            lambda s: (1.0 + np.abs(s)) ** alpha * np.log(math.e + np.abs(s)) ** beta,
            "polylog",
            (alpha, beta),
            spec=f"polylog:{alpha:g}:{beta:g}",
        )

    @classmethod
    def constant(cls) -> "Weight":
        return cls(lambda s: np.ones_like(s, dtype=float), "const", (), spec="const")

    @classmethod
    def table(cls, nodes, values, spec: str | None = None) -> "Weight":
        """Piecewise linear interpolation of tabulated values, constant beyond the ends."""
        nodes = np.asarray(nodes, dtype=float)
        values = np.asarray(values, dtype=float)
        order = np.argsort(nodes)
        nodes, values = nodes[order], values[order]
        if nodes.size < 2 or not np.all(np.diff(nodes) > 0):
            raise InputError("table weights need at least two distinct nodes")
        if np.any(values < 1.0):
            raise InvalidWeightError("tabulated weight values must be >= 1")
        return cls(lambda s: np.interp(s, nodes, values), "table", (), spec=spec)

    @classmethod
    def custom(cls, func: Callable, label: str = "custom") -> "Weight":
        return cls(func, "custom", (), label=label)

    @classmethod
    def from_spec(cls, spec: str) -> "Weight":
        """Parse ``poly:a``, ``polylog:a:b``, ``const`` or ``table:<path.csv>``."""
        head, _, rest = spec.partition(":")
        try:
            if head == "poly":
                out = cls.poly(float(rest))
            elif head == "polylog":
                a, b = rest.split(":")
                out = cls.polylog(float(a), float(b))
            elif head == "const" and not rest:
                out = cls.constant()
            elif head == "table":
                data = np.atleast_2d(np.genfromtxt(rest, delimiter=",", comments="#"))
                if not np.isfinite(data[0]).all():
                    data = data[1:]
                out = cls.table(data[:, 0], data[:, 1], spec=spec)
            else:
                raise ValueError
        except (ValueError, IndexError, OSError) as exc:
            raise InputError(f"cannot parse weight specification {spec!r}") from exc
        return out


def _scan_lattice(scan_range: float, samples: int) -> np.ndarray:
    half = samples // 2
    logs = np.geomspace(1e-3, scan_range, half)
    lin = np.linspace(0.0, scan_range, half)
    pos = np.unique(np.concatenate([logs, lin]))
    return np.concatenate([-pos[::-1], pos[pos > 0]])


def admissibility_report(v: Weight, scan_range: float = 1e3, samples: int = 2000) -> AdmissibilityReport:
    """Sampled diagnostics of a weight on ``[-scan_range, scan_range]``."""
    if scan_range <= 0 or not math.isfinite(scan_range):
        raise InputError("scan range must be positive and finite")
    if samples < 1000:
        raise InputError("at least 1000 samples are required")
    lattice = _scan_lattice(scan_range, samples)
    vals = v.checked(lattice)

    # subadditivity constant over all lattice pairs (s + t lies in [-2R, 2R])
    m_est = 0.0
    for chunk in np.array_split(np.arange(lattice.size), max(1, lattice.size // 256)):
        sums = lattice[chunk, None] + lattice[None, :]
        ratio = v.checked(sums) / (vals[chunk, None] + vals[None, :])
        m_est = max(m_est, float(ratio.max()))

    # doubling ratios
    doubled = v.checked(2.0 * lattice) / vals
    doubling_sup = float(doubled.max())
    mags = np.abs(lattice)
    outer = doubled[(mags >= scan_range / 2) & (mags <= scan_range)].max()
    inner = doubled[(mags >= scan_range / 4) & (mags <= scan_range / 2)].max()
    trend = "diverging" if outer / inner > DOUBLING_THRESHOLD else "bounded"

    # growth exponent on the outer window
    window = np.linspace(scan_range / 2, scan_range, 256)
    window = np.concatenate([-window, window])
    x = np.log1p(np.abs(window))
    y = np.log(v.checked(window))
    slope = float(np.polyfit(x, y, 1)[0])

    # strong admissibility: int 1/v^2 on [-R, R] plus a power-law tail bound
    inner_integral = sum(
        integrate.quad(lambda s: float(v(np.array([s]))[0]) ** -2, a, b, limit=400)[0]
        for a, b in [(-scan_range, -1.0), (-1.0, 0.0), (0.0, 1.0), (1.0, scan_range)]
    )
    if slope > 0.5 + TAIL_MARGIN:
        edge = float(min(v(np.array([scan_range]))[0], v(np.array([-scan_range]))[0]))
        tail = 2.0 * scan_range / ((2.0 * slope - 1.0) * edge**2)
        total = inner_integral + tail
        strong = True
    else:
        total = math.inf
        strong = False
    return AdmissibilityReport(
        m_v_estimate=m_est,
        doubling_sup=doubling_sup,
        doubling_trend=trend,
        strongly_admissible=strong,
        inverse_square_integral=total,
        growth_exponent=slope,
        scan_range=float(scan_range),
        samples=int(samples),
    )


def _bump(r: np.ndarray, width: float) -> np.ndarray:
    u = np.clip(np.abs(r) / width, 0.0, 1.0)
    out = np.zeros_like(u)
    inside = u < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    return out


def smooth_equivalent(v: Weight, mollifier_width: float, nodes: int = 64,
                      scan_range: float = 1e3) -> Weight:
    """Mollify ``v`` with an even normalized bump of half-width ``mollifier_width``.

    The convolution is computed by Gauss-Legendre quadrature on symmetric
    nodes with weights renormalized to total mass one, so constants are
    reproduced exactly and even weights stay even to rounding.  The
    attached ``meta['equivalence_ratio']`` is ``sup(w/v) * sup(v/w)`` on a
    scan lattice.
    """
    if not (mollifier_width > 0 and math.isfinite(mollifier_width)):
        raise InputError("mollifier width must be positive")
    x, w = np.polynomial.legendre.leggauss(nodes)
    r = mollifier_width * x
    k = w * _bump(r, mollifier_width)
    k = k / k.sum()
    k = 0.5 * (k + k[::-1])
    base = v.func

    def smoothed(s):
        s = np.asarray(s, dtype=float)
        return np.tensordot(base(s[..., None] - r), k, axes=([-1], [0]))

    out = Weight(smoothed, "custom", (mollifier_width,), label=f"smooth({v.describe()}, {mollifier_width:g})")
    lattice = _scan_lattice(scan_range, 2000)
    ratio = out(lattice) / v.checked(lattice)
    out.meta["equivalence_ratio"] = float(ratio.max() * (1.0 / ratio).max())
    out.meta["kernel_sup"] = float(v.checked(r).max())
    return out


def weighted_norm(f: SampledFunction, v: Weight, omega: float = 0.0, p: float = 2.0) -> float:
    """``|| v(s) exp(omega |s|) f(s) ||_{L^p}`` by the trapezoidal rule."""
    if not (p >= 1):
        raise InputError(f"p must lie in [1, inf], got {p}")
    if omega < 0:
        raise InputError("omega must be nonnegative")
    s = f.nodes
    factor = v.checked(s) * np.exp(omega * np.abs(s))
    weighted = f.multiply(factor)
    if math.isinf(p):
        return weighted.max_abs()
    powered = weighted.map(lambda z: np.abs(z) ** p).values.real
    if any(idx == f.grid.zero_index for idx, *_ in f.jumps):
        total = float(f.grid.spacing * np.sum(powered))
    else:
        total = float(kink_corrected_sum(powered, f.grid))
    return max(total, 0.0) ** (1.0 / p)


def inverse_norm(v: Weight, grid, omega: float = 0.0, p: float = 2.0) -> float:
    """``|| 1/(v exp(omega|s|)) ||_{L^p}`` on the same quadrature as :func:`weighted_norm`."""
    s = grid.nodes()
    vals = 1.0 / (v.checked(s) * np.exp(omega * np.abs(s)))
    if math.isinf(p):
        return float(vals.max())
    return float(kink_corrected_sum(vals**p, grid) ** (1.0 / p))
