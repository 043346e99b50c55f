"""Holomorphic functions on strips with the metadata the numerics need.

Each :class:`HolomorphicFunction` carries its analyticity half-width
``theta`` (``inf`` for entire functions of controlled growth) and, when it
is known in closed form, its inverse Fourier transform on the real line.
Coefficients with jumps list them as ``(s0, left_limit, right_limit)``;
a kink is listed the same way with equal limits, which is enough to switch
on the Richardson step that removes its ``O(h^2)`` quadrature error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InputError


@dataclass(frozen=True, eq=False)
class HolomorphicFunction:
    func: Callable[[np.ndarray], np.ndarray]
    theta: float = math.inf
    label: str = ""
    coefficient: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    jumps: tuple = ()

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            return np.asarray(self.func(z), dtype=complex)

    def __mul__(self, other: "HolomorphicFunction") -> "HolomorphicFunction":
        if not isinstance(other, HolomorphicFunction):
            return NotImplemented
        f, g = self.func, other.func
        return HolomorphicFunction(
            lambda z: f(z) * g(z), min(self.theta, other.theta), f"{self.label}*{other.label}"
        )

    def scaled(self, c: complex) -> "HolomorphicFunction":
        f = self.func
        coef = self.coefficient
        return HolomorphicFunction(
            lambda z: c * f(z),
            self.theta,
            f"{c}*{self.label}",
            None if coef is None else (lambda s: c * coef(s)),
            tuple((s0, c * lo, c * hi) for s0, lo, hi in self.jumps),
        )

    def translated(self, t: complex) -> "HolomorphicFunction":
        """``z -> f(z - t)``."""
        f = self.func
        return HolomorphicFunction(lambda z: f(z - t), self.theta - abs(np.imag(t)), f"{self.label}(.-{t})")

    def star(self) -> "HolomorphicFunction":
        """``z -> conj(f(conj z))``."""
        f = self.func
        return HolomorphicFunction(lambda z: np.conj(f(np.conj(z))), self.theta, f"{self.label}*")


def gaussian(scale: float = 1.0) -> HolomorphicFunction:
    """``exp(-z^2 / scale)``; coefficient ``sqrt(scale/(4 pi)) exp(-scale s^2 / 4)``."""
    if scale <= 0:
        raise InputError("scale must be positive")
    return HolomorphicFunction(
        lambda z: np.exp(-(z**2) / scale),
        math.inf,
        "gauss" if scale == 1 else f"gauss/{scale:g}",
        lambda s: math.sqrt(scale / (4 * math.pi)) * np.exp(-scale * s**2 / 4),
    )


def resolvent(lam: complex) -> HolomorphicFunction:
    """``z -> 1/(lam - z)`` for non-real ``lam``.

    For ``Im lam > 0`` the coefficient is ``-i exp(i lam s)`` on ``s > 0``,
    for ``Im lam < 0`` it is ``i exp(i lam s)`` on ``s < 0``.
    """
    lam = complex(lam)
    b = lam.imag
    if b == 0:
        raise InputError("resolvent point must be off the real axis")
    if b > 0:
        def coef(s):
            s = np.asarray(s, dtype=float)
            out = np.where(s > 0, -1j * np.exp(1j * lam * np.maximum(s, 0)), 0)
            return np.where(s == 0, -0.5j, out)
        jumps = ((0.0, 0.0, -1j),)
    else:
        def coef(s):
            s = np.asarray(s, dtype=float)
            out = np.where(s < 0, 1j * np.exp(1j * lam * np.minimum(s, 0)), 0)
            return np.where(s == 0, 0.5j, out)
        jumps = ((0.0, 1j, 0.0),)
    return HolomorphicFunction(lambda z: 1.0 / (lam - z), abs(b), f"r({lam:g})", coef, jumps)


def modulation(s0: float) -> HolomorphicFunction:
    """``exp(-i s0 z)``; bounded on every strip, not square integrable."""
    return HolomorphicFunction(lambda z: np.exp(-1j * s0 * z), math.inf, f"mod({s0:g})")


def constant(c: complex = 1.0) -> HolomorphicFunction:
    return HolomorphicFunction(lambda z: np.full(np.shape(z), c, dtype=complex), math.inf, f"const({c})")


def tanh() -> HolomorphicFunction:
    return HolomorphicFunction(np.tanh, math.pi / 2, "tanh")


def sech_power(k: int = 2) -> HolomorphicFunction:
    return HolomorphicFunction(lambda z: 1.0 / np.cosh(z) ** k, math.pi / 2, f"sech^{k}")


def gaussian_tanh() -> HolomorphicFunction:
    return HolomorphicFunction(lambda z: np.exp(-(z**2)) * np.tanh(z), math.pi / 2, "gauss*tanh")


def logistic_density(alpha: float = 1.0) -> HolomorphicFunction:
    """``alpha e^{alpha z} / (1 + e^{alpha z})^2``, unit mass, holomorphic for ``|Im z| < pi/alpha``.

    Coefficient: ``s / (2 alpha sinh(pi s / alpha))`` (value ``1/(2 pi)`` at 0).
    """
    def func(z):
        u = alpha * z / 2
        return alpha / (4 * np.cosh(u) ** 2)

    def coef(s):
        s = np.asarray(s, dtype=float)
        x = math.pi * s / alpha
        safe = np.where(x == 0, 1.0, x)
        with np.errstate(over="ignore"):
            out = np.where(x == 0, 1.0, safe / np.sinh(safe))
        return out / (2 * math.pi)

    return HolomorphicFunction(func, math.pi / alpha, f"eta({alpha:g})", coef)


def reference_family() -> list[HolomorphicFunction]:
    """Twenty bounded holomorphic functions on ``St_1`` used for norm comparisons."""
    fam = [resolvent(lam) for lam in (2j, 3j, 1.5j, 1 + 2j, -2 + 2.5j, -2j, 0.5 - 3j, 4j)]
    fam += [modulation(s0) for s0 in (0.5, 1.0, -2.0, 3.0)]
    fam += [
        tanh(),
        sech_power(1),
        sech_power(2),
        gaussian(),
        gaussian_tanh(),
        gaussian(4.0),
        HolomorphicFunction(lambda z: 1.0 / (4.0 + z**2), 2.0, "1/(4+z^2)", lambda s: np.exp(-2.0 * np.abs(s)) / 4,
                           ((0.0, 0.25, 0.25),)),
        HolomorphicFunction(lambda z: np.exp(-1j * z) * np.tanh(z), math.pi / 2, "mod*tanh"),
    ]
    return fam


@dataclass(frozen=True, eq=False)
class SectorFunction:
    """A holomorphic function on the sector ``|arg w| < angle``.

    ``pullback`` is ``z -> f(e^z)`` on the strip ``|Im z| < angle``; when it
    is omitted it is computed by composing with ``exp``.
    """

    func: Callable[[np.ndarray], np.ndarray]
    angle: float = math.pi
    label: str = ""
    pullback_func: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)

    def __call__(self, w):
        w = np.asarray(w, dtype=complex)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            return np.asarray(self.func(w), dtype=complex)

    def pullback(self) -> HolomorphicFunction:
        if self.pullback_func is not None:
            return HolomorphicFunction(self.pullback_func, self.angle, f"{self.label}(e^z)")
        f = self.func
        return HolomorphicFunction(lambda z: f(np.exp(z)), self.angle, f"{self.label}(e^z)")


def sector_power(s0: float) -> SectorFunction:
    """``w -> w^{-i s0}`` (principal branch); pullback ``exp(-i s0 z)``."""
    return SectorFunction(lambda w: np.exp(-1j * s0 * np.log(w)), math.pi, f"w^(-i{s0:g})",
                          lambda z: np.exp(-1j * s0 * z))


def sector_constant(c: complex = 1.0) -> SectorFunction:
    return SectorFunction(lambda w: np.full(np.shape(w), c, dtype=complex), math.pi, f"const({c})",
                          lambda z: np.full(np.shape(z), c, dtype=complex))


def sector_bump() -> SectorFunction:
    """``w / (1 + w)^2``; pullback is the unit-mass logistic density."""
    eta = logistic_density(1.0)
    return SectorFunction(lambda w: w / (1.0 + w) ** 2, math.pi, "w/(1+w)^2", eta.func)


def sector_resolvent(mu: complex = -1.0) -> SectorFunction:
    """``w -> 1/(w - mu)`` for ``mu`` outside the closed sector (default ``(1+w)^{-1}``)."""
    angle = abs(float(np.angle(mu)))
    return SectorFunction(lambda w: 1.0 / (w - mu), angle, f"1/(w-({mu:g}))",
                          lambda z: 1.0 / (np.exp(z) - mu))


def _complex_arg(text: str) -> complex:
    return complex(text.replace(" ", "").replace("i", "j"))


def function_from_spec(spec: str) -> HolomorphicFunction:
    """Parse ``gauss``, ``gauss:4``, ``resolvent:2i``, ``mod:1.5``, ``tanh``, ``sech:2``,
    ``gauss-tanh``, ``eta:1`` or ``const:1``."""
    head, _, rest = spec.strip().partition(":")
    try:
        if head == "gauss":
            return gaussian(float(rest) if rest else 1.0)
        if head == "resolvent":
            return resolvent(_complex_arg(rest))
        if head == "mod":
            return modulation(float(rest))
        if head == "tanh" and not rest:
            return tanh()
        if head == "sech":
            return sech_power(int(rest) if rest else 1)
        if head == "gauss-tanh" and not rest:
            return gaussian_tanh()
        if head == "eta":
            return logistic_density(float(rest) if rest else 1.0)
        if head == "const":
            return constant(_complex_arg(rest) if rest else 1.0)
    except ValueError as exc:
        raise InputError(f"cannot parse function specification {spec!r}") from exc
    raise InputError(f"unknown function specification {spec!r}")


def sector_function_from_spec(spec: str) -> SectorFunction:
    """Parse ``power:s0``, ``const``, ``bump`` or ``resolvent:mu``."""
    head, _, rest = spec.strip().partition(":")
    try:
        if head == "power":
            return sector_power(float(rest))
        if head == "const":
            return sector_constant(_complex_arg(rest) if rest else 1.0)
        if head == "bump" and not rest:
            return sector_bump()
        if head == "resolvent":
            return sector_resolvent(_complex_arg(rest) if rest else -1.0)
    except ValueError as exc:
        raise InputError(f"cannot parse sector function specification {spec!r}") from exc
    raise InputError(f"unknown sector function specification {spec!r}")
