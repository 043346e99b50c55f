"""Desk-scale applications: symmetric contraction semigroups, imaginary-power growth and multipliers.

Generators are finite models ``A = I - P`` with ``P`` a reversible
substochastic kernel, and a Hermite truncation of the Ornstein-Uhlenbeck
operator ``L = -d^2/dx^2 + x d/dx`` on ``L^2`` of the standard Gaussian.
All ``p``-norms are measured (lower estimates), never proved.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate, linalg

from .calculus import sector_calculus
from .errors import DegenerateInputError, DomainError, InputError, InvalidWeightError
from .functions import SectorFunction
from .operators import DiagonalizableOperator, injective_part, matrix_p_norm
from .sector_spaces import SectorFunctionRep, sector_hoermander_norm
from .weights import Weight

TREND_THRESHOLD = 1.05
CONTRACTION_TIMES = (0.1, 1.0, 10.0)


def omega_p(p: float) -> float:
    """``arcsin |1 - 2/p|`` for ``1 < p < inf``."""
    if not 1 < p < math.inf:
        raise DomainError("omega_p needs 1 < p < inf")
    return math.asin(abs(1.0 - 2.0 / p))


@dataclass(frozen=True, eq=False)
class ContractionModel:
    """Generator ``A = I - P`` of a symmetric contraction semigroup on ``L^p(mu)``.

    ``kernel`` is entrywise nonnegative with row sums at most one and
    ``mu_i P_ij = mu_j P_ji``; together these make ``exp(-tA)`` contractive
    on ``L^1(mu)`` and ``L^inf`` and self-adjoint on ``L^2(mu)``.
    """

    kernel: np.ndarray
    measure: np.ndarray
    label: str = ""
    operator: DiagonalizableOperator = field(init=False, repr=False)

    def __post_init__(self):
        P = np.array(self.kernel, dtype=float)
        n = P.shape[0]
        mu = np.ones(n) if self.measure is None else np.array(self.measure, dtype=float)
        if P.ndim != 2 or P.shape != (n, n) or mu.shape != (n,):
            raise InputError("kernel must be square and match the measure")
        if np.any(P < 0) or np.any(P.sum(axis=1) > 1 + 1e-12) or np.any(mu <= 0):
            raise InputError("kernel must be nonnegative and substochastic; measure positive")
        flux = mu[:, None] * P
        if not np.allclose(flux, flux.T, atol=1e-12):
            raise InputError("kernel is not symmetric with respect to the measure")
        root = np.sqrt(mu)
        sym = (root[:, None] * P) / root[None, :]
        vals, vecs = linalg.eigh(0.5 * (sym + sym.T))
        eig = np.clip(1.0 - vals, 0.0, None)  # spectrum of A lies in [0, 2]
        basis = vecs / root[:, None]
        basis_inv = vecs.T * root[None, :]
        op = DiagonalizableOperator(eig.astype(complex), basis, basis_inv, 2.0, "sectorial", 0.0)
        for name, arr in (("kernel", P), ("measure", mu)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "operator", op)

    @property
    def dim(self) -> int:
        return self.kernel.shape[0]

    def semigroup(self, t: float) -> np.ndarray:
        return self.operator.apply(lambda z: np.exp(-t * z))

    def contraction_defect(self, times=CONTRACTION_TIMES) -> float:
        """``max_t max(||T_t||_{1,mu}, ||T_t||_inf) - 1`` (exact norms)."""
        worst = 0.0
        for t in times:
            T = self.semigroup(t)
            worst = max(worst, matrix_p_norm(T, 1.0, weights=self.measure).value,
                        matrix_p_norm(T, math.inf).value)
        return worst - 1.0

    def to_dict(self) -> dict:
        return {"label": self.label, "kernel": self.kernel.tolist(), "measure": self.measure.tolist()}

    # families ---------------------------------------------------------
    @classmethod
    def cycle_walk(cls, n: int, laziness: float = 0.5) -> "ContractionModel":
        """Lazy random walk on the cycle of length ``n``."""
        if n < 3:
            raise InputError("cycle needs n >= 3")
        shift = np.roll(np.eye(n), 1, axis=1)
        P = laziness * np.eye(n) + (1 - laziness) * 0.5 * (shift + shift.T)
        return cls(P, np.ones(n), f"cycle{n}")

    @classmethod
    def swap(cls) -> "ContractionModel":
        return cls(np.array([[0.0, 1.0], [1.0, 0.0]]), np.ones(2), "swap")

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, killing: float = 0.0) -> "ContractionModel":
        """Random reversible kernel for a random measure; ``killing`` removes mass."""
        K = rng.uniform(0, 1, (n, n)) * (rng.uniform(0, 1, (n, n)) < 0.6)
        K = K + K.T
        mu = rng.uniform(0.5, 2.0, n)
        rows = K.sum(axis=1)
        scale = np.min(np.where(rows > 0, mu / np.where(rows > 0, rows, 1.0), np.inf))
        scale = 1.0 if not math.isfinite(scale) else scale
        K = K * scale * (1.0 - killing)
        return cls(K / mu[:, None], mu, f"random{n}")


@dataclass(frozen=True, eq=False)
class OUModel:
    """Hermite truncation of the Ornstein-Uhlenbeck operator on ``L^2(gamma_1)``.

    ``basis`` holds the orthonormal probabilists' Hermite functions
    ``He_n / sqrt(n!)`` at the Gauss-Hermite nodes; ``weights`` are the
    quadrature weights of the standard Gaussian.
    """

    truncation: int
    nodes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)
    basis: np.ndarray = field(init=False, repr=False)
    derivative: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        N = int(self.truncation)
        if not 1 <= N <= 64:
            raise InputError("truncation must lie in [1, 64]")
        x, w = np.polynomial.hermite_e.hermegauss(4 * N)
        w = w / math.sqrt(2 * math.pi)
        H = np.zeros((x.size, N + 1))
        H[:, 0] = 1.0
        if N >= 1:
            H[:, 1] = x
        for k in range(1, N):
            # normalized three-term recurrence
            H[:, k + 1] = (x * H[:, k] - math.sqrt(k) * H[:, k - 1]) / math.sqrt(k + 1)
        dH = np.zeros_like(H)
        dH[:, 1:] = np.sqrt(np.arange(1, N + 1))[None, :] * H[:, :-1]
        object.__setattr__(self, "truncation", N)
        for name, arr in (("nodes", x), ("weights", w), ("basis", H), ("derivative", dH)):
            object.__setattr__(self, name, arr)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.arange(self.truncation + 1, dtype=float)

    def gram(self) -> np.ndarray:
        return self.basis.T @ (self.weights[:, None] * self.basis)

    def generator_matrix(self) -> np.ndarray:
        """``<L h_m, h_n>`` computed by quadrature as ``<h_m', h_n'>`` (Dirichlet form)."""
        dH = self.derivative
        return dH.T @ (self.weights[:, None] * dH)

    def operator(self) -> DiagonalizableOperator:
        """``L`` in Hermite coordinates (diagonal)."""
        n = self.truncation + 1
        return DiagonalizableOperator(self.eigenvalues.astype(complex), np.eye(n), np.eye(n), 2.0, "sectorial", 0.0)

    def grid_matrix(self, fn) -> np.ndarray:
        """``fn(L)`` acting on functions sampled at the quadrature nodes."""
        vals = np.asarray(fn(self.eigenvalues), dtype=complex)
        return (self.basis * vals) @ (self.basis.T * self.weights[None, :])

    def imaginary_power_norm(self, s: float, p: float = 2.0) -> float:
        """``||L^{-is}||`` on the range of ``L`` in ``L^p`` of the quadrature measure."""
        vals = np.concatenate([[0.0], np.exp(-1j * s * np.log(self.eigenvalues[1:]))])
        M = (self.basis * vals) @ (self.basis.T * self.weights[None, :])
        return matrix_p_norm(M, p, subspace=self.basis[:, 1:], weights=self.weights).value


@dataclass(frozen=True)
class GrowthCheck:
    s: np.ndarray = field(repr=False)
    measured: np.ndarray = field(repr=False)
    bound: np.ndarray = field(repr=False)
    fitted_c: float
    trend: float
    passes: bool
    degenerate: bool = False
    model: str = ""
    p: float = 2.0

    @property
    def ratio(self) -> np.ndarray:
        return self.measured / self.bound

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["s", "measured", "bound", "ratio"])
            for row in zip(self.s, self.measured, self.bound, self.ratio):
                out.writerow([repr(float(v)) for v in row])

    def summary(self) -> dict:
        return {"model": self.model, "p": self.p, "fitted_c": self.fitted_c, "passes": self.passes,
                "trend": self.trend, "degenerate": self.degenerate}

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.summary(), indent=2))


def _dyadic_trend(s: np.ndarray, ratio: np.ndarray) -> float:
    """Max ratio on the outermost dyadic shell of ``|s|`` over the max on all inner shells."""
    a = np.abs(s)
    top = a.max()
    if top <= 1:
        return 1.0
    outer = a > top / 2
    inner_max = ratio[~outer].max(initial=0.0)
    return float(ratio[outer].max() / inner_max) if inner_max > 0 else math.inf


def cd_growth_check(model: ContractionModel, p: float, s_grid=None, starts: int = 8,
                    iterations: int = 30) -> GrowthCheck:
    """Measure ``||A^{-is}||_{p -> p}`` on ``ran(A)`` against ``(1+|s|)^{1/2} e^{omega_p |s|}``.

    Passes when the fitted constant is finite and the ratio shows no growth
    on the outermost dyadic shell of the ``s`` grid.
    """
    s_grid = np.linspace(-20, 20, 81) if s_grid is None else np.asarray(s_grid, dtype=float)
    part = injective_part(model.operator)
    if part.empty:
        nan = np.full(s_grid.shape, math.nan)
        return GrowthCheck(s_grid, nan, nan, math.nan, math.nan, False, True, model.label, p)
    angle = omega_p(p) if p not in (1.0, math.inf) else math.pi / 2
    logs = np.log(part.operator.eig)
    measured = np.empty(s_grid.size)
    for k, s in enumerate(s_grid):
        M = part.lift(np.exp(-1j * s * logs))
        measured[k] = matrix_p_norm(M, p, subspace=part.embedding, weights=model.measure, starts=starts,
                                    iterations=iterations, seed=k, polish=False).value
    bound = np.sqrt(1 + np.abs(s_grid)) * np.exp(angle * np.abs(s_grid))
    ratio = measured / bound
    fitted = float(ratio.max())
    trend = _dyadic_trend(s_grid, ratio)
    passes = math.isfinite(fitted) and trend <= TREND_THRESHOLD
    return GrowthCheck(s_grid, measured, bound, fitted, trend, bool(passes), False, model.label, p)


def check_multiplier_weight(v: Weight, scan_range: float = 1e3) -> float:
    """``||(1+|s|)^{1/2}/v||_2^2``; raises unless it is certified finite."""
    report = v.report(scan_range)
    if not report.strongly_admissible or report.growth_exponent <= 1.05:
        raise InvalidWeightError(f"(1+|s|)^(1/2)/v is not certified square integrable for {v.describe()}")
    head, _ = integrate.quad(lambda s: (1 + s) / float(v(np.array(s))) ** 2, 0, scan_range, limit=400)
    alpha = report.growth_exponent
    tail = (1 + scan_range) * scan_range / ((2 * alpha - 2) * float(v(np.array(scan_range))) ** 2)
    return 2 * (head + tail)


@dataclass(frozen=True)
class MultiplierReport:
    label: str
    p: float
    measured: float
    hoermander: float
    ratio: float
    calculus_deviation: float

    def to_dict(self) -> dict:
        return asdict(self)


def multiplier_experiment(model, m: SectorFunction | SectorFunctionRep, p: float, v: Weight,
                          method: str = "meda") -> MultiplierReport:
    """``||m(A_p)||_{p -> p}`` over ``||m||_{Hör_v(S_{omega_p})}``.

    ``m(A)`` comes from the composition rule on the injective part and acts
    as zero on the kernel.
    """
    check_multiplier_weight(v)
    angle = omega_p(p)
    fn = m.source if isinstance(m, SectorFunctionRep) else m
    if fn is None:
        raise InputError("multiplier needs an analytic sector function")
    op = model.operator if isinstance(model, ContractionModel) else model
    measure = model.measure if isinstance(model, ContractionModel) else None
    part = injective_part(op)
    if part.empty:
        raise DegenerateInputError("the generator vanishes; no injective part")
    result = sector_calculus(part, fn, method)
    measured = matrix_p_norm(result.matrix, p, weights=measure, starts=16, iterations=40).value
    rep = SectorFunctionRep.from_function(fn, angle, v)
    hor = sector_hoermander_norm(rep, refine=False).value
    ratio = measured / hor if hor > 0 else math.inf
    return MultiplierReport(fn.label, p, measured, hor, ratio, result.relative_deviation)


def write_reports(reports, path) -> None:
    """CSV of multiplier reports, one row each."""
    rows = [r.to_dict() for r in reports]
    if not rows:
        raise InputError("no reports")
    with open(path, "w", newline="") as fh:
        out = csv.DictWriter(fh, fieldnames=list(rows[0]))
        out.writeheader()
        for row in rows:
            out.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})

