"""Second-order intertwining operators A+ = d^2/dx^2 + beta d/dx + gamma.

Given beta and the integration constants (c, delta), the base potential V,
the partner potential Vt and the coefficient gamma follow in closed form.
The residual checks below verify numerically, on uniform grids, that

* the three constraint relations between V, Vt, beta, gamma hold,
* Ht A+ = A+ H (intertwining), and
* A A+ = (H + delta/2)^2 - c (factorization; the block form of this
  identity on diag(Ht, H) is the statement for the 2x2 SUSY Hamiltonian).

All functions are pure.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Protocol, runtime_checkable

import numpy as np
from numpy.polynomial import hermite

DEFAULT_BETA_FLOOR = 1e-8
# |psi| at the grid ends, relative to max |psi|
BOUNDARY_FLOOR = 1e-5


class DomainError(ArithmeticError):
    """beta too close to zero for the closed forms, or x outside the beta domain."""


class UnreliableResidualWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class ShiftConstants:
    c: float
    delta: float

    @classmethod
    def oscillator(cls) -> "ShiftConstants":
        # A+ = (a+)^2 must solve the constraints for V = x^2
        return cls(c=1.0, delta=4.0)


@runtime_checkable
class BetaProvider(Protocol):
    kind: str  # "closed-form" or "spline"
    domain: tuple[float, float]

    def beta(self, x): ...

    def dbeta(self, x): ...

    def d2beta(self, x): ...


@dataclass(frozen=True)
class ClosedFormBeta:
    """beta and its first two derivatives given as vectorised callables."""

    f: Callable
    df: Callable
    d2f: Callable
    label: str = "closed-form"
    domain: tuple[float, float] = (-math.inf, math.inf)
    kind: str = "closed-form"

    def beta(self, x):
        return self.f(x)

    def dbeta(self, x):
        return self.df(x)

    def d2beta(self, x):
        return self.d2f(x)


def _coefficients(beta: BetaProvider, x, floor: float):
    x = np.asarray(x, dtype=float)
    lo, hi = beta.domain
    if np.any(x < lo) or np.any(x > hi):
        raise DomainError(f"x outside beta domain [{lo}, {hi}]")
    b = np.asarray(beta.beta(x), dtype=float)
    if np.any(np.abs(b) < floor):
        raise DomainError(f"|beta| below floor {floor:g}")
    return b, np.asarray(beta.dbeta(x), dtype=float), np.asarray(beta.d2beta(x), dtype=float)


def _common(b, b1, b2, k: ShiftConstants):
    # beta''/(2 beta) - (beta'/2 beta)^2 + c/beta^2, with the two 1/beta^2
    # terms merged so that c = beta'^2/4 cancels exactly
    return b2 / (2.0 * b) + (k.c - 0.25 * b1 * b1) / (b * b)


def _out(x, value):
    return float(value) if np.ndim(x) == 0 else value


def potential_from_beta(beta: BetaProvider, k: ShiftConstants, x, floor: float = DEFAULT_BETA_FLOOR):
    """Base potential V(x) implied by beta and (c, delta)."""
    b, b1, b2 = _coefficients(beta, x, floor)
    return _out(x, _common(b, b1, b2, k) - b1 + 0.25 * b * b - 0.5 * k.delta)


def partner_potential_from_beta(beta: BetaProvider, k: ShiftConstants, x, floor: float = DEFAULT_BETA_FLOOR):
    """Partner potential Vt(x); equals V(x) + 2 beta'(x)."""
    b, b1, b2 = _coefficients(beta, x, floor)
    return _out(x, _common(b, b1, b2, k) + b1 + 0.25 * b * b - 0.5 * k.delta)


def gamma_from_beta(beta: BetaProvider, k: ShiftConstants, x, floor: float = DEFAULT_BETA_FLOOR):
    """Zeroth-order coefficient gamma(x) of A+."""
    b, b1, b2 = _coefficients(beta, x, floor)
    return _out(x, -_common(b, b1, b2, k) + 0.5 * b1 + 0.25 * b * b)


@dataclass(frozen=True)
class PotentialTriple:
    grid: np.ndarray
    V: np.ndarray
    Vtilde: np.ndarray
    gamma: np.ndarray
    constants: ShiftConstants

    def __post_init__(self):
        n = len(self.grid)
        if any(len(a) != n for a in (self.V, self.Vtilde, self.gamma)):
            raise ValueError("V, Vtilde, gamma must share the grid length")
        if n > 1 and not np.all(np.diff(self.grid) > 0):
            raise ValueError("grid must be strictly increasing")

    def replace(self, **changes) -> "PotentialTriple":
        fields = dict(grid=self.grid, V=self.V, Vtilde=self.Vtilde, gamma=self.gamma,
                      constants=self.constants)
        fields.update(changes)
        return PotentialTriple(**fields)


def build_triple(beta: BetaProvider, k: ShiftConstants, grid, floor: float = DEFAULT_BETA_FLOOR) -> PotentialTriple:
    grid = np.asarray(grid, dtype=float)
    b, b1, b2 = _coefficients(beta, grid, floor)
    common = _common(b, b1, b2, k)
    quad = 0.25 * b * b
    return PotentialTriple(
        grid=grid,
        V=common - b1 + quad - 0.5 * k.delta,
        Vtilde=common + b1 + quad - 0.5 * k.delta,
        gamma=-common + 0.5 * b1 + quad,
        constants=k,
    )


def oscillator_beta() -> ClosedFormBeta:
    """beta = -2x, the coefficient of (a+)^2 for the harmonic oscillator."""
    return ClosedFormBeta(
        f=lambda x: -2.0 * np.asarray(x, dtype=float),
        df=lambda x: np.full(np.shape(x), -2.0) if np.ndim(x) else -2.0,
        d2f=lambda x: np.zeros(np.shape(x)) if np.ndim(x) else 0.0,
        label="minus2x",
    )


def oscillator_triple(grid) -> PotentialTriple:
    """Exact oscillator triple V = x^2, Vt = x^2 - 4, gamma = x^2 - 1.

    Evaluated directly, so grids through x = 0 (where beta vanishes) are fine.
    """
    grid = np.asarray(grid, dtype=float)
    x2 = grid * grid
    return PotentialTriple(grid=grid, V=x2, Vtilde=x2 - 4.0, gamma=x2 - 1.0,
                           constants=ShiftConstants.oscillator())


# -- test functions --------------------------------------------------------


@dataclass(frozen=True)
class TestFunction:
    """Smooth, rapidly decaying probe function psi(x)."""

    __test__ = False  # not a pytest class

    f: Callable
    label: str

    def __call__(self, x):
        return self.f(np.asarray(x, dtype=float))


def gaussian(center: float = 0.0, width: float = 1.0) -> TestFunction:
    return hermite_gaussian(0, center=center, width=width)


def hermite_gaussian(order: int, center: float = 0.0, width: float = 1.0) -> TestFunction:
    """H_order(t) exp(-t^2/2) with t = (x - center)/width (unnormalised)."""
    coef = np.zeros(order + 1)
    coef[order] = 1.0

    def f(x):
        t = (x - center) / width
        return hermite.hermval(t, coef) * np.exp(-0.5 * t * t)

    return TestFunction(f, f"hermite-gaussian(n={order}, c={center:g}, w={width:g})")


def psi_corpus() -> list[TestFunction]:
    """Hermite-Gaussians of orders 0-4 at widths 0.7, 1.0, 1.5."""
    return [hermite_gaussian(n, width=w) for w in (0.7, 1.0, 1.5) for n in range(5)]


# -- finite differences on uniform grids ----------------------------------


def _spacing(grid: np.ndarray) -> float:
    if len(grid) < 5:
        raise ValueError("need at least 5 grid points for the stencils")
    steps = np.diff(grid)
    h = float(steps.mean())
    if np.max(np.abs(steps - h)) > 1e-9 * max(1.0, abs(h)):
        raise ValueError("finite-difference residuals need a uniform grid")
    return h


def d1(u: np.ndarray, h: float) -> np.ndarray:
    """Centred first derivative; values outside the grid are taken as zero."""
    p = np.pad(u, 1)
    return (p[2:] - p[:-2]) / (2.0 * h)


def d2(u: np.ndarray, h: float) -> np.ndarray:
    """Three-point second derivative with zero extension (Dirichlet)."""
    p = np.pad(u, 1)
    return (p[2:] - 2.0 * u + p[:-2]) / (h * h)


def _interior_d1(u, h):
    return (u[2:] - u[:-2]) / (2.0 * h)


def _interior_d2(u, h):
    return (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (h * h)


def constraint_residuals(triple: PotentialTriple, beta: BetaProvider, k: ShiftConstants) -> tuple[float, float, float]:
    """Sup-norms of the three constraint relations on the triple's grid.

    (1) Vt - V - 2 beta',  (2) 2V + delta - (beta^2 - 2 gamma - beta'),
    (3) V'' + beta V' - (2 gamma beta' - gamma''), with centred differences,
    so relation (3) is only checked at interior points.
    """
    x = triple.grid
    h = _spacing(x)
    b = np.asarray(beta.beta(x), dtype=float)
    b1 = np.asarray(beta.dbeta(x), dtype=float)
    V, Vt, g = triple.V, triple.Vtilde, triple.gamma
    r1 = np.max(np.abs(Vt - V - 2.0 * b1))
    r2 = np.max(np.abs(2.0 * V + k.delta - (b * b - 2.0 * g - b1)))
    s = slice(1, -1)
    r3 = np.max(np.abs(_interior_d2(V, h) + b[s] * _interior_d1(V, h)
                       - 2.0 * g[s] * b1[s] + _interior_d2(g, h)))
    return float(r1), float(r2), float(r3)


def _probe(triple: PotentialTriple, psi: TestFunction):
    x = triple.grid
    h = _spacing(x)
    u = psi(x)
    peak = np.max(np.abs(u))
    if peak == 0.0:
        raise ValueError("test function vanishes on the grid")
    if max(abs(u[0]), abs(u[-1])) > BOUNDARY_FLOOR * peak:
        warnings.warn(f"{psi.label} does not decay at the window ends; residual unreliable",
                      UnreliableResidualWarning, stacklevel=3)
    return x, h, u


def _relative_norm(r: np.ndarray, u: np.ndarray) -> float:
    # two stacked stencil passes: the outer two points on each side see the
    # zero extension twice
    return float(np.linalg.norm(r[2:-2]) / np.linalg.norm(u))


def apply_a_plus(u, h, b, g):
    return d2(u, h) + b * d1(u, h) + g * u


def apply_a(u, h, b, b1, g):
    """Formal adjoint A = d^2/dx^2 - beta d/dx + (gamma - beta')."""
    return d2(u, h) - b * d1(u, h) + (g - b1) * u


def apply_hamiltonian(u, h, V):
    return -d2(u, h) + V * u


def intertwining_residual(triple: PotentialTriple, beta: BetaProvider, psi: TestFunction) -> float:
    """||(Ht A+ - A+ H) psi|| / ||psi|| on the triple's (uniform) grid."""
    x, h, u = _probe(triple, psi)
    b = np.asarray(beta.beta(x), dtype=float)
    lhs = apply_hamiltonian(apply_a_plus(u, h, b, triple.gamma), h, triple.Vtilde)
    rhs = apply_a_plus(apply_hamiltonian(u, h, triple.V), h, b, triple.gamma)
    return _relative_norm(lhs - rhs, u)


def factorization_residual(triple: PotentialTriple, beta: BetaProvider, k: ShiftConstants,
                           psi: TestFunction) -> float:
    """||(A A+ - (H + delta/2)^2 + c) psi|| / ||psi||."""
    x, h, u = _probe(triple, psi)
    b = np.asarray(beta.beta(x), dtype=float)
    b1 = np.asarray(beta.dbeta(x), dtype=float)
    g = triple.gamma
    lhs = apply_a(apply_a_plus(u, h, b, g), h, b, b1, g)
    shifted = lambda w: apply_hamiltonian(w, h, triple.V) + 0.5 * k.delta * w  # noqa: E731
    rhs = shifted(shifted(u)) - k.c * u
    return _relative_norm(lhs - rhs, u)


def uniform_grid(window: tuple[float, float], n: int) -> np.ndarray:
    a, b = window
    if not a < b or n < 5:
        raise ValueError("need a < b and n >= 5")
    return np.linspace(a, b, n)
