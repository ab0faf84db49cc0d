"""Finite-difference spectra of 1-D Schroedinger operators and the AM potentials."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.signal import find_peaks

from .beta_ode import BetaSolution
from .io import write_csv
from .special import am_correction, check_lambda

EPS = np.finfo(float).eps


@dataclass
class SampledPotential:
    """Cubic-spline potential through samples, optionally with an oscillator tail.

    With ``tail="oscillator"`` points outside the sampled range get
    x^2 + (V_edge - x_edge^2) (x_edge / x)^2, i.e. the deviation from x^2 is
    continued from the edge value with algebraic decay.  ``tail_mismatch`` is
    the larger of the two edge deviations |V_edge - x_edge^2|.
    """

    x: np.ndarray
    v: np.ndarray
    label: str = "sampled"
    tail: Optional[str] = None

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        if not np.all(np.isfinite(self.v)):
            raise ValueError(f"{self.label}: non-finite potential samples")
        self._spline = CubicSpline(self.x, self.v)

    @property
    def tail_mismatch(self) -> float:
        return float(max(abs(self.v[0] - self.x[0] ** 2), abs(self.v[-1] - self.x[-1] ** 2)))

    def __call__(self, xq):
        xq = np.asarray(xq, dtype=float)
        lo, hi = self.x[0], self.x[-1]
        below, above = xq < lo, xq > hi
        if (below.any() or above.any()) and self.tail != "oscillator":
            raise ValueError(f"{self.label}: evaluation outside [{lo}, {hi}] without a tail")
        out = self._spline(np.clip(xq, lo, hi))
        for mask, edge, v_edge in ((below, lo, self.v[0]), (above, hi, self.v[-1])):
            if mask.any():
                t = xq[mask]
                out[mask] = t * t + (v_edge - edge * edge) * (edge / t) ** 2
        return out


def shifted_partner(sol: BetaSolution) -> SampledPotential:
    """Vt + 4 = x^2 + 2 beta' + 4 from a regular solution, oscillator tail beyond x_max."""
    if not sol.regular:
        raise ValueError("singular solution: the partner potential has a pole in the window")
    return SampledPotential(sol.x, sol.x ** 2 + 2.0 * sol.dbeta + 4.0,
                            label="Vtilde+4 (oscillator tail beyond the integration window)",
                            tail="oscillator")


def abraham_moses(lam: float, x):
    """V_lam(x) = x^2 - 2 d/dx [exp(-x^2)/(lam + F(x))], derivative taken analytically."""
    check_lambda(lam)
    _, g1, _ = am_correction(lam, x)
    return x * x - 2.0 * g1


def oscillator(x):
    return np.asarray(x, dtype=float) ** 2


@dataclass(frozen=True)
class DiscretizedHamiltonian:
    """-d^2/dx^2 + V on n interior points of [a, b], Dirichlet at both ends."""

    domain: tuple[float, float]
    n: int
    diag: np.ndarray
    offdiag: np.ndarray
    potential_label: str = ""

    @property
    def h(self) -> float:
        a, b = self.domain
        return (b - a) / (self.n + 1)

    @property
    def grid(self) -> np.ndarray:
        return self.domain[0] + self.h * np.arange(1, self.n + 1)

    @property
    def norm_bound(self) -> float:
        """Gershgorin bound on the spectral radius."""
        e = np.abs(self.offdiag)
        radius = np.abs(self.diag).copy()
        radius[:-1] += e
        radius[1:] += e
        return float(radius.max())


def discretize(V: Callable, domain: tuple[float, float], n: int, label: str = "") -> DiscretizedHamiltonian:
    a, b = map(float, domain)
    if n < 16:
        raise ValueError("need n >= 16 interior points")
    if not a < b:
        raise ValueError("empty domain")
    h = (b - a) / (n + 1)
    x = a + h * np.arange(1, n + 1)
    v = np.asarray(V(x), dtype=float)
    if v.shape != x.shape or not np.all(np.isfinite(v)):
        raise ValueError(f"potential {label or V!r} is not finite on ({a}, {b})")
    return DiscretizedHamiltonian(
        domain=(a, b), n=n, diag=2.0 / h**2 + v, offdiag=np.full(n - 1, -1.0 / h**2),
        potential_label=label or getattr(V, "label", getattr(V, "__name__", "potential")),
    )


def sturm_count(diag: Sequence[float], off2: Sequence[float], sigma: float, pivmin: float) -> int:
    """Number of eigenvalues below sigma (negative pivots of T - sigma I = L D L^T)."""
    count = 0
    q = diag[0] - sigma
    if abs(q) < pivmin:
        q = -pivmin
    if q < 0:
        count += 1
    for d, e2 in zip(diag[1:], off2):
        q = d - sigma - e2 / q
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0:
            count += 1
    return count


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    domain: Optional[tuple[float, float]] = None  # None for exact reference spectra
    n: Optional[int] = None
    label: str = ""
    tolerance: float = 0.0

    @property
    def k(self) -> int:
        return len(self.eigenvalues)

    def to_csv(self, path, meta: Optional[dict] = None) -> None:
        header = {"label": self.label, "domain": self.domain, "n": self.n,
                  "bisection_tolerance": self.tolerance}
        header.update(meta or {})
        write_csv(path, ["level", "eigenvalue"], [np.arange(self.k), self.eigenvalues], header)


def eigenvalues(Hd: DiscretizedHamiltonian, k: int) -> Spectrum:
    """The k algebraically smallest eigenvalues by Sturm-count bisection.

    Each bisection runs to an absolute width of 4 eps ||T||, and every count
    also tightens the brackets of the other requested levels.
    """
    if not 1 <= k <= Hd.n:
        raise ValueError(f"k must lie in [1, {Hd.n}], got {k}")
    diag = Hd.diag.tolist()
    off2 = (Hd.offdiag ** 2).tolist()
    norm = Hd.norm_bound
    pivmin = EPS * EPS * max(1.0, max(off2, default=1.0))
    tol = 4.0 * EPS * norm
    e = np.abs(Hd.offdiag)
    radius = np.zeros(Hd.n)
    radius[:-1] += e
    radius[1:] += e
    lo_all = float(np.min(Hd.diag - radius))
    hi_all = float(np.max(Hd.diag + radius))
    lower = [lo_all] * k
    upper = [hi_all] * k
    for j in range(k):
        a, b = max(lower[j], lower[j - 1] if j else lo_all), upper[j]
        while b - a > tol:
            mid = 0.5 * (a + b)
            c = sturm_count(diag, off2, mid, pivmin)
            for i in range(j, k):
                if i < c:
                    upper[i] = min(upper[i], mid)
                else:
                    lower[i] = max(lower[i], mid)
            a, b = lower[j], upper[j]
        lower[j] = upper[j] = 0.5 * (a + b)
    vals = np.array(upper)
    return Spectrum(vals, Hd.domain, Hd.n, Hd.potential_label, tol)


def oscillator_levels(k: int) -> Spectrum:
    """Exact spectrum 2m + 1 of -d^2/dx^2 + x^2."""
    return Spectrum(2.0 * np.arange(k) + 1.0, label="x^2 exact")


def compare_spectra(A: Spectrum, B: Spectrum) -> np.ndarray:
    """Per-level |A_i - B_i|; exact spectra (no domain) compare with anything."""
    if A.k != B.k:
        raise ValueError(f"level counts differ: {A.k} vs {B.k}")
    if A.domain is not None and B.domain is not None and (A.domain, A.n) != (B.domain, B.n):
        raise ValueError("spectra come from different discretizations")
    return np.abs(A.eigenvalues - B.eigenvalues)


def spectrum_of(V: Callable, k: int = 6, domain=(-8.0, 8.0), n: int = 4000, label: str = "") -> Spectrum:
    return eigenvalues(discretize(V, domain, n, label), k)


@dataclass
class WellReport:
    minima: list[tuple[float, float]] = field(default_factory=list)  # (x, V(x))
    asymmetry: float = 0.0
    center: float = math.nan

    @property
    def is_double_well(self) -> bool:
        return len(self.minima) == 2

    @property
    def depth_difference(self) -> float:
        if len(self.minima) < 2:
            return 0.0
        values = [v for _, v in self.minima]
        return max(values) - min(values)


def double_well_analysis(x, V, prominence: float = 1e-3, min_half_width: float = 0.25) -> WellReport:
    """Local minima of sampled V and a reflection-asymmetry score.

    Minima must stand out by ``prominence * (max V - min V)``.  The score is
    the smallest, over candidate centres x0, of sup_t |V(x0+t) - V(x0-t)|
    normalised by the range of V, where the mirrored window must hold every
    detected minimum and span at least ``min_half_width`` of the grid.
    Candidates are the grid points and the midpoints of pairs of minima.
    """
    x = np.asarray(x, dtype=float)
    V = np.asarray(V, dtype=float)
    if len(x) < 101:
        raise ValueError("need at least 101 samples")
    span = float(V.max() - V.min())
    if span == 0.0:
        return WellReport([], 0.0, float(x[len(x) // 2]))
    idx, _ = find_peaks(-V, prominence=prominence * span)
    minima = [(float(x[i]), float(V[i])) for i in idx]

    a, b = float(x[0]), float(x[-1])
    h = (b - a) / (len(x) - 1)
    xm = [m for m, _ in minima]
    candidates = list(x)
    candidates += [0.5 * (p + q) for i, p in enumerate(xm) for q in xm[i + 1:]]
    best, best_x0 = math.inf, math.nan
    for x0 in candidates:
        T = min(x0 - a, b - x0)
        if T < min_half_width * (b - a):
            continue
        if any(abs(m - x0) > T for m in xm):
            continue
        t = np.arange(0.0, T + 0.5 * h, h)
        t = t[t <= T]
        diff = np.abs(np.interp(x0 + t, x, V) - np.interp(x0 - t, x, V))
        score = float(diff.max()) / span
        if score < best:
            best, best_x0 = score, float(x0)
    return WellReport(minima, best, best_x0)
