"""Numerical checks behind ``sususy verify``.

Isospectrality of the partner family is a conjecture; agreement here is
evidence at fixed precision, and reports say so.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .beta_ode import InitialPoint, beta_particular, beta_equation_lhs, initial_curve, integrate, residual_eq16
from .config import ScanConfig
from .operators import (ShiftConstants, factorization_residual, gaussian, intertwining_residual,
                        oscillator_beta, oscillator_triple, potential_from_beta, uniform_grid)
from .scanner import classify_point, curve_points
from .spectral import (abraham_moses, compare_spectra, double_well_analysis, oscillator,
                       oscillator_levels, shifted_partner, spectrum_of)

# Regular points of the initial-condition plane used as regression fixtures:
# one on the particular-solution curve and two off it (both double wells).
REGULAR_FIXTURES = (
    InitialPoint(-0.7, initial_curve(-0.7)),
    InitialPoint(-0.7, -1.0),
    InitialPoint(0.5, -1.2),
)
DOUBLE_WELL_FIXTURE = InitialPoint(-0.7, -1.0)
WELL_WINDOW = (-4.0, 4.0)
WELL_SAMPLES = 801


@dataclass
class Check:
    name: str
    value: float
    bound: float
    passed: bool
    note: str = ""

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.name}: {self.value:.3e} (bound {self.bound:.1e}) {self.note}".rstrip()


def _check(name, value, bound, note="") -> Check:
    return Check(name, float(value), float(bound), bool(value <= bound), note)


def ode_conformance(cfg: ScanConfig, lams=(1.5, 2.0, 5.0, -2.0), x_abs=5.0) -> list[Check]:
    out = []
    for lam in lams:
        sol = integrate(beta_particular(lam, 0.0), cfg)
        if not sol.regular:
            out.append(Check(f"ode-vs-closed-form lambda={lam:g}", math.inf, 1e-6, False, "singular"))
            continue
        m = np.abs(sol.x) <= x_abs
        b, db = beta_particular(lam, sol.x[m])
        err = max(np.max(np.abs(sol.beta[m] - b)), np.max(np.abs(sol.dbeta[m] - db)))
        out.append(_check(f"ode-vs-closed-form lambda={lam:g}", err, 1e-6))
    return out


def am_reconstruction(cfg: ScanConfig, lams=(1.5, 2.0, 5.0), x_abs=5.0) -> list[Check]:
    out = []
    for lam in lams:
        sol = integrate(beta_particular(lam, 0.0), cfg)
        m = np.abs(sol.x) <= x_abs
        x = sol.x[m]
        err = np.max(np.abs(x * x + 2.0 * sol.dbeta[m] + 4.0 - abraham_moses(lam, x)))
        out.append(_check(f"am-reconstruction lambda={lam:g}", err, 1e-6))
    return out


def oscillator_identity(n_points=100, seed=0) -> list[Check]:
    x = np.random.default_rng(seed).uniform(0.1, 6.0, n_points)
    V = potential_from_beta(oscillator_beta(), ShiftConstants.oscillator(), x)
    lhs = beta_equation_lhs(x, -2.0 * x, -2.0 * np.ones_like(x), np.zeros_like(x))
    return [_check("V from beta=-2x equals x^2", np.max(np.abs(V - x * x)), 1e-12),
            _check("beta=-2x solves the beta equation", np.max(np.abs(lhs)), 1e-12)]


def operator_residuals(n=4001, window=(-8.0, 8.0)) -> list[Check]:
    b, k, psi = oscillator_beta(), ShiftConstants.oscillator(), gaussian()
    coarse = oscillator_triple(uniform_grid(window, n))
    fine = oscillator_triple(uniform_grid(window, 2 * n - 1))
    out = []
    for name, fn in (("intertwining", lambda t: intertwining_residual(t, b, psi)),
                     ("factorization", lambda t: factorization_residual(t, b, k, psi))):
        rc, rf = fn(coarse), fn(fine)
        out.append(_check(f"{name} residual n={n}", rc, 1e-3))
        out.append(Check(f"{name} halving-h reduction", rc / rf, 3.0, rc / rf >= 3.0, "needs >= 3"))
    return out


def curve_containment(cfg: ScanConfig, n=20) -> list[Check]:
    bad = [p for p in curve_points(n) if not classify_point(p, cfg).regular]
    return [_check(f"{n} curve points regular", len(bad), 0, f"singular: {bad}" if bad else "")]


def isospectrality(cfg: ScanConfig, k=6, n=4000, domain=(-8.0, 8.0)) -> list[Check]:
    exact = oscillator_levels(k)
    out = [_check("oscillator control", compare_spectra(spectrum_of(oscillator, k, domain, n, "x^2"), exact).max(), 1e-3)]
    for p in REGULAR_FIXTURES:
        sol = integrate(p, cfg)
        if not sol.regular:
            out.append(Check(f"isospectral {tuple(p)}", math.inf, 5e-3, False, "fixture singular"))
            continue
        diff = compare_spectra(spectrum_of(shifted_partner(sol), k, domain, n, "Vt+4"), exact).max()
        out.append(_check(f"isospectral {tuple(round(v, 6) for v in p)}", diff, 5e-3,
                          "hypothesis-consistent, not a proof"))
    return out


def double_well(cfg: ScanConfig) -> list[Check]:
    sol = integrate(DOUBLE_WELL_FIXTURE, cfg)
    if not sol.regular:
        return [Check("double well", math.inf, 0.0, False, "fixture singular")]
    x = np.linspace(*WELL_WINDOW, WELL_SAMPLES)
    rep = double_well_analysis(x, shifted_partner(sol)(x))
    ok = rep.is_double_well and rep.depth_difference > 1e-2 and rep.asymmetry > 0.01
    return [Check(f"asymmetric double well at {tuple(DOUBLE_WELL_FIXTURE)}", rep.asymmetry, 0.01, ok,
                  f"minima={rep.minima} depth_diff={rep.depth_difference:.3g}")]


def run_all(cfg: ScanConfig = ScanConfig()) -> list[Check]:
    checks = []
    checks += ode_conformance(cfg)
    checks += oscillator_identity()
    checks += am_reconstruction(cfg)
    checks += operator_residuals()
    checks += curve_containment(cfg)
    checks += isospectrality(cfg)
    checks += double_well(cfg)
    fit = residual_eq16(integrate(beta_particular(2.0, 0.0), cfg))
    checks.append(_check("beta equation residual lambda=2", fit, 1e-5))
    return checks


def as_dicts(checks) -> list[dict]:
    out = []
    for c in checks:
        d = asdict(c)
        if not math.isfinite(d["value"]):
            d["value"] = str(d["value"])
        out.append(d)
    return out
