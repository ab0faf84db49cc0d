"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""

import json
import time

import numpy as np
import pytest

from sususy import verify
from sususy.beta_ode import InitialPoint, beta_particular, beta_equation_lhs, integrate
from sususy.cli import main
from sususy.operators import ShiftConstants, oscillator_beta, potential_from_beta
from sususy.scanner import classify_point, curve_points, scan_region
from sususy.spectral import abraham_moses, compare_spectra, oscillator, oscillator_levels, shifted_partner, spectrum_of


@pytest.fixture
def report(capsys):
    def emit(n, title, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n} [{'PASS' if ok else 'FAIL'}] {title}: {detail}")
        assert ok, detail

    return emit


def test_1_closed_form_conformance(report, cfg):
    worst, slowest = 0.0, 0.0
    for lam in (1.5, 2.0, 5.0, -2.0):
        t0 = time.perf_counter()
        sol = integrate(beta_particular(lam, 0.0), cfg)
        slowest = max(slowest, time.perf_counter() - t0)
        m = np.abs(sol.x) <= 5.0
        b, db = beta_particular(lam, sol.x[m])
        assert sol.regular
        worst = max(worst, np.max(np.abs(sol.beta[m] - b)))
    report(1, "ODE vs closed form", worst <= 1e-6 and slowest <= 1.0,
           f"sup error {worst:.2e} (<= 1e-6), slowest {slowest:.3f} s (<= 1 s)")


def test_2_oscillator_identity(report):
    rng = np.random.default_rng(2024)
    x = rng.uniform(0.1, 6.0, 100) * rng.choice([-1.0, 1.0], 100)
    V = potential_from_beta(oscillator_beta(), ShiftConstants.oscillator(), x)
    e_v = np.max(np.abs(V - x * x))
    e_ode = np.max(np.abs(beta_equation_lhs(x, -2 * x, -2.0 + 0 * x, 0 * x)))
    report(2, "oscillator identity", e_v <= 1e-12 and e_ode <= 1e-12,
           f"|V - x^2| {e_v:.1e}, equation residual {e_ode:.1e} (<= 1e-12)")


def test_3_abraham_moses_reconstruction(report, cfg):
    worst = 0.0
    for lam in (1.5, 2.0, 5.0):
        sol = integrate(beta_particular(lam, 0.0), cfg)
        m = np.abs(sol.x) <= 5.0
        x = sol.x[m]
        worst = max(worst, np.max(np.abs(x * x + 2 * sol.dbeta[m] + 4 - abraham_moses(lam, x))))
    report(3, "AM reconstruction", worst <= 1e-6, f"sup error {worst:.2e} (<= 1e-6)")


def test_4_operator_residuals(report):
    checks = verify.operator_residuals(n=4001, window=(-8.0, 8.0))
    report(4, "intertwining/factorization", all(c.passed for c in checks),
           "; ".join(f"{c.name} {c.value:.3g}" for c in checks))


@pytest.mark.slow
def test_5_region_map(report, cfg):
    bad_curve = [p for p in curve_points(20, 1.0) if not classify_point(p, cfg).regular]
    t0 = time.perf_counter()
    rm = scan_region(cfg)
    elapsed = time.perf_counter() - t0
    tol = cfg.bisect_tol
    failures = []
    for t in rm.brackets():
        for edge, outward in ((t.lower, -1.0), (t.upper, 1.0)):
            inside = classify_point(InitialPoint(t.beta0, edge - outward * tol), cfg).regular
            outside = classify_point(InitialPoint(t.beta0, edge + outward * tol), cfg).regular
            if not inside or outside:
                failures.append((t.beta0, edge))
    ok = not bad_curve and rm.brackets() and not failures and elapsed <= 600
    report(5, "region map", ok,
           f"{20 - len(bad_curve)}/20 curve points regular, {len(rm.brackets())} brackets, "
           f"{len(failures)} bracket failures, full scan {elapsed:.0f} s (<= 600 s)")


def test_6_isospectrality(report, cfg):
    exact = oscillator_levels(6)
    control = compare_spectra(spectrum_of(oscillator, 6, (-8.0, 8.0), 4000), exact).max()
    diffs = []
    for p in verify.REGULAR_FIXTURES:
        sol = integrate(p, cfg)
        assert sol.regular
        diffs.append(compare_spectra(spectrum_of(shifted_partner(sol), 6, (-8.0, 8.0), 4000), exact).max())
    report(6, "isospectrality (hypothesis-consistent, not a proof)",
           control <= 1e-3 and max(diffs) <= 5e-3,
           f"control {control:.2e} (<= 1e-3), fixtures {', '.join(f'{d:.2e}' for d in diffs)} (<= 5e-3)")


def test_7_double_well(report, cfg):
    (check,) = verify.double_well(cfg)
    report(7, "asymmetric double well", check.passed, f"asymmetry {check.value:.3f} (> 0.01); {check.note}")


def _payload(path):
    # drop metadata lines that carry run time
    return [line for line in path.read_text().splitlines() if "wall_clock" not in line]


def test_8_scan_determinism(report, tmp_path):
    args = ["scan", "--grid", "6x8", "--jobs", "2"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    names = json.loads((tmp_path / "a" / "manifest.json").read_text())["outputs"] + ["manifest.json"]
    same = all(_payload(tmp_path / "a" / n) == _payload(tmp_path / "b" / n) for n in names)
    report(8, "scan determinism", same, f"{len(names)} files compared, identical={same}")
