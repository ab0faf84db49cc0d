"""Command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure
(a singularity where a regular solution was required, or a failed check).
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import math
import os
import sys
import time
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import __version__
from .beta_ode import BetaSolution, InitialPoint, beta_particular, initial_curve, integrate, particular_beta
from .config import SCAN_KEYS, ConfigError, ScanConfig, fingerprint, load_kv
from .io import ensure_dir, write_csv, write_json
from .operators import (ShiftConstants, build_triple, constraint_residuals, factorization_residual,
                        gaussian, intertwining_residual, oscillator_beta, uniform_grid)
from .scanner import scan_region
from .special import check_lambda
from .spectral import (abraham_moses, compare_spectra, oscillator, oscillator_levels, shifted_partner,
                       spectrum_of)

log = logging.getLogger("sususy")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2

# command parameters outside ScanConfig, with defaults
DEFAULTS: dict[str, Any] = {
    "seed_source": "minus2x",
    "lambda": 2.0,
    "beta0": -0.7,
    "dbeta0": None,  # None: the curve value for beta0
    "kmax": 6,
    "n_spectral": 4000,
    "spectral_min": -8.0,
    "spectral_max": 8.0,
    "derive_min": -6.0,
    "derive_max": 6.0,
    "derive_points": 4000,
    "dbeta_list": "-2.6,-2.2,-1.8,-1.51,-1.2,-0.8,-0.4",
    "gallery_min": -4.0,
    "gallery_max": 4.0,
    "gallery_points": 801,
}
INT_KEYS = {"kmax", "n_spectral", "derive_points", "gallery_points", "n_beta", "n_dbeta", "jobs"}
STR_KEYS = {"seed_source", "dbeta_list"}


class UsageError(Exception):
    pass


class NumericalFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- config resolution ---------------------------------------------------


def _coerce(key: str, raw: Any) -> Any:
    if raw is None or key in STR_KEYS:
        return raw
    try:
        if key in INT_KEYS:
            return int(raw)
        return float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: cannot parse {raw!r}") from None


def resolve_config(args: argparse.Namespace) -> dict[str, Any]:
    """Defaults, then the config file, then command-line flags."""
    values: dict[str, Any] = dict(DEFAULTS)
    values.update(ScanConfig().numeric_dict())
    values["jobs"] = None
    if args.config:
        try:
            file_values = load_kv(args.config)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        unknown = set(file_values) - set(values)
        if unknown:
            raise ConfigError(f"{args.config}: unknown keys {sorted(unknown)}")
        values.update(file_values)
    flags = {
        "seed_source": args.seed_source, "lambda": args.lam, "beta0": args.beta0,
        "dbeta0": args.dbeta0, "kmax": args.kmax, "jobs": args.jobs,
    }
    if args.grid:
        try:
            nb, nd = args.grid.lower().split("x")
        except ValueError:
            raise ConfigError(f"--grid expects NBxND, got {args.grid!r}") from None
        flags.update(n_beta=nb, n_dbeta=nd)
    if args.window:
        parts = args.window.split(",")
        if len(parts) != 4:
            raise ConfigError("--window expects bmin,bmax,dbmin,dbmax")
        flags.update(zip(("beta_min", "beta_max", "dbeta_min", "dbeta_max"), parts))
    if getattr(args, "dbeta_list", None):
        flags["dbeta_list"] = args.dbeta_list
    values.update({k: v for k, v in flags.items() if v is not None})
    return {k: _coerce(k, v) for k, v in values.items()}


def scan_config(values: dict[str, Any]) -> ScanConfig:
    return ScanConfig.from_mapping({k: values[k] for k in SCAN_KEYS if k in values})


# -- run bookkeeping ------------------------------------------------------


class Run:
    """Output directory, run fingerprint and manifest for one command."""

    def __init__(self, command: str, values: dict[str, Any], out_dir: str, inputs: Optional[dict] = None):
        self.command = command
        self.values = values
        self.out = Path(ensure_dir(out_dir))
        self.inputs = inputs or {}
        # the worker count cannot change results, so it stays out of the fingerprint
        payload = {k: v for k, v in values.items() if k != "jobs"}
        self.fingerprint = fingerprint({"command": command, "config": payload, "inputs": self.inputs})
        self.outputs: list[str] = []
        self.started = time.monotonic()

    def path(self, name: str) -> Path:
        self.outputs.append(name)
        return self.out / name

    @property
    def meta(self) -> dict[str, str]:
        return {"fingerprint": self.fingerprint, "command": self.command}

    def finish(self, status: str) -> None:
        write_json(self.out / "manifest.json", {
            "command": self.command,
            "config": self.values,
            "fingerprint": self.fingerprint,
            "inputs": self.inputs,
            "outputs": sorted(self.outputs),
            "status": status,
            "tool_version": __version__,
            "wall_clock_seconds": round(time.monotonic() - self.started, 3),
        })


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]


def _beta_source(spec: str):
    """(provider, label, lambda or None, input fingerprints) for a seed source."""
    if spec == "minus2x":
        return oscillator_beta(), "minus2x", None, {}
    if spec.startswith("eq17:"):
        key, _, value = spec[5:].partition("=")
        if key != "lambda":
            raise UsageError(f"seed source {spec!r}: expected eq17:lambda=VALUE")
        try:
            lam = float(value)
            return particular_beta(lam), spec, lam, {}
        except ValueError as exc:
            raise UsageError(f"seed source {spec!r}: {exc}") from None
    if spec.startswith("csv:"):
        path = spec[4:]
        try:
            sol = BetaSolution.from_csv(path)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read beta solution {path!r}: {exc}") from None
        if not sol.regular:
            raise NumericalFailure(f"singular solution in {path} (x_sing = {sol.x_sing})")
        return sol.provider(), spec, None, {path: file_digest(path)}
    raise UsageError(f"unknown seed source {spec!r}")


def _initial_point(values) -> InitialPoint:
    b0 = values["beta0"]
    db0 = values["dbeta0"]
    if db0 is None:
        try:
            db0 = initial_curve(b0)
        except ValueError as exc:
            raise UsageError(f"{exc}; pass --dbeta0 explicitly") from None
    return InitialPoint(b0, db0)


# -- commands --------------------------------------------------------------


def cmd_derive(values, out_dir) -> int:
    provider, label, lam, inputs = _beta_source(values["seed_source"])
    run = Run("derive", values, out_dir, inputs)
    k = ShiftConstants.oscillator()
    lo, hi = values["derive_min"], values["derive_max"]
    dlo, dhi = provider.domain
    lo, hi = max(lo, dlo), min(hi, dhi)
    grid = uniform_grid((lo, hi), values["derive_points"])
    triple = build_triple(provider, k, grid)
    columns = ["x", "V", "Vtilde", "gamma", "Vtilde_plus_4"]
    data = [grid, triple.V, triple.Vtilde, triple.gamma, triple.Vtilde + 4.0]
    report: dict[str, Any] = {"fingerprint": run.fingerprint, "source": label}
    if lam is not None:
        am = abraham_moses(lam, grid)
        columns.append("abraham_moses")
        data.append(am)
        report["max_abs_vtilde_plus_4_minus_am"] = float(np.max(np.abs(triple.Vtilde + 4.0 - am)))
    write_csv(run.path("potentials.csv"), columns, data, {**run.meta, "source": label})
    r1, r2, r3 = constraint_residuals(triple, provider, k)
    psi = gaussian()
    report.update(
        constraint_residuals={"partner_shift": r1, "gamma_relation": r2, "third_order": r3},
        intertwining_residual=intertwining_residual(triple, provider, psi),
        factorization_residual=factorization_residual(triple, provider, k, psi),
        test_function=psi.label,
        grid={"min": lo, "max": hi, "points": int(values["derive_points"])},
    )
    write_json(run.path("residuals.json"), report)
    run.finish("ok")
    print(f"derive[{label}]: intertwining {report['intertwining_residual']:.3e}, "
          f"factorization {report['factorization_residual']:.3e}")
    return EXIT_OK


def cmd_integrate(values, out_dir) -> int:
    cfg = scan_config(values)
    source = values["seed_source"]
    if source.startswith("eq17:"):
        _, _, lam, _ = _beta_source(source)
        p = InitialPoint(*beta_particular(lam, 0.0))
    else:
        p = _initial_point(values)
    run = Run("integrate", values, out_dir)
    sol = integrate(p, cfg)
    sol.to_csv(run.path("beta.csv"), {**run.meta, "beta0": f"{p.beta0:.17g}", "dbeta0": f"{p.dbeta0:.17g}"})
    run.finish(sol.status)
    where = "" if sol.regular else f" at x = {sol.x_sing:.6g} ({sol.reason})"
    print(f"integrate({p.beta0:.6g}, {p.dbeta0:.6g}): {sol.status}{where}, {len(sol.x)} samples")
    return EXIT_OK


FIGURE1_GP = """\
# fingerprint: {fp}
# Regular (shaded) and singular (white) initial points; line: beta'(0) = -2 + beta(0)^2
set terminal pngcairo size 900,700
set output 'figure1.png'
set datafile separator ','
set xlabel "beta(0)"
set ylabel "beta'(0)"
set xrange [{bmin}:{bmax}]
set yrange [{dmin}:{dmax}]
set palette defined (0 'white', 1 'gray60')
unset colorbox
set key off
plot 'region.csv' using 1:2:(strcol(3) eq 'regular' ? 1 : 0) every ::1 with points pt 5 ps {ps} lc palette, \\
     'curve.csv' using 1:2 every ::1 with lines lw 2 lc rgb 'black'
"""


def cmd_scan(values, out_dir) -> int:
    cfg = scan_config(values)
    run = Run("scan", values, out_dir)
    rm = scan_region(cfg, workers=cfg.workers)
    rm.to_csv(run.path("region.csv"), run.meta)
    rm.to_json(run.path("region.json"), {"fingerprint": run.fingerprint, "scan_fingerprint": cfg.fingerprint()})
    lo = max(cfg.beta_min, -0.999 * 2 / math.sqrt(math.pi))
    hi = min(cfg.beta_max, 0.999 * 2 / math.sqrt(math.pi))
    b = np.linspace(lo, hi, 201) if lo < hi else np.array([])
    write_csv(run.path("curve.csv"), ["beta0", "dbeta0"], [b, -2.0 + b * b], run.meta)
    with open(run.path("figure1.gp"), "w", encoding="utf-8") as fh:
        fh.write(FIGURE1_GP.format(fp=run.fingerprint, bmin=cfg.beta_min, bmax=cfg.beta_max,
                                   dmin=cfg.dbeta_min, dmax=cfg.dbeta_max, ps=0.8))
    run.finish("ok")
    print(f"scan: {int(rm.regular.sum())} regular / {rm.regular.size} cells, "
          f"{len(rm.brackets())} threshold brackets")
    return EXIT_OK


def cmd_spectrum(values, out_dir) -> int:
    cfg = scan_config(values)
    k, n = values["kmax"], values["n_spectral"]
    if not 1 <= k <= n:
        raise UsageError(f"kmax must lie in [1, n_spectral={n}], got {k}")
    domain = (values["spectral_min"], values["spectral_max"])
    source = values["seed_source"]
    lam = values["lambda"]
    try:
        check_lambda(lam)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if source.startswith("csv:"):
        _beta_source(source)  # validates, raises on singular input
        sol = BetaSolution.from_csv(source[4:])
        inputs = {source[4:]: file_digest(source[4:])}
    else:
        p = _initial_point(values)
        sol = integrate(p, cfg)
        inputs = {}
        if not sol.regular:
            raise NumericalFailure(f"({p.beta0}, {p.dbeta0}) is singular at x = {sol.x_sing:.6g}")
    run = Run("spectrum", values, out_dir, inputs)
    exact = oscillator_levels(k)
    osc = spectrum_of(oscillator, k, domain, n, "x^2")
    partner = spectrum_of(shifted_partner(sol), k, domain, n, "Vtilde+4")
    am = spectrum_of(lambda x: abraham_moses(lam, x), k, domain, n, f"abraham-moses lambda={lam:g}")
    for name, spec in (("oscillator", osc), ("partner", partner), ("abraham_moses", am)):
        spec.to_csv(run.path(f"spectrum_{name}.csv"), run.meta)
    d_partner = compare_spectra(partner, osc)
    d_am = compare_spectra(am, osc)
    write_csv(run.path("comparison.csv"),
              ["level", "exact", "oscillator", "partner", "abraham_moses", "partner_vs_oscillator",
               "am_vs_oscillator", "oscillator_vs_exact"],
              [np.arange(k), exact.eigenvalues, osc.eigenvalues, partner.eigenvalues, am.eigenvalues,
               d_partner, d_am, compare_spectra(osc, exact)],
              {**run.meta, "note": "agreement is numerical evidence for isospectrality, not a proof",
               "tail_mismatch": f"{shifted_partner(sol).tail_mismatch:.3g}"})
    run.finish("ok")
    print(f"spectrum: max |partner - x^2| = {d_partner.max():.3e}, max |AM - x^2| = {d_am.max():.3e}")
    return EXIT_OK


FIGURE2_GP = """\
# fingerprint: {fp}
# Partner potentials Vtilde(x) + 4 for beta(0) = {beta0:g}
set terminal pngcairo size 900,700
set output 'figure2.png'
set datafile separator ','
set key autotitle columnhead
set xlabel "x"
set ylabel "Vtilde(x) + 4"
set yrange [-6:20]
plot for [i=2:{ncol}] 'figure2.csv' using 1:i with lines lw 2
"""


def cmd_figure2(values, out_dir) -> int:
    cfg = scan_config(values)
    raw = [s.strip() for s in str(values["dbeta_list"] or "").split(",") if s.strip()]
    if not raw:
        raise UsageError("empty dbeta0 list")
    try:
        dlist = [float(s) for s in raw]
    except ValueError:
        raise UsageError(f"bad dbeta0 list {values['dbeta_list']!r}") from None
    beta0 = values["beta0"]
    run = Run("figure2", values, out_dir)
    x = np.linspace(values["gallery_min"], values["gallery_max"], values["gallery_points"])
    names, curves, skipped = [], [], []
    for db0 in dlist:
        sol = integrate(InitialPoint(beta0, db0), cfg)
        if not sol.regular:
            skipped.append((db0, sol.x_sing))
            continue
        names.append(f"dbeta0={db0:g}")
        curves.append(shifted_partner(sol)(x))
    for db0, xs in skipped:
        print(f"figure2: skipping beta'(0) = {db0:g}: singular at x = {xs:.6g}", file=sys.stderr)
    write_csv(run.path("figure2.csv"), ["x"] + names, [x] + curves,
              {**run.meta, "beta0": f"{beta0:.17g}", "skipped": ";".join(f"{d:g}" for d, _ in skipped)})
    with open(run.path("figure2.gp"), "w", encoding="utf-8") as fh:
        fh.write(FIGURE2_GP.format(fp=run.fingerprint, beta0=beta0, ncol=len(names) + 1))
    run.finish("partial" if skipped else "ok")
    print(f"figure2: {len(names)} curves, {len(skipped)} skipped")
    return EXIT_NUMERIC if skipped else EXIT_OK


def cmd_verify(values, out_dir) -> int:
    from . import verify

    cfg = scan_config(values)
    run = Run("verify", values, out_dir)
    checks = verify.run_all(cfg)
    for c in checks:
        print(c.line())
    write_json(run.path("verify.json"), {"fingerprint": run.fingerprint, "checks": verify.as_dicts(checks)})
    ok = all(c.passed for c in checks)
    run.finish("ok" if ok else "failed")
    return EXIT_OK if ok else EXIT_NUMERIC


COMMANDS = {
    "derive": cmd_derive,
    "integrate": cmd_integrate,
    "scan": cmd_scan,
    "spectrum": cmd_spectrum,
    "figure2": cmd_figure2,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--out", help="output directory (default: $SUSUSY_OUT_DIR or ./sususy-out)")
    common.add_argument("--seed-source", help="minus2x | eq17:lambda=V | csv:PATH")
    common.add_argument("--lambda", dest="lam", help="lambda of the Abraham-Moses comparison potential")
    common.add_argument("--beta0", help="beta(0)")
    common.add_argument("--dbeta0", help="beta'(0) (default: the curve value for beta(0))")
    common.add_argument("--kmax", help="number of eigenvalues")
    common.add_argument("--grid", help="scan grid NBxND, e.g. 45x60")
    common.add_argument("--window", help="scan window bmin,bmax,dbmin,dbmax")
    common.add_argument("--jobs", help="worker processes for scans")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="sususy", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"sususy {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("derive", parents=[common], help="V, Vtilde, gamma and residuals from a beta source")
    sub.add_parser("integrate", parents=[common], help="integrate the beta equation from (beta0, dbeta0)")
    sub.add_parser("scan", parents=[common], help="classify the initial-condition plane")
    sub.add_parser("spectrum", parents=[common], help="compare spectra of Vtilde+4, AM and x^2")
    fig2 = sub.add_parser("figure2", parents=[common], help="gallery of partner potentials")
    fig2.add_argument("--dbeta-list", help="comma-separated beta'(0) values")
    sub.add_parser("verify", parents=[common], help="run all residual and isospectrality checks")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out_dir = args.out or os.environ.get("SUSUSY_OUT_DIR") or "sususy-out"
    try:
        values = resolve_config(args)
        scan_config(values)
        return COMMANDS[args.command](values, out_dir)
    except (ConfigError, UsageError) as exc:
        print(f"sususy {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailure as exc:
        print(f"sususy {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
