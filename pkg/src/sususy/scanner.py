"""Regular/singular classification of the (beta(0), beta'(0)) plane."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .beta_ode import CURVE_BOUND, InitialPoint, initial_curve, integrate
from .config import ScanConfig
from .io import fmt, write_csv, write_json

log = logging.getLogger(__name__)

UP, DOWN = "up", "down"
FIRST_STEP = 0.01


class ThresholdNotFound(RuntimeError):
    """No singular point between the seed and the window edge."""


class Classification(NamedTuple):
    regular: bool
    x_sing: Optional[float] = None

    @property
    def label(self) -> str:
        return "regular" if self.regular else "singular"


def classify_point(p: InitialPoint, cfg: ScanConfig, confirm: bool = False) -> Classification:
    """Regular/Singular verdict for one initial point.

    With ``confirm`` a Regular verdict must be reproduced at 10x tighter
    tolerances.  Trajectories that graze beta = 0 (where beta'' is undetermined)
    can be misclassified by integration error alone, and bisection would
    otherwise lock onto such isolated points.
    """
    sol = integrate(p, cfg)
    if confirm and sol.regular:
        sol = integrate(p, cfg.replace(rtol=cfg.rtol / 10, atol=cfg.atol / 10))
    return Classification(sol.regular, sol.x_sing)


def threshold_bisect(beta0: float, direction: str, cfg: ScanConfig) -> float:
    """beta'(0) where the classification flips, searching away from the curve point.

    Steps outwards from the curve value by doubling increments until a singular
    point is met (clamped to the plane window), then bisects the bracket down
    to ``cfg.bisect_tol`` and returns its midpoint.  Regular verdicts are
    confirmed at tighter tolerance (see :func:`classify_point`).
    """
    if direction not in (UP, DOWN):
        raise ValueError(f"direction must be 'up' or 'down', got {direction!r}")
    seed = initial_curve(beta0)
    if not classify_point(InitialPoint(beta0, seed), cfg, confirm=True).regular:
        raise ThresholdNotFound(f"curve point ({beta0}, {seed}) is not regular")
    sign = 1.0 if direction == UP else -1.0
    edge = cfg.dbeta_max if direction == UP else cfg.dbeta_min
    if sign * (edge - seed) <= 0:
        raise ThresholdNotFound(f"curve point {seed} lies outside the window")

    inner, step = seed, FIRST_STEP
    while True:
        trial = seed + sign * step
        if sign * (trial - edge) >= 0:
            trial = edge
        if not classify_point(InitialPoint(beta0, trial), cfg, confirm=True).regular:
            outer = trial
            break
        if trial == edge:
            raise ThresholdNotFound(
                f"beta0={beta0}: still regular at the window edge beta'(0)={edge}")
        inner, step = trial, 2.0 * step

    while abs(outer - inner) > cfg.bisect_tol:
        mid = 0.5 * (inner + outer)
        if classify_point(InitialPoint(beta0, mid), cfg, confirm=True).regular:
            inner = mid
        else:
            outer = mid
    return 0.5 * (inner + outer)


def cell_centers(cfg: ScanConfig) -> tuple[np.ndarray, np.ndarray]:
    def centers(lo, hi, n):
        return lo + (np.arange(n) + 0.5) * (hi - lo) / n

    return (centers(cfg.beta_min, cfg.beta_max, cfg.n_beta),
            centers(cfg.dbeta_min, cfg.dbeta_max, cfg.n_dbeta))


@dataclass
class ColumnThresholds:
    column: int
    beta0: float
    lower: Optional[float] = None
    upper: Optional[float] = None
    note: str = ""

    @property
    def complete(self) -> bool:
        return self.lower is not None and self.upper is not None


@dataclass
class RegionMap:
    config: ScanConfig
    beta0: np.ndarray
    dbeta0: np.ndarray
    regular: np.ndarray  # bool, shape (n_beta, n_dbeta)
    x_sing: np.ndarray  # nan where regular
    thresholds: list[ColumnThresholds] = field(default_factory=list)

    @property
    def fingerprint(self) -> str:
        return self.config.fingerprint()

    def brackets(self) -> list[ColumnThresholds]:
        return [t for t in self.thresholds if t.complete]

    def to_csv(self, path, meta: Optional[dict] = None) -> None:
        bb, dd = np.meshgrid(self.beta0, self.dbeta0, indexing="ij")
        label = np.where(self.regular, "regular", "singular")
        write_csv(
            path,
            ["beta0", "dbeta0", "label", "x_sing"],
            [bb.ravel(), dd.ravel(), label.ravel(),
             [fmt(v) if math.isfinite(v) else "" for v in self.x_sing.ravel()]],
            {"fingerprint": self.fingerprint, "kind": "region-map", **(meta or {})},
        )

    def to_dict(self) -> dict:
        return {
            "kind": "region-map",
            "fingerprint": self.fingerprint,
            "config": self.config.numeric_dict(),
            "beta0_centers": self.beta0.tolist(),
            "dbeta0_centers": self.dbeta0.tolist(),
            "counts": {"regular": int(self.regular.sum()),
                       "singular": int((~self.regular).sum())},
            "thresholds": [
                {"column": t.column, "beta0": t.beta0, "lower": t.lower,
                 "upper": t.upper, "note": t.note}
                for t in self.thresholds
            ],
        }

    def to_json(self, path, extra: Optional[dict] = None) -> None:
        write_json(path, {**self.to_dict(), **(extra or {})})


def _classify_cell(args):
    p, cfg = args
    c = classify_point(p, cfg)
    return c.regular, (math.nan if c.x_sing is None else c.x_sing)


def _column_thresholds(args) -> ColumnThresholds:
    col, beta0, cfg = args
    out = ColumnThresholds(col, float(beta0))
    if not abs(beta0) < CURVE_BOUND:
        out.note = "no curve point in this column"
        return out
    seed = initial_curve(beta0)
    if not cfg.dbeta_min < seed < cfg.dbeta_max:
        out.note = "curve point outside the window"
        return out
    notes = []
    for direction in (DOWN, UP):
        try:
            value = threshold_bisect(beta0, direction, cfg)
        except ThresholdNotFound as exc:
            notes.append(str(exc))
            continue
        setattr(out, "lower" if direction == DOWN else "upper", value)
    if out.complete and out.upper - out.lower <= 2.0 * cfg.bisect_tol:
        # beta(0) ~ 0: only beta'(0) = -2 is regular, the band has no interior
        notes.append("degenerate band narrower than the bisection tolerance")
        out.lower = out.upper = None
    out.note = "; ".join(notes)
    return out


def _map(fn, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves input order; completion order cannot leak into results
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (8 * workers))))


def scan_region(cfg: ScanConfig = ScanConfig(), workers: Optional[int] = None) -> RegionMap:
    workers = workers or cfg.workers
    beta0, dbeta0 = cell_centers(cfg)
    tasks = [(InitialPoint(float(b), float(d)), cfg) for b in beta0 for d in dbeta0]
    log.info("classifying %d cells with %d worker(s)", len(tasks), workers)
    results = _map(_classify_cell, tasks, workers)
    shape = (cfg.n_beta, cfg.n_dbeta)
    regular = np.array([r for r, _ in results], dtype=bool).reshape(shape)
    x_sing = np.array([x for _, x in results], dtype=float).reshape(shape)
    thresholds = _map(_column_thresholds, [(i, float(b), cfg) for i, b in enumerate(beta0)], workers)
    rm = RegionMap(cfg, beta0, dbeta0, regular, x_sing, thresholds)
    if not rm.brackets():
        log.warning("no threshold brackets: no usable curve point inside the window")
    return rm


def curve_points(n: int, beta_abs_max: float = 1.0) -> list[InitialPoint]:
    """n evenly spaced points of the initial-condition curve with |beta0| <= beta_abs_max."""
    if not 0 < beta_abs_max < CURVE_BOUND:
        raise ValueError("beta_abs_max must lie in (0, 2/sqrt(pi))")
    return [InitialPoint(float(b), initial_curve(float(b)))
            for b in np.linspace(-beta_abs_max, beta_abs_max, n)]
