"""The nonlinear beta equation for the oscillator (c = 1, delta = 4).

    beta beta'' - beta'^2/2 - 2 beta^2 beta' + beta^4/2 - 4 beta^2 - 2 x^2 beta^2 + 2 = 0

Initial points (beta(0), beta'(0)) are integrated outwards from x = 0 in two
sweeps.  A sweep ends early when beta' exceeds the blow-up cap (a pole of the
partner potential x^2 + 2 beta'), when |beta| drops below the floor, or when
the adaptive step collapses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.interpolate import BPoly, CubicSpline

from .config import ScanConfig
from .integrator import StageError, sweep
from .operators import ClosedFormBeta
from .special import HALF_SQRT_PI, am_correction, check_lambda

CURVE_BOUND = 2.0 / math.sqrt(math.pi)
REGULAR = "regular"
SINGULAR = "singular"


class BetaFloorError(StageError, ValueError):
    """|beta| below the floor: the equation cannot be solved for beta''."""


class InitialPoint(NamedTuple):
    beta0: float
    dbeta0: float


def numerator(x: float, beta: float, dbeta: float) -> float:
    b2 = beta * beta
    # grouped so the large beta^2 terms cancel before they meet the O(1) ones
    return 0.5 * dbeta * dbeta - 2.0 + b2 * (2.0 * dbeta - 0.5 * b2 + 4.0 + 2.0 * x * x)


def rhs(x: float, beta: float, dbeta: float, beta_floor: float = 1e-8) -> float:
    """beta'' solved from the beta equation."""
    if abs(beta) < beta_floor:
        raise BetaFloorError(f"|beta| = {abs(beta):.3g} below floor at x = {x}")
    return numerator(x, beta, dbeta) / beta


def beta_equation_lhs(x, beta, dbeta, d2beta):
    """Left side of the beta equation; vanishes on solutions."""
    b2 = beta * beta
    return beta * d2beta - 0.5 * dbeta * dbeta + 2.0 + b2 * (0.5 * b2 - 2.0 * dbeta - 4.0 - 2.0 * x * x)


# -- closed-form oracles --------------------------------------------------


def beta_particular(lam: float, x):
    """Particular solution -2x - exp(-x^2)/(lam + F(x)) and its derivative."""
    check_lambda(lam)
    g, g1, _ = am_correction(lam, x)
    return -2.0 * x - g, -2.0 - g1


def particular_beta(lam: float) -> ClosedFormBeta:
    check_lambda(lam)
    return ClosedFormBeta(
        f=lambda x: -2.0 * x - am_correction(lam, x)[0],
        df=lambda x: -2.0 - am_correction(lam, x)[1],
        d2f=lambda x: -am_correction(lam, x)[2],
        label=f"eq17:lambda={lam:g}",
    )


def initial_curve(beta0: float) -> float:
    """beta'(0) of the particular solution with the given beta(0)."""
    if not abs(beta0) < CURVE_BOUND:
        raise ValueError(f"|beta0| must be below 2/sqrt(pi) = {CURVE_BOUND:.6f}, got {beta0}")
    return -2.0 + beta0 * beta0


def lambda_for_beta0(beta0: float) -> float:
    """Inverse of beta_p(0) = -1/lam; beta0 = 0 maps to lam = inf."""
    if not abs(beta0) < CURVE_BOUND:
        raise ValueError(f"|beta0| must be below 2/sqrt(pi), got {beta0}")
    return math.inf if beta0 == 0.0 else -1.0 / beta0


# -- numeric solutions ----------------------------------------------------


@dataclass(frozen=True, eq=False)
class BetaSolution:
    """Samples (x, beta, beta') at accepted steps, sorted by x.

    ``status`` is "regular" when both sweeps reached +-x_max; otherwise
    ``x_sing`` is the located singularity nearest to the origin and ``side``
    the sweep ("left"/"right") that hit it.
    """

    x: np.ndarray
    beta: np.ndarray
    dbeta: np.ndarray
    status: str
    x_sing: Optional[float] = None
    side: Optional[str] = None
    reason: Optional[str] = None
    config_fingerprint: str = ""
    beta_floor: float = 1e-8

    @property
    def regular(self) -> bool:
        return self.status == REGULAR

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.x[0]), float(self.x[-1])

    def provider(self) -> "SplineBeta":
        if not self.regular:
            raise ValueError("singular solution: no beta provider over the window")
        return SplineBeta(self)

    def to_csv(self, path, extra_header: Optional[dict] = None) -> None:
        from .io import write_csv

        meta = {"status": self.status, "config_fingerprint": self.config_fingerprint}
        if not self.regular:
            meta.update(x_sing=f"{self.x_sing:.17g}", side=self.side, reason=self.reason)
        meta["beta_floor"] = f"{self.beta_floor:.17g}"
        meta.update(extra_header or {})
        write_csv(path, ["x", "beta", "dbeta"], [self.x, self.beta, self.dbeta], meta)

    @classmethod
    def from_csv(cls, path) -> "BetaSolution":
        from .io import read_csv

        meta, cols = read_csv(path)
        for name in ("x", "beta", "dbeta"):
            if name not in cols:
                raise ValueError(f"{path}: missing column {name!r}")
        status = meta.get("status", REGULAR)
        if status not in (REGULAR, SINGULAR):
            raise ValueError(f"{path}: bad status {status!r}")
        x_sing = float(meta["x_sing"]) if "x_sing" in meta else None
        return cls(x=cols["x"], beta=cols["beta"], dbeta=cols["dbeta"], status=status,
                   x_sing=x_sing, side=meta.get("side"), reason=meta.get("reason"),
                   config_fingerprint=meta.get("config_fingerprint", ""),
                   beta_floor=float(meta.get("beta_floor", 1e-8)))


class SplineBeta:
    """beta, beta', beta'' from a regular BetaSolution.

    A quintic Hermite interpolant matches beta, beta' and beta'' at every
    sample; beta'' at the samples comes from the equation itself except next
    to zeros of beta, where the spline derivative of beta' is used instead.
    """

    kind = "spline"

    def __init__(self, sol: BetaSolution, near_zero: float = 1e-3):
        x, b, b1 = sol.x, sol.beta, sol.dbeta
        b2 = CubicSpline(x, b1)(x, 1)
        ok = np.abs(b) > near_zero
        b2[ok] = [rhs(xi, bi, di) for xi, bi, di in zip(x[ok], b[ok], b1[ok])]
        self._poly = BPoly.from_derivatives(x, np.column_stack([b, b1, b2]))
        self.domain = sol.domain
        self.label = "beta-solution"

    def _check(self, x):
        lo, hi = self.domain
        if np.any(np.asarray(x) < lo - 1e-12) or np.any(np.asarray(x) > hi + 1e-12):
            raise ValueError(f"x outside the integrated window [{lo}, {hi}]")

    def _eval(self, x, nu):
        self._check(x)
        y = self._poly(x, nu)
        return float(y) if np.ndim(x) == 0 else y

    def beta(self, x):
        return self._eval(x, 0)

    def dbeta(self, x):
        return self._eval(x, 1)

    def d2beta(self, x):
        return self._eval(x, 2)


def _start(p: InitialPoint, cfg: ScanConfig, direction: float):
    """Starting state for a sweep; None when beta(0) = 0 is a genuine singularity.

    At beta = 0 the equation reads 0 * beta'' = beta'^2/2 - 2, so a solution can
    only pass through with beta' = +-2, and beta''(0) is then undetermined.
    We take beta''(0) = 0 (the choice that keeps the odd solution -2x odd) and
    step off the origin with the Taylor polynomial.
    """
    b0, db0 = p
    if abs(b0) >= cfg.beta_floor:
        return 0.0, b0, db0
    if abs(numerator(0.0, 0.0, db0)) > 1e-10:
        return None
    eps = direction * cfg.start_offset
    return eps, b0 + eps * db0, db0


def integrate(p: InitialPoint, cfg: ScanConfig = ScanConfig()) -> BetaSolution:
    """Integrate the beta equation from x = 0 to +-cfg.x_max."""
    cfg.validate()
    p = InitialPoint(float(p[0]), float(p[1]))
    floor, cap = cfg.beta_floor, cfg.blowup_cap

    def f(x, b, db):
        return rhs(x, b, db, floor)

    def stop(x, b, db):
        if abs(db) > cap or not math.isfinite(db):
            return "blowup"
        if abs(b) < floor:
            return "beta_floor"
        return None

    pieces = {}
    singular = []
    for side, direction in (("right", 1.0), ("left", -1.0)):
        start = _start(p, cfg, direction)
        if start is None:
            singular.append((0.0, side, "beta_floor"))
            pieces[side] = ([0.0], [p.beta0], [p.dbeta0])
            continue
        x0, b0, db0 = start
        res = sweep(f, x0, b0, db0, direction * cfg.x_max, rtol=cfg.rtol, atol=cfg.atol,
                    h_max=cfg.max_step, h_min=cfg.step_floor, h0=min(1e-3, cfg.max_step),
                    stop_check=stop)
        xs, ys, dys = res.xs, res.ys, res.dys
        if x0 != 0.0:
            xs, ys, dys = [0.0] + xs, [p.beta0] + ys, [p.dbeta0] + dys
        pieces[side] = (xs, ys, dys)
        if res.stop is not None:
            x_last, db_last = xs[-1], dys[-1]
            x_sing = x_last
            if res.stop == "blowup" and math.isfinite(db_last):
                # near a pole beta' ~ 1/(x - x_pole)^2
                x_sing = x_last + direction / math.sqrt(abs(db_last))
            singular.append((x_sing, side, res.stop))

    rx, rb, rdb = pieces["right"]
    lx, lb, ldb = pieces["left"]
    x = np.array(lx[:0:-1] + rx)
    beta = np.array(lb[:0:-1] + rb)
    dbeta = np.array(ldb[:0:-1] + rdb)
    common = dict(x=x, beta=beta, dbeta=dbeta, config_fingerprint=cfg.fingerprint(),
                  beta_floor=floor)
    if not singular:
        return BetaSolution(status=REGULAR, **common)
    x_sing, side, reason = min(singular, key=lambda s: (abs(s[0]), s[1] != "right"))
    return BetaSolution(status=SINGULAR, x_sing=float(x_sing), side=side, reason=reason, **common)


def residual_eq16(sol: BetaSolution, n_probe: int = 4001, window: Optional[tuple[float, float]] = None) -> float:
    """Sup-norm of the equation's left side along a regular trajectory.

    beta and beta' are interpolated by independent cubic splines and beta''
    is the derivative of the beta' spline, so the check does not reuse the
    right-hand side the integrator was driven by.
    """
    if not sol.regular:
        raise ValueError("residual_eq16 needs a regular solution")
    lo, hi = window or sol.domain
    probe = np.linspace(lo, hi, n_probe)
    b = CubicSpline(sol.x, sol.beta)(probe)
    s1 = CubicSpline(sol.x, sol.dbeta)
    return float(np.max(np.abs(beta_equation_lhs(probe, b, s1(probe), s1(probe, 1)))))


def beta_particular_d2(lam: float, x):
    check_lambda(lam)
    return -am_correction(lam, x)[2]


__all__ = [
    "BetaFloorError", "BetaSolution", "CURVE_BOUND", "HALF_SQRT_PI", "InitialPoint",
    "REGULAR", "SINGULAR", "SplineBeta", "beta_particular", "beta_particular_d2",
    "beta_equation_lhs", "initial_curve", "integrate", "lambda_for_beta0", "numerator",
    "particular_beta", "residual_eq16", "rhs",
]
