"""Adaptive Dormand-Prince 5(4) stepper for second-order scalar ODEs.

The state is the pair (y, y') and the right-hand side returns y''.  Everything
runs on plain Python floats; the systems integrated here are two-dimensional
and numpy call overhead would dominate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional


class StageError(ArithmeticError):
    """Raised by a right-hand side that cannot be evaluated at a stage point."""


# Dormand-Prince 5(4) tableau.
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# fifth-order minus embedded fourth-order weights
E1 = 71 / 57600
E3 = -71 / 16695
E4 = 71 / 1920
E5 = -17253 / 339200
E6 = 22 / 525
E7 = -1 / 40

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


@dataclass
class SweepResult:
    xs: list = field(default_factory=list)
    ys: list = field(default_factory=list)
    dys: list = field(default_factory=list)
    stop: Optional[str] = None  # None when x_end was reached
    n_steps: int = 0
    n_rejected: int = 0


def sweep(
    f: Callable[[float, float, float], float],
    x0: float,
    y0: float,
    dy0: float,
    x_end: float,
    *,
    rtol: float,
    atol: float,
    h_max: float,
    h_min: float,
    h0: float = 1e-3,
    stop_check: Optional[Callable[[float, float, float], Optional[str]]] = None,
) -> SweepResult:
    """Integrate y'' = f(x, y, y') from x0 towards x_end.

    Accepted steps are recorded (the starting point included).  ``stop_check``
    is called on every accepted state and may return a reason string that ends
    the sweep early; a step size collapsing below ``h_min`` ends it with reason
    ``"step_floor"``.  Stage failures (:class:`StageError`) shrink the step.
    """
    direction = 1.0 if x_end >= x0 else -1.0
    span = abs(x_end - x0)
    res = SweepResult(xs=[x0], ys=[y0], dys=[dy0])
    if span == 0.0:
        return res
    x, y, dy = x0, y0, dy0
    h = min(h0, h_max, span)
    try:
        k1 = f(x, y, dy)
    except StageError:
        res.stop = "stage"
        return res
    # state derivative is (dy, f); k*_y are the y-components, k*_d the y'-ones
    while True:
        remaining = abs(x_end - x)
        if remaining <= 1e-14 * max(1.0, abs(x_end)):
            break
        last = h >= remaining
        if last:
            h = remaining
        s = direction * h
        try:
            y2 = y + s * A21 * dy
            d2 = dy + s * A21 * k1
            k2 = f(x + C2 * s, y2, d2)
            y3 = y + s * (A31 * dy + A32 * d2)
            d3 = dy + s * (A31 * k1 + A32 * k2)
            k3 = f(x + C3 * s, y3, d3)
            y4 = y + s * (A41 * dy + A42 * d2 + A43 * d3)
            d4 = dy + s * (A41 * k1 + A42 * k2 + A43 * k3)
            k4 = f(x + C4 * s, y4, d4)
            y5 = y + s * (A51 * dy + A52 * d2 + A53 * d3 + A54 * d4)
            d5 = dy + s * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4)
            k5 = f(x + C5 * s, y5, d5)
            y6 = y + s * (A61 * dy + A62 * d2 + A63 * d3 + A64 * d4 + A65 * d5)
            d6 = dy + s * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5)
            k6 = f(x + s, y6, d6)
            yn = y + s * (B1 * dy + B3 * d3 + B4 * d4 + B5 * d5 + B6 * d6)
            dn = dy + s * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
            k7 = f(x + s, yn, dn)
        except (StageError, OverflowError, ZeroDivisionError):
            res.n_rejected += 1
            h *= 0.5
            if h < h_min:
                res.stop = "step_floor"
                break
            continue
        ey = s * (E1 * dy + E3 * d3 + E4 * d4 + E5 * d5 + E6 * d6 + E7 * dn)
        ed = s * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        sy = atol + rtol * max(abs(y), abs(yn))
        sd = atol + rtol * max(abs(dy), abs(dn))
        err = math.sqrt(0.5 * ((ey / sy) ** 2 + (ed / sd) ** 2))
        if not math.isfinite(err):
            res.n_rejected += 1
            h *= MIN_FACTOR
            if h < h_min:
                res.stop = "step_floor"
                break
            continue
        if err <= 1.0:
            x = x_end if last else x + s
            y, dy, k1 = yn, dn, k7
            res.xs.append(x)
            res.ys.append(y)
            res.dys.append(dy)
            res.n_steps += 1
            if stop_check is not None:
                reason = stop_check(x, y, dy)
                if reason is not None:
                    res.stop = reason
                    break
            factor = MAX_FACTOR if err == 0.0 else min(MAX_FACTOR, SAFETY * err ** -0.2)
            h = min(h * factor, h_max)
        else:
            res.n_rejected += 1
            h *= max(MIN_FACTOR, SAFETY * err ** -0.2)
            if h < h_min:
                res.stop = "step_floor"
                break
    return res
