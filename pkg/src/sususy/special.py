"""Gaussian integral helpers shared by the particular solutions and the AM potentials."""

import math

import numpy as np
from scipy.special import erf

HALF_SQRT_PI = 0.5 * math.sqrt(math.pi)


def gauss_integral(x):
    """Integral of exp(-y**2) from 0 to x (scalar or array)."""
    if np.ndim(x) == 0:
        return HALF_SQRT_PI * math.erf(float(x))
    return HALF_SQRT_PI * erf(np.asarray(x, dtype=float))


def check_lambda(lam: float) -> None:
    """The denominator lam + gauss_integral(x) vanishes somewhere unless |lam| > sqrt(pi)/2."""
    if not abs(lam) > HALF_SQRT_PI:
        raise ValueError(f"|lambda| must exceed sqrt(pi)/2 = {HALF_SQRT_PI:.6f}, got {lam}")


def am_correction(lam: float, x):
    """Return (g, g', g'') for g(x) = exp(-x^2) / (lam + F(x)), F the Gaussian integral.

    All three are closed forms; with D = lam + F we have D' = exp(-x^2) and
    g = e/D, g' = -2x g - g^2, g'' = -2 g - 2x g' - 2 g g'.
    """
    x = np.asarray(x, dtype=float) if np.ndim(x) else float(x)
    e = np.exp(-x * x)
    g = e / (lam + gauss_integral(x))
    g1 = -2.0 * x * g - g * g
    g2 = -2.0 * g - 2.0 * x * g1 - 2.0 * g * g1
    return g, g1, g2
