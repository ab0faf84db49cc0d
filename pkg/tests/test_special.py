import math

import mpmath
import numpy as np
import pytest
from scipy.integrate import quad

from sususy.special import HALF_SQRT_PI, am_correction, check_lambda, gauss_integral

# independent quadrature of exp(-y^2) on [0, 1]
GAUSS_0_1 = 0.746824132812427


def test_gauss_integral_matches_quadrature_oracle():
    oracle, _ = quad(lambda y: math.exp(-y * y), 0.0, 1.0, epsabs=1e-14, epsrel=1e-14)
    assert oracle == pytest.approx(GAUSS_0_1, abs=1e-14)
    assert abs(gauss_integral(1.0) - GAUSS_0_1) <= 1e-12


@pytest.mark.parametrize("x", [-6.0, -2.5, -0.3, 0.0, 0.7, 3.0, 8.0])
def test_gauss_integral_scalar_and_array_agree_with_quad(x):
    oracle, _ = quad(lambda y: math.exp(-y * y), 0.0, x, epsabs=1e-14)
    assert abs(gauss_integral(x) - oracle) <= 1e-12
    assert abs(gauss_integral(np.array([x]))[0] - oracle) <= 1e-12


def test_gauss_integral_limit():
    assert gauss_integral(40.0) == pytest.approx(HALF_SQRT_PI, abs=1e-15)


@pytest.mark.parametrize("lam", [1.5, 2.0, -2.0, 5.0])
@pytest.mark.parametrize("x", [-1.7, 0.0, 0.4, 2.2])
def test_am_correction_derivatives_against_mpmath(lam, x):
    mpmath.mp.dps = 30

    def g(t):
        return mpmath.e ** (-t * t) / (lam + mpmath.quad(lambda y: mpmath.e ** (-y * y), [0, t]))

    got = am_correction(lam, x)
    for order in range(3):
        assert got[order] == pytest.approx(float(mpmath.diff(g, x, order)), rel=1e-11, abs=1e-13)


@pytest.mark.parametrize("lam", [0.0, 0.8, -0.8, HALF_SQRT_PI])
def test_lambda_bound_rejected(lam):
    with pytest.raises(ValueError):
        check_lambda(lam)
