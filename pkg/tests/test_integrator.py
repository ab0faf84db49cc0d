import math

import pytest

from sususy.integrator import StageError, sweep


def harmonic(x, y, dy):
    return -y


@pytest.mark.parametrize("rtol", [1e-6, 1e-9, 1e-12])
def test_sine_is_reproduced(rtol):
    res = sweep(harmonic, 0.0, 0.0, 1.0, 10.0, rtol=rtol, atol=rtol, h_max=0.5, h_min=1e-14)
    assert res.stop is None
    assert res.xs[-1] == 10.0
    err = max(abs(y - math.sin(x)) for x, y in zip(res.xs, res.ys))
    assert err < 200 * rtol


def test_backward_sweep_is_monotone():
    res = sweep(harmonic, 0.0, 1.0, 0.0, -3.0, rtol=1e-10, atol=1e-12, h_max=0.1, h_min=1e-14)
    assert all(b < a for a, b in zip(res.xs, res.xs[1:]))
    assert res.ys[-1] == pytest.approx(math.cos(3.0), abs=1e-8)


def test_max_step_respected():
    res = sweep(harmonic, 0.0, 0.0, 1.0, 2.0, rtol=1e-3, atol=1e-3, h_max=0.05, h_min=1e-14)
    assert max(b - a for a, b in zip(res.xs, res.xs[1:])) <= 0.05 + 1e-15


def test_stop_check_ends_sweep():
    res = sweep(harmonic, 0.0, 0.0, 1.0, 10.0, rtol=1e-8, atol=1e-10, h_max=0.1, h_min=1e-14,
                stop_check=lambda x, y, dy: "hit" if y > 0.9 else None)
    assert res.stop == "hit"
    assert res.ys[-1] > 0.9
    assert res.xs[-1] < math.pi / 2


def test_pole_collapses_step():
    # y = 1/(1 - x) solves y'' = 2 y^3 with a pole at x = 1
    res = sweep(lambda x, y, dy: 2.0 * y ** 3, 0.0, 1.0, 1.0, 2.0, rtol=1e-10, atol=1e-12,
                h_max=0.1, h_min=1e-12, stop_check=lambda x, y, dy: "blowup" if abs(dy) > 1e6 else None)
    assert res.stop == "blowup"
    assert 1.0 - 2e-3 < res.xs[-1] < 1.0


def test_stage_errors_shrink_the_step_until_floor():
    def f(x, y, dy):
        if x > 0.5:
            raise StageError
        return 0.0

    res = sweep(f, 0.0, 0.0, 1.0, 1.0, rtol=1e-8, atol=1e-8, h_max=0.1, h_min=1e-9)
    assert res.stop == "step_floor"
    assert res.xs[-1] == pytest.approx(0.5, abs=1e-8)
