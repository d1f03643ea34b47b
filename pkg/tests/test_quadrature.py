import math

import numpy as np
import pytest

from quermass.quadrature import romberg_simpson, sin_power_integral
from quermass.utils import ComputationError


def test_sine_over_half_period():
    assert romberg_simpson(np.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-12)


def test_polynomial():
    assert romberg_simpson(lambda x: x**4, 0.0, 1.0) == pytest.approx(0.2, abs=1e-14)


def test_vectorized_limits():
    out = sin_power_integral(2, np.array([math.pi / 2, math.pi]))
    np.testing.assert_allclose(out, [math.pi / 4, math.pi / 2], atol=1e-12)


def test_zero_width_interval():
    assert sin_power_integral(3, 0.0) == 0.0


def test_non_finite_integrand():
    with np.errstate(divide='ignore', invalid='ignore'):
        with pytest.raises(ComputationError):
            romberg_simpson(lambda x: 1 / x, 0.0, 1.0)
