"""复合 Gauss-Legendre 求积"""

import math

import numpy as np
import pytest

from gfcalc.services.quadrature import adaptive_integral, fixed_integral, graded_breaks
from gfcalc.utils.exceptions import ParameterValidationError, QuadratureDepthError


def test_graded_breaks_cover_reference_interval():
    breaks = graded_breaks()
    assert breaks[0] == -1.0 and breaks[-1] == 1.0
    assert all(b > a for a, b in zip(breaks, breaks[1:]))


def test_fixed_integral_is_vectorized():
    result = fixed_integral(np.cos, np.array([0.0, 0.0]), np.array([math.pi / 2, math.pi]))
    assert result == pytest.approx([1.0, 0.0], abs=1e-12)


def test_adaptive_integral_polynomial():
    assert adaptive_integral(lambda x: x**4, -1.0, 2.0) == pytest.approx(33.0 / 5.0)


def test_adaptive_integral_with_critical_window():
    value = adaptive_integral(lambda x: np.exp(-((x / 1e-3) ** 2)), -1.0, 1.0, critical=[(-0.01, 0.01)])
    assert value == pytest.approx(1e-3 * math.sqrt(math.pi), rel=1e-8)


def test_empty_interval_is_zero():
    assert adaptive_integral(np.sin, 1.0, 1.0) == 0.0


def test_reversed_bounds_rejected():
    with pytest.raises(ParameterValidationError):
        adaptive_integral(np.sin, 1.0, 0.0)


def test_depth_exhaustion_raises():
    with pytest.raises(QuadratureDepthError):
        adaptive_integral(lambda x: np.sign(x - 0.1), -1.0 / 3.0, 1.0, tol=1e-15, max_depth=2)
