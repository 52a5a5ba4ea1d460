import math

import numpy as np
import pytest

from errors import InvalidParametersError, QuadratureError
from function_catalog import TestFunction, get_function, monomial
from quadrature import QuadratureMethod, QuadratureSpec, integrate_interval, integrate_intervals


@pytest.mark.parametrize("method", list(QuadratureMethod))
def test_inv_quad_every_method(method):
    f = get_function("inv_quad")
    if method is QuadratureMethod.EXACT_POLYNOMIAL:
        pytest.skip("inv_quad is not a polynomial")
    value = integrate_interval(f, 0.0, 2.0, QuadratureSpec(method, tolerance=1e-12, order=40))
    assert value == pytest.approx(math.atan(2.0), abs=1e-11)


def test_default_picks_closed_form():
    assert QuadratureSpec.for_function(get_function("sin")).method is QuadratureMethod.CLOSED_FORM
    assert QuadratureSpec.for_function(monomial(3)).method is QuadratureMethod.EXACT_POLYNOMIAL


def test_exact_polynomial_is_exact():
    value = integrate_interval(monomial(4), 1.0, 3.0, QuadratureSpec(QuadratureMethod.EXACT_POLYNOMIAL))
    assert value == pytest.approx((3.0 ** 5 - 1.0) / 5.0, rel=1e-15)


def test_gauss_exact_for_low_degree():
    spec = QuadratureSpec(QuadratureMethod.GAUSS, order=3)
    assert integrate_interval(monomial(5), 0.0, 1.0, spec) == pytest.approx(1.0 / 6.0, rel=1e-14)


def test_vector_of_intervals():
    lo = np.array([0.0, 1.0, 2.0])
    values = integrate_intervals(get_function("exp_neg"), lo, lo + 1.0, QuadratureSpec())
    expected = np.exp(-lo) - np.exp(-(lo + 1.0))
    np.testing.assert_allclose(values, expected, rtol=1e-10)


def test_degenerate_interval_is_zero():
    assert integrate_interval(get_function("sin"), 1.0, 1.0) == 0.0


def test_reversed_limits_rejected():
    with pytest.raises(InvalidParametersError):
        integrate_interval(get_function("sin"), 2.0, 1.0)


def test_method_must_fit_function():
    with pytest.raises(InvalidParametersError):
        integrate_interval(get_function("sin"), 0.0, 1.0, QuadratureSpec(QuadratureMethod.EXACT_POLYNOMIAL))
    bare = TestFunction(name="bare", evaluate=np.cos)
    with pytest.raises(InvalidParametersError):
        integrate_interval(bare, 0.0, 1.0, QuadratureSpec(QuadratureMethod.CLOSED_FORM))


def test_spec_validation():
    with pytest.raises(InvalidParametersError):
        QuadratureSpec(tolerance=0.0)
    with pytest.raises(InvalidParametersError):
        QuadratureSpec(order=0)
    assert QuadratureSpec("gauss").method is QuadratureMethod.GAUSS


def test_adaptive_failure_raises():
    # sin(1/|t-0.5|) oscillates without bound near 0.5
    wild = TestFunction(name="wild", evaluate=lambda t: np.sin(1.0 / np.maximum(np.abs(t - 0.5), 1e-300)))
    with pytest.raises(QuadratureError) as info:
        integrate_interval(wild, 0.0, 1.0, QuadratureSpec(QuadratureMethod.ADAPTIVE, tolerance=1e-14))
    assert info.value.lo == 0.0 and info.value.hi == 1.0
