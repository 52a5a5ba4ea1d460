import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from baskakov_basis import (
    ORACLE_POLICY,
    OperatorParams,
    SeriesPolicy,
    basis_weight,
    basis_weight_reference,
    basis_weights,
    count_cumulants,
    log_p_coeff,
    p_coeff,
    pochhammer_rising,
    truncated_weights,
    truncation_index,
)
from errors import InvalidParametersError, TailNotAbsorbedError


class TestParams:
    def test_rejects_non_positive_n(self):
        with pytest.raises(InvalidParametersError):
            OperatorParams(0)

    def test_rejects_bool_n(self):
        with pytest.raises(InvalidParametersError):
            OperatorParams(True)

    def test_rejects_negative_shape(self):
        with pytest.raises(InvalidParametersError):
            OperatorParams(5, a=-1.0)

    def test_stancu_order_enforced(self):
        with pytest.raises(InvalidParametersError):
            OperatorParams(5, alpha=2.0, beta=1.0)

    def test_stancu_order_override(self):
        p = OperatorParams(5, alpha=2.0, beta=1.0, allow_unordered_stancu=True)
        assert p.scale == 6.0

    def test_numpy_scalars_normalised(self):
        p = OperatorParams(np.int64(4), np.float64(1.0))
        assert type(p.n) is int and type(p.a) is float
        assert p == OperatorParams(4, 1.0)

    def test_policy_validation(self):
        with pytest.raises(InvalidParametersError):
            SeriesPolicy(tail_epsilon=0.0)
        with pytest.raises(InvalidParametersError):
            SeriesPolicy(k_max_hard=0)


class TestCoefficients:
    def test_pochhammer_values(self):
        assert pochhammer_rising(3, 2) == 12
        assert pochhammer_rising(5, 4) == 1680
        assert pochhammer_rising(7, 0) == 1

    def test_pochhammer_log_domain(self):
        assert pochhammer_rising(5, 4, log_domain=True) == pytest.approx(math.log(1680), rel=1e-14)

    def test_pochhammer_overflow_is_signalled(self):
        with pytest.raises(OverflowError):
            pochhammer_rising(100, 400)

    def test_p_coeff_small(self):
        assert p_coeff(2, 1.0, 1) == 3
        assert p_coeff(2, 1.0, 0) == 1

    def test_p_coeff_without_shape_is_pochhammer(self):
        for k in range(8):
            assert p_coeff(4, 0.0, k) == pochhammer_rising(4, k)

    def test_p_coeff_log_matches_linear(self):
        for k in (0, 1, 5, 20):
            assert log_p_coeff(3, 2.5, k) == pytest.approx(math.log(p_coeff(3, 2.5, k)), rel=1e-12)


class TestWeights:
    @pytest.mark.parametrize("n,a,x", [(1, 0.0, 0.5), (5, 1.0, 1.0), (10, 2.0, 3.0), (100, 1.0, 0.2)])
    def test_weight_matches_arbitrary_precision(self, n, a, x):
        p = OperatorParams(n, a)
        for k in (0, 1, 3, 10):
            assert basis_weight(p, k, x) == pytest.approx(float(basis_weight_reference(p, k, x)), rel=1e-11)

    def test_linear_and_log_weight_agree(self):
        p = OperatorParams(6, 1.5)
        for k in range(12):
            assert basis_weight(p, k, 0.7, log_domain=False) == pytest.approx(basis_weight(p, k, 0.7), rel=1e-12)

    def test_weight_at_origin(self):
        p = OperatorParams(3, 2.0)
        assert basis_weight(p, 0, 0.0) == 1.0
        assert basis_weight(p, 4, 0.0) == 0.0

    def test_vector_matches_per_term(self):
        p = OperatorParams(7, 2.0)
        vector = basis_weights(p, 1.3, 30)
        single = [basis_weight(p, k, 1.3) for k in range(31)]
        np.testing.assert_allclose(vector, single, rtol=1e-11, atol=1e-300)

    def test_linear_vector_matches_log_vector(self):
        p = OperatorParams(9, 1.0)
        np.testing.assert_allclose(
            basis_weights(p, 2.0, 60, log_domain=False), basis_weights(p, 2.0, 60), rtol=1e-11, atol=1e-300
        )

    def test_linear_vector_underflow_is_signalled(self):
        with pytest.raises(OverflowError):
            basis_weights(OperatorParams(5000, 0.0), 1e6, 10, log_domain=False)

    def test_negative_x_rejected(self):
        with pytest.raises(InvalidParametersError):
            basis_weight(OperatorParams(3), 0, -0.1)


# the 48 combinations of the partition-of-unity acceptance grid
UNITY_GRID = list(itertools.product((1, 5, 10, 100), (0.0, 1.0, 2.0), ((0.0, 0.0), (1.0, 2.0)), (0.0, 1.0, 5.0, 10.0)))


@pytest.mark.parametrize("n,a,stancu,x", UNITY_GRID)
def test_partition_of_unity(n, a, stancu, x):
    p = OperatorParams(n, a, *stancu)
    total = math.fsum(truncated_weights(p, x))
    assert 1 - 1e-12 <= total <= 1 + 1e-12


@given(
    n=st.integers(min_value=1, max_value=60),
    a=st.floats(min_value=0.0, max_value=3.0),
    x=st.floats(min_value=0.0, max_value=20.0),
)
@settings(max_examples=200, deadline=None)
def test_partition_of_unity_random(n, a, x):
    total = math.fsum(truncated_weights(OperatorParams(n, a), x))
    assert abs(total - 1) <= 1e-12


def test_weights_non_negative():
    w = truncated_weights(OperatorParams(20, 2.0), 4.0)
    assert np.all(w >= 0)


def test_mean_matches_first_cumulant():
    p = OperatorParams(8, 1.5)
    w = truncated_weights(p, 2.0, ORACLE_POLICY)
    mean = math.fsum(np.arange(len(w)) * w)
    assert mean == pytest.approx(count_cumulants(p, 2.0)[0], rel=1e-12)


def test_variance_matches_second_cumulant():
    p = OperatorParams(8, 1.5)
    w = truncated_weights(p, 2.0, ORACLE_POLICY)
    k = np.arange(len(w))
    mean = math.fsum(k * w)
    assert math.fsum((k - mean) ** 2 * w) == pytest.approx(count_cumulants(p, 2.0)[1], rel=1e-10)


def test_truncation_index_grows_with_x():
    p = OperatorParams(10, 1.0)
    assert truncation_index(p, 0.0) == 0
    assert truncation_index(p, 1.0) < truncation_index(p, 10.0)


def test_tail_not_absorbed():
    with pytest.raises(TailNotAbsorbedError) as info:
        truncated_weights(OperatorParams(100), 10.0, SeriesPolicy(k_max_hard=5))
    assert info.value.k_max_hard == 5
    assert info.value.mass < 1


ORACLE_GRID = list(
    itertools.product((1, 5, 10, 100, 1000), ((0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, 2.0), (2.0, 1.0, 3.0)),
                      (0.5, 1.0, 2.0, 4.0, 5.0, 10.0))
)


@pytest.mark.parametrize("n,triple,x", ORACLE_GRID)
def test_tight_tail_is_reached_where_forward_mass_stalls(n, triple, x):
    # 1 - 1e-14 is not reachable by a running sum once rounding sits at 1e-16 per term
    w = truncated_weights(OperatorParams(n, *triple), x, ORACLE_POLICY)
    assert abs(math.fsum(w) - 1) <= 1e-12


def test_growth_weighted_tail_keeps_more_terms():
    p = OperatorParams(1)
    plain = truncated_weights(p, 5.0, ORACLE_POLICY)
    quartic = truncated_weights(p, 5.0, ORACLE_POLICY, order=4)
    assert len(quartic) > len(plain)
    k = np.arange(len(quartic))
    # what the quartic truncation drops is negligible against the fourth moment it carries
    full = basis_weights(p, 5.0, 4 * len(quartic))
    kk = np.arange(len(full))
    assert math.fsum(full * kk ** 4) == pytest.approx(math.fsum(quartic * k ** 4), rel=1e-12)


def test_truncation_index_under_tight_policy():
    # a forward cumsum plateaus below 1 - 1e-14 here; the far-end tail sum does not
    p = OperatorParams(1000, 2.0, 1.0, 3.0)
    w = truncated_weights(p, 10.0, ORACLE_POLICY)
    assert len(w) - 1 == truncation_index(p, 10.0, ORACLE_POLICY)
