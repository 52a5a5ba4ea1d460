import itertools
import math

import pytest

from baskakov_basis import OperatorParams
from function_catalog import get_function
from operator_moments import (
    closed_central_moment,
    closed_raw_moment_L,
    closed_raw_moment_T,
    coefficient_limits,
    constant_term_finding,
    fourth_moment_bound,
    fourth_moment_coefficients,
    oracle_moment,
    reconstructed_central_moment,
    uniform_bound_constant,
    verify_moments,
)
from stancu_operators import eval_T

TRIPLES = [(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, 2.0), (2.0, 1.0, 3.0)]
XS = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0]


class TestLiteralExamples:
    def test_order_zero_is_one(self):
        p = OperatorParams(7, 1.0, 1.0, 2.0)
        assert closed_raw_moment_L(p, 0, 7.0) == 1
        assert closed_raw_moment_T(p, 0, 1.0) == 1
        assert closed_central_moment(p, 0, 4.0) == 1

    def test_point_first_moment(self):
        assert closed_raw_moment_L(OperatorParams(4, 2.0, 1.0, 3.0), 1, 2.0) == pytest.approx(31.0 / 21.0)

    def test_point_second_moment_classical(self):
        assert closed_raw_moment_L(OperatorParams(6), 2, 1.0) == pytest.approx(4.0 / 3.0, rel=1e-15)

    def test_first_moment_classical(self):
        assert closed_raw_moment_T(OperatorParams(10), 1, 1.0) == pytest.approx(1.05, rel=1e-15)

    def test_first_central_moment_classical(self):
        assert closed_central_moment(OperatorParams(10), 1, 1.0) == pytest.approx(0.05, rel=1e-12)

    def test_orders_outside_range_rejected(self):
        with pytest.raises(ValueError):
            closed_raw_moment_T(OperatorParams(5), 5, 1.0)
        with pytest.raises(ValueError):
            closed_central_moment(OperatorParams(5), 3, 1.0)


@pytest.mark.parametrize("n", [5, 10, 100])
@pytest.mark.parametrize("x", [0.0, 1.0, 2.0, 5.0])
@pytest.mark.parametrize("order", [0, 1, 2])
def test_literal_classical_moments_match(n, x, order):
    p = OperatorParams(n)
    oracle = oracle_moment(p, order, x, "raw_T")
    assert closed_raw_moment_T(p, order, x) == pytest.approx(oracle, rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("x", [0.0, 0.5, 1.0, 3.0])
def test_first_central_moment_is_exact(x):
    p = OperatorParams(12, 1.5, 1.0, 2.0)
    deviation = eval_T(p, get_function("t"), x) - x
    assert deviation == pytest.approx(closed_central_moment(p, 1, x), abs=1e-10)


def test_printed_second_moment_misses_alpha_term():
    p = OperatorParams(20, 1.0, 1.0, 2.0)
    oracle = oracle_moment(p, 2, 1.0, "raw_T")
    gap = closed_raw_moment_T(p, 2, 1.0) - oracle
    assert gap == pytest.approx(-1.0 / 22 ** 2, abs=1e-12)
    assert closed_raw_moment_T(p, 2, 1.0, form="reconstructed") == pytest.approx(oracle, rel=1e-12)


def test_constant_term_finding():
    found = constant_term_finding(OperatorParams(5, 1.0, 1.0, 2.0))
    assert found["supported"] == "integrated"
    assert found["printed_minus_oracle"] == pytest.approx(found["predicted_gap"], abs=1e-14)


def test_second_moment_example_cell():
    p = OperatorParams(5, 1.0, 1.0, 2.0)
    oracle = oracle_moment(p, 2, 0.5, "raw_T")
    assert closed_raw_moment_T(p, 2, 0.5, form="reconstructed") == pytest.approx(oracle, rel=1e-12)
    assert closed_raw_moment_T(p, 2, 0.5) != pytest.approx(oracle, rel=1e-8)


def test_second_central_example_cell():
    p = OperatorParams(8, 1.0, 0.0, 1.0)
    oracle = oracle_moment(p, 2, 1.0, "central_T")
    assert closed_central_moment(p, 2, 1.0, form="reconstructed") == pytest.approx(oracle, rel=1e-12)


def test_binomial_and_shifted_expansions_agree_for_small_n():
    p = OperatorParams(3, 1.0, 0.5, 1.0)
    for order in range(5):
        assert reconstructed_central_moment(p, order, 1.5, expansion="binomial") == pytest.approx(
            reconstructed_central_moment(p, order, 1.5), rel=1e-9, abs=1e-12
        )


def test_unknown_expansion_rejected():
    with pytest.raises(ValueError):
        reconstructed_central_moment(OperatorParams(3), 2, 1.0, expansion="taylor")


QUICK_GRID = list(itertools.product([1, 10, 100], TRIPLES, [0.0, 1.0, 5.0]))


@pytest.mark.parametrize("n,triple,x", QUICK_GRID)
def test_reconstructed_moments_match_oracle(n, triple, x):
    p = OperatorParams(n, *triple)
    for order in range(5):
        assert closed_raw_moment_T(p, order, x, form="reconstructed") == pytest.approx(
            oracle_moment(p, order, x, "raw_T"), rel=1e-9
        )
        assert closed_raw_moment_L(p, order, x, form="reconstructed") == pytest.approx(
            oracle_moment(p, order, x, "raw_L"), rel=1e-9
        )
    for order in (0, 1, 2, 4):
        assert closed_central_moment(p, order, x, form="reconstructed") == pytest.approx(
            oracle_moment(p, order, x, "central_T"), rel=1e-9
        )


@pytest.mark.slow
@pytest.mark.parametrize("n,triple", list(itertools.product([1, 5, 10, 100, 1000], TRIPLES)))
def test_reconstructed_moments_full_grid(n, triple):
    p = OperatorParams(n, *triple)
    reports = verify_moments(p, XS, forms=("reconstructed",))
    bad = [r for r in reports if not r.rel_diff <= 1e-9]
    assert not bad


class TestFourthMomentBound:
    def test_classical_coefficients(self):
        coeffs = fourth_moment_coefficients(OperatorParams(100))
        assert coeffs.A4 == pytest.approx((3 * 100 ** 2 + 6 * 100) / 100 ** 2)
        assert coeffs.A3 == pytest.approx((6 * 100 ** 2 + 13 * 100) / 100 ** 2)
        assert coeffs.A2 == pytest.approx((11 * 100 ** 2 + 15 * 100) / 100 ** 2)
        assert coeffs.A1 == pytest.approx(6 * 100 / 100 ** 2)
        assert coeffs.bound_constant == coeffs.A2

    def test_bound_at_origin(self):
        bound, coeffs = fourth_moment_bound(OperatorParams(100), 0.0)
        assert bound == pytest.approx(coeffs.bound_constant / 100 ** 2)

    def test_bound_example_cell(self):
        p = OperatorParams(50, 1.0, 1.0, 2.0)
        bound, _ = fourth_moment_bound(p, 1.0)
        assert bound >= oracle_moment(p, 4, 1.0, "central_T")

    @pytest.mark.parametrize("n,triple", list(itertools.product([5, 10, 100, 1000], TRIPLES)))
    def test_bound_dominates_oracle(self, n, triple):
        p = OperatorParams(n, *triple)
        for x in XS:
            bound, _ = fourth_moment_bound(p, x)
            assert bound >= oracle_moment(p, 4, x, "central_T")

    @pytest.mark.parametrize("n", [10, 100, 1000])
    def test_scaled_fourth_moment_bounded(self, n):
        p = OperatorParams(n, 1.0, 1.0, 2.0)
        for x in XS:
            scaled = oracle_moment(p, 4, x, "central_T") * p.scale ** 2
            assert scaled <= fourth_moment_coefficients(p).bound_constant * (x ** 4 + x ** 3 + x ** 2 + x + 1)

    @pytest.mark.parametrize("triple", [(1.0, 0.0, 0.0), (0.0, 1.0, 2.0)])
    def test_coefficients_approach_limits(self, triple):
        coeffs = fourth_moment_coefficients(OperatorParams(10 ** 6, *triple))
        limits = coefficient_limits(*triple)
        for name in ("A2", "A3", "A4"):
            assert getattr(coeffs, name) == pytest.approx(limits[name], rel=0.01)
        assert abs(coeffs.A1) < 1e-4

    def test_uniform_constant_covers_every_n(self):
        p = OperatorParams(5, 1.0, 1.0, 2.0)
        uniform = uniform_bound_constant(p)
        for n in (5, 17, 230, 10 ** 5):
            assert fourth_moment_coefficients(p.with_n(n)).bound_constant <= uniform + 1e-12


class TestVerifyMoments:
    def test_classical_grid_all_match(self):
        reports = verify_moments(OperatorParams(10), [0.0, 1.0, 2.0])
        assert len(reports) == 3 * (5 + 5 + 4) * 2
        low = [r for r in reports if r.order <= 2]
        assert all(r.matches for r in low)

    def test_order_zero_literal_exact(self):
        reports = verify_moments(OperatorParams(7, 2.0, 1.0, 3.0), [0.5, 4.0])
        for r in reports:
            if r.order == 0:
                assert r.matches

    def test_reconstructed_always_match(self):
        reports = verify_moments(OperatorParams(20, 1.0, 1.0, 2.0), [0.0, 1.0, 3.0])
        assert all(r.matches for r in reports if r.form == "reconstructed")

    def test_printed_constant_recorded_as_finding(self):
        reports = verify_moments(OperatorParams(20, 1.0, 1.0, 2.0), [1.0], kinds=("raw_T",))
        cell = next(r for r in reports if r.order == 2 and r.form == "literal")
        assert cell.verdict == "mismatch"
        assert cell.closed_form - cell.oracle == pytest.approx(-1.0 / 22 ** 2, abs=1e-12)

    def test_deterministic_order(self):
        p = OperatorParams(5, 1.0)
        first = verify_moments(p, [0.0, 1.0])
        second = verify_moments(p, [0.0, 1.0])
        assert first == second
        assert [r.x for r in first[:2]] == [0.0, 0.0]

    def test_rate_of_second_central_moment(self):
        scaled = [oracle_moment(OperatorParams(n, 1.0, 1.0, 2.0), 2, 1.0, "central_T") * (n + 2)
                  for n in (100, 1000, 10000)]
        assert scaled[-1] > 0
        assert math.isclose(scaled[-1], scaled[-2], rel_tol=0.01)


@pytest.mark.parametrize("triple", TRIPLES)
@pytest.mark.parametrize("x", [5.0, 10.0])
def test_heavy_tail_fourth_central_moment(triple, x):
    # at n=1 the weights decay slowly and the fourth power amplifies the dropped tail
    p = OperatorParams(1, *triple)
    assert closed_central_moment(p, 4, x, form="reconstructed") == pytest.approx(
        oracle_moment(p, 4, x, "central_T"), rel=1e-9
    )
