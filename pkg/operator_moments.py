"""Closed-form moments of the generalized Baskakov-Kantorovich-Stancu operators.

Two families live side by side:

* literal formulas, evaluated exactly as published (a few unambiguous slips
  normalised, each one logged), kept as the scientific record;
* reconstructed formulas, derived from the cumulants of the basis index and
  the exact integration of t^m over each Kantorovich interval.

Both are compared against a brute-force oracle (the operators applied to
monomials with exact polynomial quadrature), never against each other.
"""
import functools
import logging
import math
from dataclasses import dataclass

import numpy as np

from baskakov_basis import ORACLE_POLICY, count_cumulants
from function_catalog import monomial, shifted_monomial
from quadrature import QuadratureMethod, QuadratureSpec
from stancu_operators import eval_L, eval_T

logger = logging.getLogger(__name__)

MATCH_REL_TOL = 1e-8
MATCH_ABS_TOL = 1e-10
RAW_ORDERS = (0, 1, 2, 3, 4)
CENTRAL_ORDERS = (0, 1, 2, 4)
BOUND_N_MIN = 5
EXACT_QUAD = QuadratureSpec(QuadratureMethod.EXACT_POLYNOMIAL)

TYPO_NORMALISATIONS = (
    ("raw_L order 4", "(b+beta) read as (n+beta)"),
    ("raw_T order 4", "(b+beta) read as (n+beta)"),
    ("raw_T order 4", "(+x) read as (1+x)"),
    ("raw_T order 4", "'18alpha++6a' read as '18alpha+6a'"),
    ("fourth_moment_bound", "'24 alpha A' in the A_2 listing read as '24 alpha a'"),
    ("fourth_moment_bound", "A_2 taken from the expanded fourth moment, which keeps the (11-18alpha+18alpha^2)n^2 term the listing drops"),
)


@functools.lru_cache(maxsize=None)
def _note_normalisation(formula):
    for where, note in TYPO_NORMALISATIONS:
        if where == formula:
            logger.info("literal %s: %s", formula, note)


@dataclass(frozen=True)
class MomentReport:
    params: object
    x: float
    order: int
    kind: str  # raw_T, raw_L or central_T
    form: str  # literal or reconstructed
    closed_form: float
    oracle: float
    abs_diff: float
    rel_diff: float
    verdict: str

    @property
    def matches(self):
        return self.verdict == "match"


@dataclass(frozen=True)
class FourthMomentCoefficients:
    A1: float
    A2: float
    A3: float
    A4: float
    bound_constant: float


def _check_order(order, allowed):
    if order not in allowed:
        raise ValueError(f"order must be one of {allowed}, got {order!r}")


# ---------------------------------------------------------------------------
# literal formulas
# ---------------------------------------------------------------------------

def _literal_L(order, p, x):
    n, a, al = p.n, p.a, p.alpha
    N = p.scale
    q = 1.0 + x
    s = x / q
    if order == 0:
        return 1.0
    if order == 1:
        return n / N * x + a / N * s + al / N
    if order == 2:
        return (
            (n * n + n) / N ** 2 * x ** 2 + n * (1 + 2 * al) / N ** 2 * x
            + a * a / N ** 2 * s ** 2 + 2 * a * n / N ** 2 * x ** 2 / q
            + a * (1 + 2 * al) / N ** 2 * s + al ** 2 / N ** 2
        )
    if order == 3:
        return (
            (n ** 3 + 3 * n ** 2 + 2 * n) / N ** 3 * x ** 3
            + (n ** 2 * (3 + 3 * al) + n * (3 + 3 * al + 3 * a)) / N ** 3 * x ** 2
            + n * (1 + 3 * al + 3 * al ** 2) / N ** 3 * x
            + 3 * a * n ** 2 / N ** 3 * x ** 3 / q
            + n / N ** 3 * (3 * a ** 2 * x ** 3 / q ** 2 + 3 * a * x ** 2 / q + 6 * a * al * x ** 2 / q)
            + 1 / N ** 3 * (
                a * x / q + 3 * a ** 2 * x ** 2 / q ** 2 + a ** 3 * x ** 3 / q ** 3
                + 3 * al * a ** 2 * x ** 2 / q ** 2 + 3 * al ** 2 * a * x / q + al ** 3
            )
        )
    _note_normalisation("raw_L order 4")
    N4 = N ** 4
    return (
        (n ** 4 + 6 * n ** 3 + 11 * n ** 2 + 6 * n) / N4 * x ** 4
        + ((6 + 4 * al) * n ** 3 + (18 + 12 * al) * n ** 2 + (9 + 8 * al) * n) / N4 * x ** 3
        + ((7 + 12 * al + 6 * al ** 2) * n ** 2 / N4
           + (7 + 12 * al + 12 * al * a + 6 * al ** 2) * n / N4) * x ** 2
        + (1 + 4 * al + 6 * al ** 2 + 4 * al ** 3) * n / N4 * x
        + (4 * a * n ** 3 + 12 * a * n ** 2 + 8 * a * n) / N4 * x ** 4 / q
        + (6 * a ** 2 * n ** 2 + 6 * a ** 2 * n) / N4 * x ** 4 / q ** 2
        + 4 * a ** 3 * n / N4 * x ** 4 / q ** 3
        + a ** 4 / N4 * x ** 4 / q ** 4
        + (18 * a * n ** 2 + 18 * a * n) / N4 * x ** 3 / q
        + (18 * a ** 2 + 12 * a ** 2 * al) * n / N4 * x ** 3 / q ** 2
        + (6 * a ** 3 + 4 * al * a ** 3) / N4 * x ** 3 / q ** 3
        + (12 * a * al ** 2 + 12 * a * al + 14 * a) * n / N4 * x ** 2 / q
        + (7 * a ** 2 + 12 * a ** 2 * al + 6 * a ** 2 * al ** 2) / N4 * x ** 2 / q ** 2
        + (a + 4 * al * a + 6 * al ** 2 * a + 4 * al ** 3 * a) / N4 * s
        + al ** 4 / N4
    )


def _literal_T(order, p, x):
    n, a, al = p.n, p.a, p.alpha
    N = p.scale
    q = 1.0 + x
    s = x / q
    if order == 0:
        return 1.0
    if order == 1:
        return n / N * x + a / N * s + (2 * al + 1) / (2 * N)
    if order == 2:
        return (
            (n * n + n) / N ** 2 * x ** 2 + n * (2 + 2 * al) / N ** 2 * x
            + a * a / N ** 2 * s ** 2 + 2 * a * n / N ** 2 * x ** 2 / q
            + a * (2 + 2 * al) / N ** 2 * s + (3 * al ** 2 + 1) / (3 * N ** 2)
        )
    if order == 3:
        return (
            (n ** 3 + 3 * n ** 2 + 2 * n) / N ** 3 * x ** 3
            + (n ** 2 * (4.5 + 3 * al) + n * (4.5 + 3 * al + 3 * a)) / N ** 3 * x ** 2
            + n * (3.5 + 6 * al + 3 * al ** 2) / N ** 3 * x
            + 3 * a * n ** 2 / N ** 3 * x ** 3 / q
            + n / N ** 3 * (3 * a ** 2 * x ** 3 / q ** 2 + 6 * a * x ** 2 / q + 6 * a * al * x ** 2 / q)
            + 1 / N ** 3 * (
                a * (3.5 + 3 * al + 3 * al * a ** 2) * s
                + (4.5 * a ** 2 + 3 * al * a ** 2) * s ** 2
                + a ** 3 * s ** 3
            )
            + (al ** 3 + 1.5 * al ** 2 + al) / N ** 3
        )
    _note_normalisation("raw_T order 4")
    N4 = N ** 4
    return (
        (n ** 4 + 6 * n ** 3 + 11 * n ** 2 + 6 * n) / N4 * x ** 4
        + ((8 + 4 * al) * n ** 3 + (24 + 12 * al) * n ** 2 + (13 + 8 * al) * n) / N4 * x ** 3
        + ((15 + 18 * al + 6 * al ** 2) * n ** 2 / N4
           + (15 + 18 * al + 6 * a + 12 * al * a + 6 * al ** 2) * n / N4) * x ** 2
        + (6 + 14 * al + 11 * al ** 2 + 4 * al ** 3) * n / N4 * x
        + (4 * a * n ** 3 + 12 * a * n ** 2 + 8 * a * n) / N4 * x ** 4 / q
        + (6 * a ** 2 * n ** 2 + 6 * a ** 2 * n) / N4 * x ** 4 / q ** 2
        + 4 * a ** 3 * n / N4 * x ** 4 / q ** 3
        + a ** 4 / N4 * x ** 4 / q ** 4
        + (24 * a * n ** 2 + 18 * a * n) / N4 * x ** 3 / q
        + (24 * a ** 2 + 12 * a ** 2 * al) * n / N4 * x ** 3 / q ** 2
        + (8 * a ** 3 + 4 * al * a ** 3) / N4 * x ** 3 / q ** 3
        + (12 * a * al ** 2 + 10 * a + 24 * a * al + 14 * a) * n / N4 * x ** 2 / q
        + (15 * a ** 2 + 18 * a ** 2 * al + 6 * a ** 2 * al ** 2) / N4 * x ** 2 / q ** 2
        + (6 * a + 8 * al * a + 12 * al ** 2 * a + 4 * al ** 3 * a) / N4 * s
        + (al ** 4 + 2 * al ** 3 + 2 * al ** 2 + al) / N4
    )


def _literal_central(order, p, x):
    n, a, al, be = p.n, p.a, p.alpha, p.beta
    N = p.scale
    q = 1.0 + x
    s = x / q
    if order == 0:
        return 1.0
    if order == 1:
        return (n / N - 1) * x + a / N * s + (2 * al + 1) / (2 * N)
    if order == 2:
        return (
            (n + be ** 2) / N ** 2 * x ** 2 + (n - 2 * (al + 1) * be) / N ** 2 * x
            + a * a / N ** 2 * s ** 2 - 2 * a * be / N ** 2 * x ** 2 / q
            + a * (2 + 2 * al) / N ** 2 * s + (3 * al ** 2 + 1) / (3 * N ** 2)
        )
    N4 = N ** 4
    return (
        ((3 - 12 * be) * n ** 2 + (6 + 4 * be + 2 * be ** 2 + 4 * be ** 3) * n + be ** 4) / N4 * x ** 4
        + (((6 - 12 * a - 12 * be * al) * n ** 2 + (13 + 8 * al - 18 * be + 12 * a * be + 9 * be ** 2) * n) / N4
           + (-4 * be ** 3 * al - 2 * be ** 2) / N4) * x ** 3
        + ((11 - 18 * al + 18 * al ** 2) * n ** 2 + (15 + 18 * al + 6 * a + 12 * al * a - 24 * al * be) * n
           + 6 * al ** 2 * be ** 2 + 2 * be ** 2) / N4 * x ** 2
        + ((6 + 10 * al + 5 * al ** 2) * n - 4 * be * (al ** 3 + 1.5 * al ** 2 + al)) / N4 * x
        + (12 * a * n ** 2 + 8 * a * n - 4 * a * be ** 3) / N4 * x ** 4 / q
        + (6 * a ** 2 * n + 6 * a ** 2 * be ** 2) / N4 * x ** 4 / q ** 2
        - 4 * a ** 3 * be / N4 * x ** 4 / q ** 3
        + a ** 4 / N4 * x ** 4 / q ** 4
        + (12 * a * n ** 2 + 18 * a * n + 6 * a * (1 + 2 * al) * be ** 2) / N4 * x ** 3 / q
        + (6 * a ** 2 * n - (12 * a ** 2 + 12 * al * a ** 2) * be) / N4 * x ** 3 / q ** 2
        + (6 * a ** 3 + 4 * al * a ** 3) / N4 * x ** 3 / q ** 3
        + ((12 * a * al + 8 * a - 6 * a * al ** 2) * n - (6 * a + 18 * al ** 2 * a) * be) / N4 * x ** 2 / q
        + (7 * a ** 2 + 12 * a ** 2 * al + 6 * a ** 2 * al ** 2) / N4 * x ** 2 / q ** 2
        + (a + 4 * al * a + 6 * al ** 2 * a + 4 * al ** 3 * a) / N4 * s
        + al ** 4 / N4
    )


# ---------------------------------------------------------------------------
# reconstructed formulas
# ---------------------------------------------------------------------------

def _index_central_moments(params, x):
    """Mean and central moments c_0..c_4 of k ~ W_{n,k}^a(x)"""
    k1, k2, k3, k4 = count_cumulants(params, x)
    return k1, (1.0, 0.0, k2, k3, k4 + 3.0 * k2 * k2)


def _node_moment(params, order, x, centre):
    """E[((k+alpha)/(n+beta) - centre)^order] from the index central moments"""
    mean, c = _index_central_moments(params, x)
    N = params.scale
    d = (mean + params.alpha) / N - centre
    return math.fsum(math.comb(order, j) * d ** (order - j) * c[j] / N ** j for j in range(order + 1))


def _interval_shift(params, order, lower):
    # exact integration of (t-c)^m over [u, u + 1/N], times N, expanded around u - c
    N = params.scale
    return math.fsum(
        math.comb(order, j) / ((order - j + 1) * N ** (order - j)) * lower(j) for j in range(order + 1)
    )


def reconstructed_raw_moment_L(params, order, x):
    return _node_moment(params, order, x, 0.0)


def reconstructed_raw_moment_T(params, order, x):
    """T(t^m; x) = sum_j C(m,j) / ((m-j+1)(n+beta)^(m-j)) L(t^j; x)"""
    return _interval_shift(params, order, lambda j: reconstructed_raw_moment_L(params, j, x))


def reconstructed_central_moment(params, order, x, expansion="shifted"):
    """T((t-x)^m; x).

    expansion="binomial" expands sum_j C(m,j)(-x)^(m-j) T(t^j; x) literally;
    "shifted" applies the same interval identity to the node moments about x,
    which avoids the cancellation the binomial sum suffers for large n*x.
    """
    if expansion == "binomial":
        return math.fsum(
            math.comb(order, j) * (-x) ** (order - j) * reconstructed_raw_moment_T(params, j, x)
            for j in range(order + 1)
        )
    if expansion != "shifted":
        raise ValueError(f"expansion must be 'shifted' or 'binomial', got {expansion!r}")
    return _interval_shift(params, order, lambda j: _node_moment(params, j, x, x))


# ---------------------------------------------------------------------------
# public closed forms
# ---------------------------------------------------------------------------

def _check_x(x):
    if x < 0:
        raise ValueError(f"x must be non-negative, got {x!r}")


def closed_raw_moment_L(params, order, x, form="literal"):
    """L_{n,a}^{alpha,beta}(t^order; x)"""
    _check_order(order, RAW_ORDERS)
    _check_x(x)
    if form == "literal":
        return _literal_L(order, params, x)
    return reconstructed_raw_moment_L(params, order, x)


def closed_raw_moment_T(params, order, x, form="literal"):
    """T_{n,a}^{alpha,beta}(t^order; x)"""
    _check_order(order, RAW_ORDERS)
    _check_x(x)
    if form == "literal":
        return _literal_T(order, params, x)
    return reconstructed_raw_moment_T(params, order, x)


def closed_central_moment(params, order, x, form="literal"):
    """T_{n,a}^{alpha,beta}((t-x)^order; x)"""
    _check_x(x)
    if form == "literal":
        _check_order(order, CENTRAL_ORDERS)
        return _literal_central(order, params, x)
    _check_order(order, RAW_ORDERS)
    return reconstructed_central_moment(params, order, x)


# ---------------------------------------------------------------------------
# oracle
# ---------------------------------------------------------------------------

@functools.lru_cache(maxsize=8)
def _monomial(order):
    return monomial(order)


def oracle_moment(params, order, x, kind, policy=ORACLE_POLICY):
    """Brute-force moment: the operator applied to a (shifted) monomial with exact quadrature"""
    if kind == "raw_T":
        return eval_T(params, _monomial(order), x, policy, EXACT_QUAD)
    if kind == "raw_L":
        return eval_L(params, _monomial(order), x, policy)
    if kind == "central_T":
        return eval_T(params, shifted_monomial(order, x), x, policy, EXACT_QUAD)
    raise ValueError(f"unknown moment kind {kind!r}")


def compare(params, x, order, kind, form, closed_form, oracle):
    abs_diff = abs(closed_form - oracle)
    if oracle != 0:
        rel_diff = abs_diff / abs(oracle)
    else:
        rel_diff = 0.0 if abs_diff == 0 else math.inf
    verdict = "match" if rel_diff <= MATCH_REL_TOL or abs_diff <= MATCH_ABS_TOL else "mismatch"
    return MomentReport(params, float(x), order, kind, form, closed_form, oracle, abs_diff, rel_diff, verdict)


_CLOSED = {
    "raw_T": (closed_raw_moment_T, RAW_ORDERS),
    "raw_L": (closed_raw_moment_L, RAW_ORDERS),
    "central_T": (closed_central_moment, CENTRAL_ORDERS),
}


def verify_moments(params, x_grid, kinds=("raw_T", "raw_L", "central_T"), forms=("literal", "reconstructed")):
    """One MomentReport per (x, kind, order, form), in that nesting order"""
    reports = []
    for x in x_grid:
        x = float(x)
        for kind in kinds:
            closed, orders = _CLOSED[kind]
            for order in orders:
                oracle = oracle_moment(params, order, x, kind)
                for form in forms:
                    value = closed(params, order, x, form=form)
                    reports.append(compare(params, x, order, kind, form, value, oracle))
    return reports


def constant_term_finding(params):
    """Settle the constant term of T(t^2; x) at x = 0, where only the constant survives.

    Exact integration gives (3alpha^2+3alpha+1)/(3(n+beta)^2); the printed
    constant is (3alpha^2+1)/(3(n+beta)^2).
    """
    N = params.scale
    al = params.alpha
    oracle = oracle_moment(params, 2, 0.0, "raw_T")
    printed = (3 * al ** 2 + 1) / (3 * N ** 2)
    integrated = (3 * al ** 2 + 3 * al + 1) / (3 * N ** 2)
    return {
        "oracle": oracle,
        "printed": printed,
        "integrated": integrated,
        "printed_minus_oracle": printed - oracle,
        "predicted_gap": -al / N ** 2,
        "supported": "integrated" if abs(integrated - oracle) <= abs(printed - oracle) else "printed",
    }


# ---------------------------------------------------------------------------
# fourth central moment bound
# ---------------------------------------------------------------------------

def fourth_moment_coefficients(params):
    """A_1..A_4 of the fourth-moment bound, as printed"""
    _note_normalisation("fourth_moment_bound")
    n, a, al, be = params.n, params.a, params.alpha, params.beta
    N2 = params.scale ** 2
    A4 = (
        (3 - 12 * be + 12 * a) * n ** 2
        + (6 + 4 * be + 2 * be ** 2 + 4 * be ** 3 + 8 * a + 6 * a ** 2) * n
        + be ** 4 - 4 * a * be ** 3 + 6 * a ** 2 * be ** 2 - 4 * a ** 3 * be + a ** 4
    ) / N2
    A3 = (
        (6 - 12 * a - 12 * be * al + 12 * a) * n ** 2
        + (13 + 8 * al - 18 * be + 12 * a * be + 9 * be ** 2 + 18 * a + 6 * a ** 2) * n
        - 4 * be ** 3 * al - 2 * be ** 2
    ) / N2 + (
        (6 * a * (1 + 2 * al) * be ** 2 - 12 * a ** 2 + 12 * al * a ** 2) * be + 6 * a ** 3 + 4 * al * a ** 3
    ) / N2 ** 2
    A2 = (
        (11 - 18 * al + 18 * al ** 2) * n ** 2
        + (15 + 18 * al + 14 * a + 24 * al * a - 24 * al * be - 6 * a * al ** 2) * n
        + 12 * al ** 2 * be ** 2 + 2 * be ** 2 - (6 * a + 18 * al ** 2 * a) * be + 7 * a ** 2 + 12 * a ** 2 * al
    ) / N2
    A1 = (
        (6 + 10 * al + 5 * al ** 2) * n - 4 * be * (al ** 3 + 1.5 * al ** 2 + al)
        + a + 4 * al * a + 6 * al ** 2 * a + 6 * al ** 3 * a
    ) / N2
    return FourthMomentCoefficients(A1, A2, A3, A4, max(A1, A2, A3, A4))


def coefficient_limits(a, alpha, beta):
    """n -> infinity limits of A_1..A_4"""
    return {
        "A1": 0.0,
        "A2": 11 - 18 * alpha + 18 * alpha ** 2,
        "A3": 6 - 12 * beta * alpha,
        "A4": 3 - 12 * beta + 12 * a,
    }


def fourth_moment_bound(params, x):
    """M (x^4+x^3+x^2+x+1)/(n+beta)^2 with M = max_i A_i at this n"""
    _check_x(x)
    coeffs = fourth_moment_coefficients(params)
    bound = coeffs.bound_constant * (x ** 4 + x ** 3 + x ** 2 + x + 1) / params.scale ** 2
    return bound, coeffs


def uniform_bound_constant(params, n_min=BOUND_N_MIN, n_max=10 ** 6, points=60):
    """sup over a log-spaced n-grid of max_i A_i, the n-uniform constant"""
    ns = np.unique(np.round(np.geomspace(n_min, n_max, points)).astype(int))
    return max(fourth_moment_coefficients(params.with_n(int(n))).bound_constant for n in ns)
