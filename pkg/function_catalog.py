import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import Polynomial

from errors import InvalidParametersError

UNIT_INTERVAL = "unit"
HALF_LINE = "half_line"


@dataclass(frozen=True)
class LipschitzCertificate:
    """Membership claim f in Lip_M^*(exponent): |f(t)-f(x)| <= M |t-x|^exponent / (t+x)^(exponent/2).

    window=None means the claim holds on all of (0, inf).
    """

    M: float
    exponent: float
    window: Optional[tuple] = None
    analytic: bool = True

    def __post_init__(self):
        if not 0 < self.exponent <= 1:
            raise InvalidParametersError(f"Lip* exponent must lie in (0, 1], got {self.exponent!r}")
        if self.M < 0:
            raise InvalidParametersError(f"Lip* constant must be non-negative, got {self.M!r}")


@dataclass(frozen=True)
class TestFunction:
    """A named real function on [0, inf) (or [0, 1]) with the metadata the checkers rely on.

    growth is the polynomial growth exponent (0 means bounded); rho_limit is
    lim f(x)/(1+x^2) at infinity when f is in C_rho^k, None otherwise.
    """

    __test__ = False  # not a pytest class

    name: str
    evaluate: Callable
    domain: str = HALF_LINE
    growth: float = 0.0
    smoothness: str = "continuous"
    antiderivative: Optional[Callable] = None
    second_derivative: Optional[Callable] = None
    polynomial: Optional[Polynomial] = None
    shift: float = 0.0
    rho_limit: Optional[float] = None
    sup_norm: Optional[float] = None
    lipschitz: Optional[LipschitzCertificate] = field(default=None, compare=False)

    def __call__(self, t):
        return self.evaluate(np.asarray(t, dtype=float))

    @property
    def is_polynomial(self):
        return self.polynomial is not None

    @property
    def is_bounded(self):
        return self.growth == 0

    @property
    def has_exact_integral(self):
        return self.antiderivative is not None or self.polynomial is not None

    def exact_integral(self, lo, hi):
        """Closed-form integral over [lo, hi] (arrays broadcast)"""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if self.polynomial is not None:
            primitive = self.polynomial.integ()
            return primitive(hi - self.shift) - primitive(lo - self.shift)
        if self.antiderivative is None:
            raise InvalidParametersError(f"{self.name} has no closed-form antiderivative")
        return self.antiderivative(hi) - self.antiderivative(lo)


def polynomial_function(name, coefficients, shift=0.0):
    """Polynomial p(t - shift), coefficients in increasing degree"""
    p = Polynomial(coefficients)
    degree = p.degree()
    if degree < 2:
        rho_limit = 0.0
    elif degree == 2:
        rho_limit = float(p.coef[2])
    else:
        rho_limit = None
    second = p.deriv(2) if degree >= 2 else Polynomial([0.0])
    return TestFunction(
        name=name,
        evaluate=lambda t: p(t - shift),
        growth=float(degree),
        smoothness="C_inf",
        second_derivative=lambda t: second(np.asarray(t, dtype=float) - shift),
        polynomial=p,
        shift=float(shift),
        rho_limit=rho_limit,
        sup_norm=abs(float(p.coef[0])) if degree == 0 else None,
    )


def monomial(m):
    coefficients = [0.0] * m + [1.0]
    name = "const1" if m == 0 else ("t" if m == 1 else f"t{m}")
    return polynomial_function(name, coefficients)


def shifted_monomial(m, x0):
    """(t - x0)^m, kept in shifted form so the oracle avoids cancellation"""
    return polynomial_function(f"(t-{x0:g})^{m}", [0.0] * m + [1.0], shift=x0)


def linear_combination(c1, f, c2, g):
    """c1*f + c2*g with the capabilities both inputs share"""
    if f.domain != g.domain:
        raise InvalidParametersError("cannot combine functions on different domains")
    polynomial = None
    if f.is_polynomial and g.is_polynomial and f.shift == 0 and g.shift == 0:
        polynomial = c1 * f.polynomial + c2 * g.polynomial
    antiderivative = None
    if f.has_exact_integral and g.has_exact_integral:
        def antiderivative(t):
            return c1 * f.exact_integral(0.0, t) + c2 * g.exact_integral(0.0, t)
    second = None
    if f.second_derivative is not None and g.second_derivative is not None:
        def second(t):
            return c1 * f.second_derivative(t) + c2 * g.second_derivative(t)
    rho_limit = None
    if f.rho_limit is not None and g.rho_limit is not None:
        rho_limit = c1 * f.rho_limit + c2 * g.rho_limit
    return TestFunction(
        name=f"{c1:g}*{f.name}+{c2:g}*{g.name}",
        evaluate=lambda t: c1 * f(t) + c2 * g(t),
        domain=f.domain,
        growth=max(f.growth, g.growth),
        smoothness=f.smoothness if f.smoothness == g.smoothness else "continuous",
        antiderivative=antiderivative,
        second_derivative=second,
        polynomial=polynomial,
        rho_limit=rho_limit,
    )


def _abs_shift_primitive(t):
    u = t - 1.0
    return np.sign(u) * u * u / 2.0


def _build_catalog():
    catalog = {m.name: m for m in (monomial(i) for i in range(5))}
    catalog["const1"] = TestFunction(
        name="const1",
        evaluate=lambda t: np.ones_like(t),
        smoothness="C_inf",
        second_derivative=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        polynomial=Polynomial([1.0]),
        rho_limit=0.0,
        sup_norm=1.0,
        lipschitz=LipschitzCertificate(M=0.0, exponent=1.0),
    )
    catalog["exp_neg"] = TestFunction(
        name="exp_neg",
        evaluate=lambda t: np.exp(-t),
        smoothness="C_inf",
        antiderivative=lambda t: -np.exp(-t),
        second_derivative=lambda t: np.exp(-np.asarray(t, dtype=float)),
        rho_limit=0.0,
        sup_norm=1.0,
    )
    catalog["sin"] = TestFunction(
        name="sin",
        evaluate=np.sin,
        smoothness="C_inf",
        antiderivative=lambda t: -np.cos(t),
        second_derivative=lambda t: -np.sin(t),
        rho_limit=0.0,
        sup_norm=1.0,
    )
    # |t-1| is Lip*(1) only on bounded windows: |t-x| <= sqrt(2X) |t-x| / sqrt(t+x) for t, x <= X
    catalog["abs_shift"] = TestFunction(
        name="abs_shift",
        evaluate=lambda t: np.abs(t - 1.0),
        growth=1.0,
        smoothness="Lipschitz(1, 1)",
        antiderivative=_abs_shift_primitive,
        rho_limit=0.0,
        lipschitz=LipschitzCertificate(M=math.sqrt(20.0), exponent=1.0, window=(0.0, 10.0)),
    )
    # |sqrt(t) - sqrt(x)| = |t-x| / (sqrt(t) + sqrt(x)) <= |t-x| / sqrt(t+x)
    catalog["sqrt"] = TestFunction(
        name="sqrt",
        evaluate=np.sqrt,
        growth=0.5,
        smoothness="Lipschitz(0.5, 1)",
        antiderivative=lambda t: 2.0 / 3.0 * np.power(t, 1.5),
        rho_limit=0.0,
        lipschitz=LipschitzCertificate(M=1.0, exponent=1.0),
    )
    catalog["inv_quad"] = TestFunction(
        name="inv_quad",
        evaluate=lambda t: 1.0 / (1.0 + t * t),
        smoothness="C_inf",
        antiderivative=np.arctan,
        second_derivative=lambda t: (6.0 * np.square(t) - 2.0) / (1.0 + np.square(t)) ** 3,
        rho_limit=0.0,
        sup_norm=1.0,
    )
    rho = polynomial_function("rho", [1.0, 0.0, 1.0])
    catalog["rho"] = rho
    return catalog


CATALOG = _build_catalog()


def get_function(name):
    """Look up a catalog member by name"""
    try:
        return CATALOG[name]
    except KeyError:
        raise InvalidParametersError(
            f"Unknown function '{name}'. Available: {', '.join(sorted(CATALOG))}"
        ) from None
