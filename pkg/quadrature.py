import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import IntegrationWarning, quad

from errors import InvalidParametersError, QuadratureError


class QuadratureMethod(str, Enum):
    EXACT_POLYNOMIAL = "exact-polynomial"
    CLOSED_FORM = "closed-form"
    GAUSS = "gauss"
    ADAPTIVE = "adaptive"


@dataclass(frozen=True)
class QuadratureSpec:
    """How the interval integrals of the Kantorovich operators are computed.

    tolerance is the absolute budget for the whole operator value in adaptive
    mode; order is the number of Gauss-Legendre nodes per interval.
    """

    method: QuadratureMethod = QuadratureMethod.ADAPTIVE
    tolerance: float = 1e-10
    order: int = 20

    def __post_init__(self):
        object.__setattr__(self, "method", QuadratureMethod(self.method))
        if not self.tolerance > 0:
            raise InvalidParametersError(f"quadrature tolerance must be positive, got {self.tolerance!r}")
        if self.order < 1:
            raise InvalidParametersError(f"Gauss order must be >= 1, got {self.order!r}")

    @classmethod
    def for_function(cls, f, tolerance=1e-10):
        """Most exact method the function supports"""
        if f.is_polynomial:
            return cls(QuadratureMethod.EXACT_POLYNOMIAL, tolerance)
        if f.has_exact_integral:
            return cls(QuadratureMethod.CLOSED_FORM, tolerance)
        return cls(QuadratureMethod.ADAPTIVE, tolerance)

    def check(self, f):
        if self.method is QuadratureMethod.EXACT_POLYNOMIAL and not f.is_polynomial:
            raise InvalidParametersError(f"exact-polynomial quadrature needs a polynomial, got {f.name}")
        if self.method is QuadratureMethod.CLOSED_FORM and not f.has_exact_integral:
            raise InvalidParametersError(f"{f.name} has no closed-form antiderivative")


def _adaptive(f, lo, hi, epsabs):
    def integrand(t):
        return float(f(t))

    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            value, abserr = quad(integrand, lo, hi, epsabs=epsabs, epsrel=0.0, limit=200)
        except IntegrationWarning as e:
            raise QuadratureError(lo, hi, str(e).strip()) from e
    if abserr > epsabs:
        raise QuadratureError(lo, hi, f"error estimate {abserr:.3g} exceeds {epsabs:.3g}")
    return value


def integrate_intervals(f, lo, hi, spec, epsabs=None):
    """Integrals of f over the intervals [lo[k], hi[k]] as one array.

    epsabs overrides the per-interval absolute tolerance of adaptive mode.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    if np.any(hi < lo):
        raise InvalidParametersError("integration limits must satisfy lo <= hi")
    spec.check(f)
    if spec.method in (QuadratureMethod.EXACT_POLYNOMIAL, QuadratureMethod.CLOSED_FORM):
        return np.asarray(f.exact_integral(lo, hi), dtype=float)
    if spec.method is QuadratureMethod.GAUSS:
        nodes, weights = leggauss(spec.order)
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        values = f(mid[:, None] + half[:, None] * nodes[None, :])
        return (values @ weights) * half
    tol = spec.tolerance if epsabs is None else epsabs
    return np.array([_adaptive(f, a, b, tol) for a, b in zip(lo, hi)])


def integrate_interval(f, lo, hi, spec=None):
    """Integral of f over [lo, hi]"""
    if lo > hi:
        raise InvalidParametersError(f"need lo <= hi, got [{lo}, {hi}]")
    spec = spec or QuadratureSpec.for_function(f)
    return float(integrate_intervals(f, [lo], [hi], spec)[0])
