import logging
import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy.special import gammaln, logsumexp
from scipy.stats import nbinom, poisson

from errors import InvalidParametersError, TailNotAbsorbedError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OperatorParams:
    """The quadruple (n, a, alpha, beta) of one generalized Baskakov-Kantorovich-Stancu operator"""

    n: int
    a: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0
    allow_unordered_stancu: bool = False

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise InvalidParametersError(f"n must be a positive integer, got {self.n!r}")
        for name in ("a", "alpha", "beta"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise InvalidParametersError(f"{name} must be a finite non-negative real, got {value!r}")
        if self.alpha > self.beta and not self.allow_unordered_stancu:
            raise InvalidParametersError(
                f"Stancu condition 0 <= alpha <= beta violated (alpha={self.alpha}, beta={self.beta}); "
                "pass allow_unordered_stancu=True to override"
            )
        # normalise numpy scalars so that hashing and CSV output stay stable
        object.__setattr__(self, "n", int(self.n))
        for name in ("a", "alpha", "beta"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def scale(self):
        """n + beta, the denominator of every Stancu node"""
        return self.n + self.beta

    def with_n(self, n):
        return OperatorParams(n, self.a, self.alpha, self.beta, self.allow_unordered_stancu)

    def __str__(self):
        return f"(n={self.n}, a={self.a:g}, alpha={self.alpha:g}, beta={self.beta:g})"


@dataclass(frozen=True)
class SeriesPolicy:
    """Truncation controls for the infinite sum over k"""

    tail_epsilon: float = 1e-12
    k_max_hard: int = 20000
    log_domain: bool = True

    def __post_init__(self):
        if not 0 < self.tail_epsilon < 1:
            raise InvalidParametersError(f"tail_epsilon must lie in (0, 1), got {self.tail_epsilon!r}")
        if int(self.k_max_hard) != self.k_max_hard or self.k_max_hard < 1:
            raise InvalidParametersError(f"k_max_hard must be a positive integer, got {self.k_max_hard!r}")


DEFAULT_POLICY = SeriesPolicy()
ORACLE_POLICY = SeriesPolicy(tail_epsilon=1e-14, k_max_hard=200000)


def _check_index(name, value):
    if int(value) != value or value < 0:
        raise InvalidParametersError(f"{name} must be a non-negative integer, got {value!r}")


def log_pochhammer(n, i):
    """log (n)_i via log-gamma"""
    return float(gammaln(n + i) - gammaln(n))


def pochhammer_rising(n, i, log_domain=False):
    """Rising factorial (n)_i = n(n+1)...(n+i-1), with (n)_0 = 1.

    The linear result is exact while it fits a double; past that an
    OverflowError tells the caller to ask for log_domain=True.
    """
    if n < 1:
        raise InvalidParametersError(f"n must be >= 1, got {n!r}")
    _check_index("i", i)
    if log_domain:
        return log_pochhammer(n, i)
    if int(n) == n:
        exact = math.prod(range(int(n), int(n) + int(i)))
        try:
            return float(exact)
        except OverflowError as e:
            raise OverflowError(f"(n)_i overflows a double for n={n}, i={i}; use log_domain=True") from e
    value = math.prod(n + j for j in range(int(i)))
    if math.isinf(value):
        raise OverflowError(f"(n)_i overflows a double for n={n}, i={i}; use log_domain=True")
    return value


def log_p_coeff(n, a, k):
    """log p_k(n, a), summing the positive terms in log space"""
    _check_index("k", k)
    k = int(k)
    if a < 0:
        raise InvalidParametersError(f"a must be non-negative, got {a!r}")
    if a == 0:
        return log_pochhammer(n, k)
    i = np.arange(k + 1)
    terms = (
        gammaln(k + 1) - gammaln(i + 1) - gammaln(k - i + 1)
        + gammaln(n + i) - gammaln(n)
        + (k - i) * math.log(a)
    )
    return float(logsumexp(terms))


def p_coeff(n, a, k, log_domain=False):
    """Coefficient p_k(n, a) = sum_{i=0}^{k} C(k, i) (n)_i a^(k-i) of the generalized Baskakov basis.

    With log_domain=True the logarithm is returned instead.
    """
    if log_domain:
        return log_p_coeff(n, a, k)
    _check_index("k", k)
    k = int(k)
    if a < 0:
        raise InvalidParametersError(f"a must be non-negative, got {a!r}")
    if a == 0:
        return pochhammer_rising(n, k)
    terms = [math.comb(k, i) * pochhammer_rising(n, i) * a ** (k - i) for i in range(k + 1)]
    total = math.fsum(terms)
    if math.isinf(total):
        raise OverflowError(f"p_k(n, a) overflows a double for n={n}, a={a}, k={k}; use log_domain=True")
    return total


def basis_weight(params, k, x, log_domain=True):
    """W_{n,k}^a(x) = e^{-ax/(1+x)} p_k(n,a)/k! * x^k/(1+x)^(k+n).

    Underflow to 0.0 is expected far out in the tail. The linear path raises
    OverflowError once any factor leaves the double range.
    """
    _check_index("k", k)
    k = int(k)
    if x < 0:
        raise InvalidParametersError(f"x must be non-negative, got {x!r}")
    if x == 0:
        return 1.0 if k == 0 else 0.0
    n, a = params.n, params.a
    shrink = a * x / (1 + x)
    if log_domain:
        log_w = (
            -shrink + log_p_coeff(n, a, k) - gammaln(k + 1)
            + k * math.log(x) - (k + n) * math.log1p(x)
        )
        return math.exp(log_w)
    return math.exp(-shrink) * p_coeff(n, a, k) / math.factorial(k) * x ** k / (1 + x) ** (k + n)


def basis_weight_reference(params, k, x, dps=50):
    """Arbitrary precision evaluation of W_{n,k}^a(x) straight from the definition"""
    _check_index("k", k)
    with mpmath.workdps(dps):
        n = mpmath.mpf(params.n)
        a = mpmath.mpf(params.a)
        x = mpmath.mpf(x)
        if x == 0:
            return mpmath.mpf(1) if k == 0 else mpmath.mpf(0)
        p_k = mpmath.fsum(mpmath.binomial(k, i) * mpmath.rf(n, i) * a ** (k - i) for i in range(k + 1))
        return mpmath.exp(-a * x / (1 + x)) * p_k / mpmath.factorial(k) * x ** k / (1 + x) ** (k + n)


def count_cumulants(params, x):
    """First four cumulants of the index distribution k ~ W_{n,k}^a(x).

    The generating function e^{at}(1-t)^{-n} of p_k makes the weights the law of
    Poisson(a x/(1+x)) + NegativeBinomial(n, 1/(1+x)); cumulants add.
    """
    n, lam = params.n, params.a * x / (1 + x)
    base = n * x * (1 + x)
    return (
        n * x + lam,
        base + lam,
        base * (1 + 2 * x) + lam,
        base * (1 + 6 * x + 6 * x * x) + lam,
    )


def _linear_weights(params, x, k_max):
    # running products; underflow of the leading factor means the linear domain is unusable
    t = x / (1 + x)
    nb = np.empty(k_max + 1)
    nb[0] = (1 + x) ** (-params.n)
    if nb[0] == 0.0:
        raise OverflowError(f"(1+x)^-n underflows for n={params.n}, x={x}; use log_domain=True")
    for i in range(k_max):
        nb[i + 1] = nb[i] * (params.n + i) / (i + 1) * t
    if params.a == 0:
        return nb
    lam = params.a * t
    pois = np.empty(k_max + 1)
    pois[0] = math.exp(-lam)
    for j in range(k_max):
        pois[j + 1] = pois[j] * lam / (j + 1)
    return np.convolve(nb, pois)[: k_max + 1]


def basis_weights(params, x, k_max, log_domain=True):
    """Vector W_{n,0..k_max}^a(x) at one point.

    Convolves the Poisson and negative-binomial pmfs (see count_cumulants),
    which costs one pass instead of a log-sum per k.
    """
    _check_index("k_max", k_max)
    k_max = int(k_max)
    if x < 0:
        raise InvalidParametersError(f"x must be non-negative, got {x!r}")
    if x == 0:
        weights = np.zeros(k_max + 1)
        weights[0] = 1.0
        return weights
    if not log_domain:
        return _linear_weights(params, x, k_max)
    k = np.arange(k_max + 1)
    nb = nbinom.pmf(k, params.n, 1.0 / (1.0 + x))
    if params.a == 0:
        return nb
    pois = np.trim_zeros(poisson.pmf(k, params.a * x / (1 + x)), "b")
    if pois.size == 0:
        return nb
    return np.convolve(nb, pois)[: k_max + 1]


# headroom left for rounding in the retained sum
TAIL_SAFETY = 0.9


def _tail_terms(params, weights, order, center):
    if order == 0:
        return weights
    nodes = (np.arange(len(weights)) + params.alpha + 1) / params.scale
    return weights * (1.0 + np.abs(nodes - center)) ** order


def _geometric_rest(terms):
    # the terms are log-concave in k, so the last ratio bounds every later one
    last = terms[-1]
    if last == 0.0:
        return 0.0
    before = terms[-2] if len(terms) > 1 else 0.0
    if before == 0.0:
        return math.inf
    ratio = last / before
    return last * ratio / (1 - ratio) if ratio < 1 else math.inf


def truncated_weights(params, x, policy=DEFAULT_POLICY, order=0, center=0.0):
    """Weights W_{n,0..K}^a(x) where K is the truncation index for the policy.

    K is the first index whose tail sum_{k>K} W_k g_k is at most tail_epsilon
    times the full sum, with g_k = (1 + |(k+alpha+1)/(n+beta) - center|)^order.
    order=0 is the plain mass criterion. Operators applied to a function of
    polynomial growth pass that growth. Tails are summed from the far end, so
    they stay accurate far below machine epsilon.
    """
    if x < 0:
        raise InvalidParametersError(f"x must be non-negative, got {x!r}")
    if x == 0:
        return np.ones(1)
    mean, var = count_cumulants(params, x)[:2]
    guess = int(mean + 12 * math.sqrt(var) + 16)
    while True:
        k_max = min(guess, policy.k_max_hard)
        weights = basis_weights(params, x, k_max, log_domain=policy.log_domain)
        terms = _tail_terms(params, weights, order, center)
        rest = _geometric_rest(terms)
        # an all-zero window lies wholly before the mode
        if math.isfinite(rest) and terms.any():
            # tails[K] is what stopping at K leaves out
            tails = np.append(np.cumsum(terms[::-1])[::-1][1:], 0.0) + rest
            hits = np.flatnonzero(tails <= TAIL_SAFETY * policy.tail_epsilon * (terms[0] + tails[0]))
            if hits.size:
                K = int(hits[0])
                logger.debug("truncation index %d for %s at x=%g (order %g)", K, params, x, order)
                return weights[: K + 1]
        if k_max >= policy.k_max_hard:
            raise TailNotAbsorbedError(params, x, math.fsum(weights), policy.k_max_hard, policy.tail_epsilon)
        guess *= 2


def truncation_index(params, x, policy=DEFAULT_POLICY):
    """Smallest K with sum_{k>K} W_{n,k}^a(x) <= tail_epsilon, tails summed from the far end"""
    return len(truncated_weights(params, x, policy)) - 1
