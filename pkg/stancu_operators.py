import logging
import math

import numpy as np
from joblib import Parallel, delayed
from scipy.stats import binom

from baskakov_basis import DEFAULT_POLICY, OperatorParams, basis_weight, truncated_weights
from errors import DomainViolationError, InvalidParametersError, TailNotAbsorbedError
from function_catalog import HALF_LINE
from quadrature import QuadratureMethod, QuadratureSpec, integrate_intervals

logger = logging.getLogger(__name__)

BASELINES = ("bernstein", "kantorovich", "stancu", "kantorovich_stancu", "baskakov_kantorovich")
UNIT_INTERVAL_BASELINES = ("bernstein", "kantorovich", "stancu", "kantorovich_stancu")


def _check_half_line(f, x):
    if x < 0:
        raise DomainViolationError(f"x must be non-negative, got {x!r}")
    if f.domain != HALF_LINE:
        raise DomainViolationError(f"{f.name} is not defined on [0, inf)")


def _weighted_integral_sum(weights, f, lows, highs, scale, quad):
    quad = quad or QuadratureSpec.for_function(f)
    epsabs = None
    if quad.method is QuadratureMethod.ADAPTIVE:
        # the weights sum to at most one, so this certifies the total error
        epsabs = quad.tolerance / scale
    integrals = integrate_intervals(f, lows, highs, quad, epsabs=epsabs)
    return math.fsum(weights * (scale * integrals))


def eval_T(params, f, x, policy=DEFAULT_POLICY, quad=None):
    """T_{n,a}^{alpha,beta}(f; x) = (n+beta) sum_k W_{n,k}^a(x) int_{(k+alpha)/(n+beta)}^{(k+alpha+1)/(n+beta)} f"""
    _check_half_line(f, x)
    weights = truncated_weights(params, x, policy, order=f.growth, center=f.shift)
    k = np.arange(len(weights))
    scale = params.scale
    lows = (k + params.alpha) / scale
    highs = (k + params.alpha + 1) / scale
    return _weighted_integral_sum(weights, f, lows, highs, scale, quad)


def eval_L(params, f, x, policy=DEFAULT_POLICY):
    """Point-evaluation variant: sum_k W_{n,k}^a(x) f((k+alpha)/(n+beta))"""
    _check_half_line(f, x)
    weights = truncated_weights(params, x, policy, order=f.growth, center=f.shift)
    nodes = (np.arange(len(weights)) + params.alpha) / params.scale
    return math.fsum(weights * f(nodes))


def eval_grid(params, f, xs, policy=DEFAULT_POLICY, quad=None, operator="T", n_jobs=1):
    """Operator values over an x-grid; order of the output follows xs whatever n_jobs is"""
    if operator == "T":
        def one(x):
            return eval_T(params, f, x, policy, quad)
    elif operator == "L":
        def one(x):
            return eval_L(params, f, x, policy)
    elif operator in BASELINES:
        def one(x):
            return eval_baseline(operator, params.n, f, x, a=params.a, alpha=params.alpha,
                                 beta=params.beta, policy=policy, quad=quad)
    else:
        raise InvalidParametersError(f"Unknown operator '{operator}'")
    if n_jobs == 1:
        return np.array([one(float(x)) for x in xs])
    return np.array(Parallel(n_jobs=n_jobs)(delayed(one)(float(x)) for x in xs))


def _bernstein_weights(n, x):
    return binom.pmf(np.arange(n + 1), n, x)


def _baskakov_kantorovich(n, a, f, x, policy, quad):
    # independent of eval_T: per-term log-domain weights on the classical intervals [k/n, (k+1)/n]
    params = OperatorParams(n, a)
    weights = []
    mass = 0.0
    for k in range(policy.k_max_hard + 1):
        w = basis_weight(params, k, x)
        weights.append(w)
        mass += w
        if k and weights[-2] > 0:
            # past the mode the ratio of consecutive weights only shrinks
            ratio = w / weights[-2]
            if ratio < 1 and w * ratio / (1 - ratio) <= policy.tail_epsilon:
                break
        elif w == 0.0 and mass > 0.5:
            break
    else:
        raise TailNotAbsorbedError(params, x, mass, policy.k_max_hard, policy.tail_epsilon)
    k = np.arange(len(weights))
    return _weighted_integral_sum(np.array(weights), f, k / n, (k + 1) / n, float(n), quad)


def eval_baseline(which, n, f, x, a=0.0, alpha=0.0, beta=0.0, policy=DEFAULT_POLICY, quad=None):
    """One of the classical operators the generalized operator extends.

    Stancu forms use the binomial coefficients C(n, k); the Kantorovich-Stancu
    form uses the intervals [(k+alpha)/(n+beta+1), (k+alpha+1)/(n+beta+1)].
    """
    if which not in BASELINES:
        raise InvalidParametersError(f"Unknown baseline '{which}'. Available: {', '.join(BASELINES)}")
    if int(n) != n or n < 1:
        raise InvalidParametersError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    if which == "baskakov_kantorovich":
        _check_half_line(f, x)
        return _baskakov_kantorovich(n, a, f, x, policy, quad)
    if not 0 <= x <= 1:
        raise DomainViolationError(f"{which} is defined on [0, 1], got x={x!r}")
    weights = _bernstein_weights(n, x)
    k = np.arange(n + 1)
    if which == "bernstein":
        return math.fsum(weights * f(k / n))
    if which == "stancu":
        return math.fsum(weights * f((k + alpha) / (n + beta)))
    if which == "kantorovich":
        return _weighted_integral_sum(weights, f, k / (n + 1), (k + 1) / (n + 1), float(n + 1), quad)
    scale = n + beta + 1
    return _weighted_integral_sum(weights, f, (k + alpha) / scale, (k + alpha + 1) / scale, scale, quad)
