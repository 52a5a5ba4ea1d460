"""Moduli of smoothness, the Peetre K-functional and the weighted space C_rho.

Every supremum over [0, inf) is taken on a finite window with a uniform grid,
so the moduli here are under-estimates. Callers that put a modulus on the
right-hand side of an inequality inflate it with RHS_INFLATION.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import BSpline

from errors import GrowthClassError, InvalidParametersError, ModulusWindowError

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = (0.0, 10.0)
WEIGHTED_WINDOW = (0.0, 20.0)
RHS_INFLATION = 1.05
REFINE_RTOL = 1e-3
MAX_REFINEMENTS = 4
SMOOTHING_RADII = (0.05, 0.1, 0.2)


@dataclass(frozen=True)
class ModulusEstimate:
    value: float
    delta: float
    grid_step: float
    window: tuple

    def inflated(self, factor=RHS_INFLATION):
        return self.value * factor


@dataclass(frozen=True)
class WeightedSpaceParams:
    """rho(x) = 1 + x^2 on [0, x_max], the stand-in for [0, inf)"""

    x_max: float = 1000.0
    norm_grid_step: float = 0.01
    tail_rtol: float = 1e-6

    def __post_init__(self):
        if not self.x_max > 0:
            raise InvalidParametersError(f"x_max must be positive, got {self.x_max!r}")
        if not self.norm_grid_step > 0:
            raise InvalidParametersError(f"norm_grid_step must be positive, got {self.norm_grid_step!r}")

    @staticmethod
    def rho(x):
        return 1.0 + np.square(x)

    @property
    def window(self):
        return (0.0, self.x_max)


def _grid(lo, hi, step):
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(count)


def _h_grid(deltas, step):
    top = max(deltas)
    multiples = step * np.arange(1, int(math.floor(top / step + 1e-9)) + 1)
    return np.union1d(multiples, np.asarray(deltas, dtype=float))


def _check_request(deltas, window, step):
    lo, hi = window
    if lo < 0 or hi <= lo:
        raise InvalidParametersError(f"window must satisfy 0 <= lo < hi, got {window!r}")
    if min(deltas) <= 0:
        raise InvalidParametersError(f"delta must be positive, got {min(deltas)!r}")
    if hi - lo < 2 * max(deltas):
        raise ModulusWindowError(
            f"window {window!r} is shorter than 2*delta = {2 * max(deltas):g}"
        )
    if step is None:
        step = min(0.01, min(deltas) / 10)
    if not 0 < step <= min(deltas) / 10 * (1 + 1e-12):
        raise InvalidParametersError(f"grid step must lie in (0, delta/10], got {step!r}")
    return step


def _per_h_sup(kind, f, xs, hs, hi):
    out = np.empty(len(hs))
    for i, h in enumerate(hs):
        if kind == "omega":
            x = xs[xs + h <= hi]
            out[i] = np.max(np.abs(f(x + h) - f(x)))
        elif kind == "omega2":
            x = xs[xs + 2 * h <= hi]
            out[i] = np.max(np.abs(f(x + 2 * h) - 2 * f(x + h) + f(x)))
        else:
            fx = f(xs)
            weight = (1 + h * h) * (1 + np.square(xs))
            best = np.max(np.abs(f(xs + h) - fx) / weight)
            left = xs[xs >= h]
            if left.size:
                back = np.abs(f(left - h) - f(left)) / ((1 + h * h) * (1 + np.square(left)))
                best = max(best, np.max(back))
            out[i] = best
    return out


def _profile_once(kind, f, deltas, window, step):
    xs = _grid(window[0], window[1], step)
    hs = _h_grid(deltas, step)
    running = np.maximum.accumulate(_per_h_sup(kind, f, xs, hs, window[1]))
    return running[np.searchsorted(hs, deltas)]


def modulus_profile(kind, f, deltas, window=DEFAULT_WINDOW, step=None, refine=True):
    """Estimates for several deltas on one shared grid, non-decreasing in delta by construction.

    kind is "omega", "omega2" or "Omega" (the weighted modulus). With refine the
    step is halved until every value changes by less than REFINE_RTOL.
    """
    if kind not in ("omega", "omega2", "Omega"):
        raise InvalidParametersError(f"unknown modulus kind {kind!r}")
    deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
    step = _check_request(deltas, window, step)
    values = _profile_once(kind, f, deltas, window, step)
    if refine:
        for _ in range(MAX_REFINEMENTS):
            finer = _profile_once(kind, f, deltas, window, step / 2)
            stable = np.all(np.abs(finer - values) <= REFINE_RTOL * np.abs(finer))
            values, step = finer, step / 2
            if stable:
                break
        else:
            logger.warning("%s estimate for %s still moving after %d refinements (step %g)",
                           kind, getattr(f, "name", f), MAX_REFINEMENTS, step)
    return [ModulusEstimate(float(v), float(d), step, tuple(window)) for v, d in zip(values, deltas)]


def modulus_omega(f, delta, window=DEFAULT_WINDOW, step=None, refine=True):
    """First-order modulus sup_{0<=h<=delta} sup_x |f(x+h) - f(x)| with x, x+h in the window"""
    return modulus_profile("omega", f, [delta], window, step, refine)[0]


def modulus_omega2(f, delta, window=DEFAULT_WINDOW, step=None, refine=True):
    """Second-order modulus sup_{0<h<=delta} sup_x |f(x+2h) - 2f(x+h) + f(x)|"""
    return modulus_profile("omega2", f, [delta], window, step, refine)[0]


def _check_growth(f):
    if f.growth > 2:
        raise GrowthClassError(f"{f.name} grows like t^{f.growth:g}, faster than rho(x) = 1 + x^2")


def weighted_modulus_Omega(f, delta, window=WEIGHTED_WINDOW, step=None, refine=True):
    """Omega(f; delta) = sup_{|h|<=delta, x} |f(x+h) - f(x)| / ((1+h^2)(1+x^2)), with x+h >= 0"""
    _check_growth(f)
    return modulus_profile("Omega", f, [delta], window, step, refine)[0].value


# ---------------------------------------------------------------------------
# Peetre K-functional
# ---------------------------------------------------------------------------

def _quadratic_kernel(radius, step):
    half = int(round(radius / step))
    if half < 2:
        raise InvalidParametersError(f"smoothing radius {radius:g} needs at least two grid steps of {step:g}")
    u = step * np.arange(-half, half + 1)
    spline = BSpline.basis_element(np.linspace(-radius, radius, 4), extrapolate=False)
    kernel = np.nan_to_num(spline(u))
    return kernel / kernel.sum(), half


def spline_smoothing(f, radius, xs, step):
    """Convolution of f with a normalised quadratic B-spline of support [-radius, radius].

    f is extended evenly, f(-t) = f(t), below zero. Returns values and second
    derivative on xs.
    """
    kernel, half = _quadratic_kernel(radius, step)
    ext = xs[0] + step * np.arange(-half, len(xs) + half)
    g = np.convolve(f(np.abs(ext)), kernel, mode="valid")
    g2 = np.gradient(np.gradient(g, step, edge_order=2), step, edge_order=2)
    return g, g2


def k_functional_terms(f, delta, window=DEFAULT_WINDOW, step=0.01, radii=SMOOTHING_RADII):
    """||f-g|| + delta ||g''|| for each candidate g, sup norms on the window grid"""
    if delta <= 0:
        raise InvalidParametersError(f"delta must be positive, got {delta!r}")
    xs = _grid(window[0], window[1], step)
    fx = f(xs)
    terms = {}
    if f.second_derivative is not None:
        terms["f"] = delta * float(np.max(np.abs(f.second_derivative(xs))))
    for r in radii:
        g, g2 = spline_smoothing(f, r, xs, step)
        terms[f"spline_{r:g}"] = float(np.max(np.abs(fx - g)) + delta * np.max(np.abs(g2)))
    affine = np.polyval(np.polyfit(xs, fx, 1), xs)
    terms["affine"] = float(np.max(np.abs(fx - affine)))
    terms["constant"] = float((np.max(fx) - np.min(fx)) / 2)
    return terms


def k_functional_estimate(f, delta, window=DEFAULT_WINDOW, step=0.01, radii=SMOOTHING_RADII):
    """Upper estimate of K_2(f, delta) = inf_g ||f-g|| + delta ||g''|| over a small candidate family"""
    return min(k_functional_terms(f, delta, window, step, radii).values())


# ---------------------------------------------------------------------------
# weighted space
# ---------------------------------------------------------------------------

def _norm_grid(space, x_max):
    fine_top = min(x_max, 100.0)
    xs = _grid(0.0, fine_top, space.norm_grid_step)
    if x_max > fine_top:
        xs = np.concatenate([xs, np.geomspace(fine_top, x_max, 4000)[1:]])
    return xs


def weighted_norm(f, space=None):
    """||f||_rho = sup |f(x)| / (1 + x^2); the window grows until the tail is negligible"""
    space = space or WeightedSpaceParams()
    _check_growth(f)
    x_max = space.x_max
    while True:
        xs = _norm_grid(space, x_max)
        ratios = np.abs(f(xs)) / space.rho(xs)
        interior = float(np.max(ratios))
        tail = float(ratios[-1])
        if f.growth >= 2 or tail <= space.tail_rtol * interior or x_max >= 1e12:
            break
        x_max *= 10
    if f.rho_limit is not None:
        interior = max(interior, abs(f.rho_limit))
    logger.debug("weighted norm of %s on [0, %g]: sup %.6g, tail ratio %.3g", f.name, x_max, interior, tail)
    return interior


# ---------------------------------------------------------------------------
# properties of the weighted modulus
# ---------------------------------------------------------------------------

def omega_scaling_holds(f, lam, delta, window=WEIGHTED_WINDOW, step=None):
    """Omega(lam*delta) <= 2(1+lam)(1+delta^2) Omega(delta), both on the same grid"""
    step = step or min(0.01, min(delta, lam * delta) / 10)
    small, large = modulus_profile("Omega", f, sorted([delta, lam * delta]), window, step, refine=False)
    at = {small.delta: small.value, large.delta: large.value}
    return at[lam * delta] <= 2 * (1 + lam) * (1 + delta ** 2) * at[delta] + 1e-12


def omega_vanishes(f, small=1e-4, large=1.0, window=(0.0, 5.0)):
    """Grid version of Omega(f; delta) -> 0: Omega(small) <= 0.01 Omega(large)"""
    tiny = weighted_modulus_Omega(f, small, window, refine=False)
    big = weighted_modulus_Omega(f, large, window, step=small * 10, refine=False)
    return tiny <= 0.01 * big


def pointwise_inequality_violations(f, delta, t, x, omega):
    """Pairs breaking |f(t)-f(x)| <= 2(|t-x|/delta + 1) Omega (1+x^2)(1+(t-x)^2).

    omega should already be inflated. Returns the indices of violating pairs.
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    d = t - x
    lhs = np.abs(f(t) - f(x))
    rhs = 2 * (np.abs(d) / delta + 1) * omega * (1 + x * x) * (1 + d * d)
    return np.flatnonzero(lhs > rhs + 1e-12)


def arithmetic_inequality_holds(t, x, delta):
    """(|t-x|/delta + 1)(1+(t-x)^2) <= 2(1+delta^2)(1+(t-x)^4/delta^4), elementwise"""
    d = np.abs(np.asarray(t, dtype=float) - np.asarray(x, dtype=float))
    delta = np.asarray(delta, dtype=float)
    lhs = (d / delta + 1) * (1 + d * d)
    rhs = 2 * (1 + delta * delta) * (1 + (d / delta) ** 4)
    return lhs <= rhs * (1 + 1e-12)
