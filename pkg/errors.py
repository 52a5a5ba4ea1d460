class ApproximationError(Exception):
    """Base class for every error raised by the operator library"""


class InvalidParametersError(ApproximationError, ValueError):
    """Operator parameters, series policy, quadrature spec or grid are not admissible"""


class DomainViolationError(ApproximationError, ValueError):
    """Evaluation point lies outside the operator's domain"""


class TailNotAbsorbedError(ApproximationError):
    """The hard cap on the summation index was hit before the mass criterion"""

    def __init__(self, params, x, mass, k_max_hard, tail_epsilon):
        self.params = params
        self.x = x
        self.mass = mass
        self.k_max_hard = k_max_hard
        self.tail_epsilon = tail_epsilon
        super().__init__(
            f"Tail not absorbed at x={x} for {params}: mass {mass:.17g} after "
            f"k_max_hard={k_max_hard} is below 1 - {tail_epsilon:g}"
        )


class QuadratureError(ApproximationError):
    """Quadrature did not reach its tolerance on one interval"""

    def __init__(self, lo, hi, message):
        self.lo = lo
        self.hi = hi
        super().__init__(f"Quadrature failed on [{lo!r}, {hi!r}]: {message}")


class ModulusWindowError(ApproximationError, ValueError):
    """The supremum window is too small for the requested delta"""


class GrowthClassError(ApproximationError, ValueError):
    """Function grows faster than the weight rho(x) = 1 + x^2"""


class CertificateViolationError(ApproximationError):
    """A sampled pair violates a Lipschitz-type certificate"""

    def __init__(self, t, x, lhs, rhs):
        self.t = t
        self.x = x
        super().__init__(
            f"Lip* certificate violated at t={t!r}, x={x!r}: {lhs:.6g} > {rhs:.6g}"
        )


class ConfigError(ApproximationError):
    """Experiment configuration is invalid"""
