class LinkOptError(Exception):
    """Base class for all toolkit errors"""


class ConfigError(LinkOptError, ValueError):
    """Invalid configuration value, unknown config key or bad CLI argument"""


class ShapeMismatch(LinkOptError, ValueError):
    """Matrix dimensions do not agree"""


class DistanceOutOfRange(LinkOptError, ValueError):
    """Distance outside the validity range of the path-loss model"""


class SingularNoise(LinkOptError, ArithmeticError):
    """Noise covariance (or receiver Gram matrix) is not positive definite"""


class SingularMse(LinkOptError, ArithmeticError):
    """MSE matrix cannot be inverted"""


class SingularRecovery(LinkOptError, ArithmeticError):
    """I + H_s F is numerically singular"""


class InfeasibleSubproblem(LinkOptError, ArithmeticError):
    """Subproblem constraint set is empty"""


class DegenerateForm(LinkOptError, ArithmeticError):
    """Quadratic form or constraint matrix cannot be factorized"""


class NonMonotone(LinkOptError, RuntimeError):
    """WMMSE objective increased after a block update"""
