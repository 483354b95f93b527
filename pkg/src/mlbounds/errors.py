"""Exception hierarchy; each class maps to one CLI exit code."""


class BoundsError(Exception):
    exit_code = 1


class ConfigError(BoundsError, ValueError):
    """Malformed input, inconsistent arguments, unsupported bound/channel pairing."""

    exit_code = 2


class NumericalError(BoundsError, ArithmeticError):
    """Quadrature failure, divergent integral, optimizer with no feasible start."""

    exit_code = 3


class SizeGuardError(BoundsError):
    """Problem too large for exhaustive enumeration."""

    exit_code = 4
