"""Exception types shared across the package.

Each carries the CLI exit code it maps to.
"""


class GaussSumError(Exception):
    exit_code = 1


class DomainError(GaussSumError, ValueError):
    exit_code = 2


class PrecisionError(GaussSumError, ArithmeticError):
    """Phase reduction or cascade depth cannot meet the requested accuracy."""

    exit_code = 3


class QuadratureError(GaussSumError, ArithmeticError):
    exit_code = 3


class DepthLimitError(PrecisionError):
    pass


class ResolutionError(GaussSumError, ValueError):
    exit_code = 2
