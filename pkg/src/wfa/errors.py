"""Exception types shared across the package.

Input problems subclass ``ValueError`` and numeric failures subclass
``ArithmeticError`` so callers (notably the CLI) can map them to exit codes.
"""


class InputError(ValueError):
    """Malformed or out-of-domain input."""


class NumericalError(ArithmeticError):
    """A computation could not produce a trustworthy number."""


class ConvergenceError(NumericalError):
    """An iterative method hit its iteration cap."""


class InvalidNormalizerError(NumericalError):
    """The variance normalizer for a treatment contrast is not positive."""
