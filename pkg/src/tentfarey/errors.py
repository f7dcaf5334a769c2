"""Exception types shared across the package.

The CLI maps InputError to exit code 2 and CapacityError to exit code 3.
"""


class InputError(ValueError):
    """Invalid user input: out-of-range parameter, malformed word or observable."""


class CapacityError(RuntimeError):
    """Requested computation exceeds a hard resource cap (tree depth, grid size)."""


class NumericalDomainError(ArithmeticError):
    """Evaluation hit a point where the requested quantity is not finite or not defined."""


class UnsupportedError(InputError):
    """Combination of options that the chosen backend refuses to handle."""
