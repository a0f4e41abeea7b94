"""Exception types. The CLI maps each family to a process exit code."""


class ValidationError(ValueError):
    """Bad input: out-of-range ids, malformed shapes, invalid parameters."""


class BundleError(OSError):
    """A dataset bundle or result file could not be read or written."""


class NumericalError(ArithmeticError):
    """NaN loss, failed convergence, or a violated bound in self-check mode."""
