"""Exception types raised by the solvers."""


class ConfigurationError(ValueError):
    """Invalid parameter or mismatched problem dimensions."""


class NumericalError(ArithmeticError):
    """A linear solve or factorisation could not be carried out."""


class DivergenceError(NumericalError):
    """Non-finite values appeared in the iterates or residuals."""
