"""Exception types raised across the package."""


class DyadicError(Exception):
    """Base class for all package errors."""


class DegenerateSize(DyadicError, ValueError):
    """Fewer than four nodes: no tetrad exists."""


class DegenerateHessian(DyadicError, ArithmeticError):
    """The tetrad-averaged squared regressor difference is (numerically) zero."""


class DegenerateVariance(DyadicError, ArithmeticError):
    """An asymptotic-variance estimate is not strictly positive."""


class IngestError(DyadicError, ValueError):
    """A dyad CSV file is malformed or incomplete."""


class OracleInputError(DyadicError, ValueError):
    """An oracle was called on data lacking the latent truth it needs."""
