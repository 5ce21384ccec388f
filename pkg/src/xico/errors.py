"""Exception hierarchy shared by all xico modules."""


class XicoError(Exception):
    """Base class for every error raised by xico."""


class DataError(XicoError, ValueError):
    """Input data cannot be used (CLI exit code 2)."""


class DataFileNotFound(DataError, FileNotFoundError):
    pass


class MissingColumn(DataError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"column {column!r} not found in header")


class NonNumericCell(DataError):
    def __init__(self, row, col, value):
        self.row, self.col, self.value = row, col, value
        super().__init__(f"non-numeric cell {value!r} at row {row}, column {col!r}")


class TooFewRows(DataError):
    def __init__(self, n):
        self.n = n
        super().__init__(f"need at least 2 data rows, got {n}")


class NoCovariates(DataError):
    def __init__(self):
        super().__init__("no covariate columns besides the response")


class ConstantResponse(DataError):
    def __init__(self):
        super().__init__("response is constant; the denominator sum is zero")


class NonFinite(DataError):
    def __init__(self, row, col):
        self.row, self.col = row, col
        super().__init__(f"non-finite value at row {row}, column {col!r}")


class DimensionMismatch(DataError):
    pass


class FewerThanTwoPoints(DataError):
    pass


class NonPsdCovariance(DataError):
    def __init__(self, d, rho):
        self.d, self.rho = d, rho
        super().__init__(
            f"covariance is not positive semidefinite for d={d}, rho={rho}: "
            f"rho^2*(d-1) = {rho * rho * (d - 1):.4g} > 1"
        )


class DomainError(XicoError, ValueError):
    pass


class PrecisionNotReached(XicoError, ArithmeticError):
    """Numerical refinement limit hit before the requested accuracy (CLI exit code 3)."""

    def __init__(self, message, estimate=None, error=None):
        self.estimate, self.error = estimate, error
        super().__init__(message)
