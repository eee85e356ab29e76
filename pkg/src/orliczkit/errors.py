"""Exception types raised by orliczkit."""


class ParameterError(ValueError):
    """A parameter violates a named admissibility constraint."""

    def __init__(self, constraint, message=None):
        self.constraint = constraint
        super().__init__(message or f"constraint violated: {constraint}")


class SaturationError(ArithmeticError):
    """Bracket expansion ran past the floating-point overflow guard."""


class DivergenceError(ValueError):
    """A defining integral diverges, so the requested object does not exist."""


class ConsistencyError(RuntimeError):
    """An internal table failed a monotonicity or round-trip check."""


class GeometryError(RuntimeError):
    """The energy does not show the expected mountain-pass shape."""


class OracleError(RuntimeError):
    """The shooting oracle could not bracket a decaying solution."""
