"""Exception types shared across the package."""


class SvamError(Exception):
    """Base class for all package-specific errors."""


class SingularSystemError(SvamError):
    """Weighted normal equations are numerically singular.

    Carries the condition-number estimate that triggered the failure so
    callers can decide whether a jittered retry is worthwhile.
    """

    def __init__(self, condition: float, message: str | None = None):
        self.condition = condition
        super().__init__(message or f"weighted system numerically singular (cond ~ {condition:.3e})")


class DegenerateWeightsError(SvamError):
    """All observation weights are zero (or their sum is)."""


class NonConvergenceError(SvamError):
    """An iterative solver hit its iteration cap before reaching tolerance.

    Carries the final gradient norm.
    """

    def __init__(self, grad_norm: float, iterations: int):
        self.grad_norm = grad_norm
        self.iterations = iterations
        super().__init__(
            f"solver did not reach tolerance in {iterations} iterations "
            f"(final gradient norm {grad_norm:.3e})"
        )


class TuningError(SvamError):
    """Every grid point of a hyperparameter search failed.

    ``diagnostics`` maps each failed grid point to the error it raised.
    """

    def __init__(self, diagnostics: dict):
        self.diagnostics = diagnostics
        super().__init__(f"all {len(diagnostics)} grid points failed during tuning")
