"""Exception types shared across the package."""


class QlithoError(Exception):
    """Base class for all package-specific errors."""


class StateValidationError(QlithoError, ValueError):
    """A state value violates its invariants.

    Carries the full list of violations so callers can report them all.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class CutoffExceededError(QlithoError, ValueError):
    """A creation operator would push an occupation past the vector's cutoff."""

    def __init__(self, occupations, mode, cutoff):
        self.occupations = tuple(occupations)
        self.mode = mode
        self.cutoff = cutoff
        ket = ",".join(str(n) for n in self.occupations)
        super().__init__(
            f"create on mode {mode} exceeds cutoff {cutoff} for ket |{ket}>"
        )


class JobValidationError(QlithoError, ValueError):
    """A CLI job file violates the job schema."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class NumericError(QlithoError, RuntimeError):
    """A numerical evaluation produced non-finite values."""


class OptimizationAbort(QlithoError, RuntimeError):
    """The optimizer cannot continue (e.g. an entire generation was rejected)."""
