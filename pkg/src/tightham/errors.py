"""Exception taxonomy shared across the package."""


class TighthamError(Exception):
    """Base class for all package-specific errors."""


class FormatError(TighthamError):
    """Malformed .h3 input; carries the offending line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EscalationFailure(TighthamError):
    """Degree escalation found no candidate vertex at some step."""

    def __init__(self, step, pair):
        self.step = step
        self.pair = pair
        super().__init__(f"no escalation candidate at step {step} from pair {pair}")


class JoinFailure(TighthamError):
    """Both escalations succeeded but no joining pair closed the connection."""

    def __init__(self, left, right):
        self.left = left
        self.right = right
        super().__init__(f"no join between {left} and {right}")


class ReservoirFailure(TighthamError):
    """Resampling budget exhausted; carries the constraint violations seen last."""

    def __init__(self, violations, retries):
        self.violations = violations
        self.retries = retries
        super().__init__(
            f"no admissible reservoir after {retries} retries; "
            f"last violations: {violations[:3]}{'...' if len(violations) > 3 else ''}"
        )


class AbsorbMatchingError(TighthamError):
    """Leftover vertices could not all be matched to eligible absorbers."""

    def __init__(self, unmatched):
        self.unmatched = sorted(unmatched)
        super().__init__(f"unabsorbable vertices: {self.unmatched}")


class CapacityError(TighthamError):
    """A stage was asked to do more than its inputs can support."""


class StageFailure(TighthamError):
    """A pipeline stage failed; wraps the underlying cause."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage!r} failed: {cause}")
