class BubbleError(Exception):
    """Base class for every error raised by the bubble solver."""


class AdmissibilityError(BubbleError, ValueError):
    """The state left the regime where the formulation is well defined.

    Raised by the size and length guards and by the self-intersection check.
    """


class ConvergenceError(BubbleError, RuntimeError):
    """An iterative solve did not reach its tolerance."""

    def __init__(self, message: str, iterations: int = 0, increment: float = float("nan")):
        super().__init__(message)
        self.iterations = iterations
        self.increment = increment


class ConfigError(BubbleError, ValueError):
    """A run configuration is malformed; the message names the offending field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
