"""Exception types shared across the package."""


class DomainError(ValueError):
    """A precondition on arguments or configuration was violated."""


class PrecisionError(RuntimeError):
    """Adaptive refinement could not reach the requested tolerance."""


class FactorizationError(RuntimeError):
    """A cofactor could not be certified prime or split; carries the offending n."""

    def __init__(self, n: int, message: str):
        super().__init__(f"n={n}: {message}")
        self.n = n
