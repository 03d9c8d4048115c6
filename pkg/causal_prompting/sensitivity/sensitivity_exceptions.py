class SensitivityError(Exception):
    """Base exception for sensitivity analysis errors."""

    pass


class DegenerateFitError(SensitivityError):
    """Raised when a least-squares design has no unique solution."""

    def __init__(self, model: str, reason: str):
        super().__init__(f"Cannot fit {model}: {reason}")
        self.model = model


class PseudoResultError(SensitivityError):
    """Raised when a pseudo discovery result cannot be built."""

    def __init__(self, reason: str):
        super().__init__(f"Invalid pseudo-result: {reason}")


class SweepPointError(SensitivityError):
    """Raised when a sweep grid point fails, naming the point."""

    def __init__(self, coefficient: float | None, probability: float | None, reason: str):
        super().__init__(
            f"Sweep point (c={coefficient}, b={probability}) failed: {reason}"
        )
        self.coefficient = coefficient
        self.probability = probability
