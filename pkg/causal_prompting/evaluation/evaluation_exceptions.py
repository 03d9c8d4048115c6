class EvaluationError(Exception):
    """Base exception for evaluation errors."""

    pass


class DimensionMismatchError(EvaluationError):
    """Raised when compared matrices do not have the same shape."""

    def __init__(self, estimated: tuple[int, ...], reference: tuple[int, ...]):
        super().__init__(
            f"Estimated matrix of shape {estimated} cannot be compared with "
            f"a reference of shape {reference}"
        )


class NotADagError(EvaluationError):
    """Raised when a structural equation model is asked to fit a cyclic graph."""

    def __init__(self):
        super().__init__("Only acyclic graphs can be fitted as recursive structural equation models")


class UnderidentifiedModelError(EvaluationError):
    """Raised when a model has more free parameters than the data supports."""

    def __init__(self, parameters: int, limit: int, reason: str):
        super().__init__(f"Model with {parameters} free parameters exceeds {limit} {reason}")
        self.parameters = parameters
