class PromptingError(Exception):
    """Base exception for prompt rendering errors."""

    pass


class UnsupportedPatternError(PromptingError):
    """Raised when a prompting pattern cannot be used with a discovery method."""

    def __init__(self, pattern: str, method: str):
        super().__init__(
            f"Prompting pattern {pattern} is not supported with {method} "
            "(Patterns 3 and 4 need DirectLiNGAM coefficients)"
        )
        self.pattern = pattern
        self.method = method


class MissingContextError(PromptingError):
    """Raised when a prompt needs a discovery output that was not supplied."""

    def __init__(self, pattern: str, missing: str):
        super().__init__(f"Prompting pattern {pattern} needs {missing}, which is missing")
        self.pattern = pattern
        self.missing = missing
