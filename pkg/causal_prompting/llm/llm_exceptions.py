class LlmError(Exception):
    """Base exception for language model client errors."""

    pass


class LlmTransportError(LlmError):
    """Raised when the completion endpoint stays unreachable or failing past the retry cap."""

    def __init__(self, endpoint: str, attempts: int, reason: str):
        super().__init__(
            f"Completion request to {endpoint} failed after {attempts} attempt(s): {reason}"
        )
        self.endpoint = endpoint
        self.attempts = attempts


class LlmProtocolError(LlmError):
    """Raised when a completion response does not have the expected shape."""

    def __init__(self, reason: str):
        super().__init__(f"Malformed completion response: {reason}")


class AnswerExtractionError(LlmError):
    """Raised when no generated token position carries a yes/no candidate."""

    def __init__(self, reply: str):
        preview = reply if len(reply) <= 80 else f"{reply[:77]}..."
        super().__init__(f"No yes/no answer token found in reply '{preview}'")


class PairQueryError(LlmError):
    """Raised when the queries of one ordered variable pair fail."""

    def __init__(self, cause: str, effect: str, reason: str):
        super().__init__(f"Querying {cause} -> {effect} failed: {reason}")
        self.cause = cause
        self.effect = effect


class TooManyFailedPairsError(LlmError):
    """Raised when the share of failed pairs exceeds the configured ceiling."""

    def __init__(self, failed: int, total: int, max_ratio: float):
        super().__init__(
            f"{failed} of {total} variable pairs failed (more than {max_ratio:.0%} allowed)"
        )
        self.failed = failed
        self.total = total
