class KnowledgeError(Exception):
    """Base exception for prior knowledge construction errors."""

    pass


class CandidateExplosionError(KnowledgeError):
    """Raised when the acyclic transform branches into too many candidates."""

    def __init__(self, count: int, cap: int):
        super().__init__(
            f"The acyclic transform produced more than {cap} candidates ({count}); "
            "use a smaller variable set"
        )
        self.count = count
        self.cap = cap


class CycleEnumerationError(KnowledgeError):
    """Raised when the Forced entries form too many elementary cycles to enumerate."""

    def __init__(self, cap: int):
        super().__init__(
            f"The Forced entries contain more than {cap} elementary cycles; "
            "use a smaller variable set"
        )
        self.cap = cap


class CandidateSelectionError(KnowledgeError):
    """Raised when discovery fails for every acyclic candidate."""

    def __init__(self, diagnostics: list[str]):
        details = "; ".join(diagnostics)
        super().__init__(f"No acyclic candidate could be evaluated: {details}")
        self.diagnostics = diagnostics
