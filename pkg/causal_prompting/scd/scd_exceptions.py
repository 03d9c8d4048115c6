class ScdError(Exception):
    """Base exception for causal discovery errors."""

    pass


class ScdNumericalError(ScdError):
    """Raised when a discovery run hits a singular or rank-deficient computation."""

    def __init__(self, operation: str, variables: list[str] | tuple[str, ...]):
        super().__init__(f"Numerical failure in {operation} (variables: {list(variables)})")
        self.variables = tuple(variables)


class VariableCapExceededError(ScdError):
    """Raised when exact search is asked to handle more variables than its cap."""

    def __init__(self, n_variables: int, cap: int):
        super().__init__(
            f"Exact search over {n_variables} variables exceeds the cap of {cap} "
            "(the search is exponential in the number of variables)"
        )


class PriorKnowledgeCycleError(ScdError):
    """Raised when Forced entries of a prior knowledge matrix form a directed cycle."""

    def __init__(self, cycle: list[str]):
        super().__init__(
            f"Forced entries form a cycle {' -> '.join(cycle)}; "
            "run the acyclic transform on the prior knowledge first"
        )
        self.cycle = cycle


class BootstrapFailureError(ScdError):
    """Raised when too many bootstrap resamples fail."""

    def __init__(self, failed: int, total: int, max_ratio: float):
        super().__init__(
            f"{failed} of {total} bootstrap resamples failed "
            f"(more than {max_ratio:.0%} allowed)"
        )
        self.failed = failed
        self.total = total
