class CoreError(Exception):
    """Base exception for core domain errors."""

    pass


class DatasetLoadError(CoreError):
    """Raised when a dataset file cannot be parsed into a Dataset."""

    def __init__(
        self,
        path: str,
        reason: str,
        row: int | None = None,
        column: str | None = None,
    ):
        location = ""
        if row is not None:
            location += f" at row {row}"
        if column is not None:
            location += f", column '{column}'"
        super().__init__(f"Failed to load dataset '{path}'{location}: {reason}")
        self.row = row
        self.column = column


class ConstantColumnError(CoreError):
    """Raised when a variable has zero standard deviation and cannot be standardized."""

    def __init__(self, variable_name: str):
        super().__init__(
            f"Variable '{variable_name}' is constant and cannot be standardized"
        )
        self.variable_name = variable_name


class UnknownFixtureError(CoreError):
    """Raised when a ground-truth fixture name is not recognized."""

    def __init__(self, name: str, available: list[str]):
        super().__init__(
            f"Unknown ground-truth fixture '{name}' (available: {', '.join(available)})"
        )


class ArtifactValidationError(CoreError):
    """Raised when a stored stage artifact does not match its expected schema."""

    def __init__(self, artifact: str, field: str, message: str = "invalid field"):
        super().__init__(f"{message} '{field}' in artifact '{artifact}'")
        self.artifact = artifact
        self.field = field
