import os


class SecretStr:
    """
    Wrapper for sensitive strings (API keys) to prevent accidental logging or printing.
    """

    def __init__(self, value: str):
        self._value = value

    def __repr__(self) -> str:
        return "**********"

    def __str__(self) -> str:
        return "**********"

    def __bool__(self) -> bool:
        return bool(self._value)

    @classmethod
    def from_env(cls, variable_name: str) -> "SecretStr":
        """
        Reads a secret from an environment variable.

        :param variable_name: Name of the environment variable.
        :return: The wrapped secret.
        :raises ValueError: If the variable is unset or empty.
        """
        value = os.environ.get(variable_name, "")
        if not value:
            raise ValueError(f"Environment variable '{variable_name}' is not set.")
        return cls(value)

    def get_secret_value(self) -> str:
        """
        Returns the actual secret value.
        :return: The secret string value.
        """
        return self._value
