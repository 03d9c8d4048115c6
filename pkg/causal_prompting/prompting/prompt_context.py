from dataclasses import dataclass
from enum import Enum

from causal_prompting.core.graph import CausalGraph, Method
from causal_prompting.scd.bootstrap import BootstrapSummary


class Pattern(str, Enum):
    """
    Amount of discovery output embedded in the knowledge-generation prompt.
    Inherits from str to handle YAML string matching automatically.
    """

    P0 = "P0"
    P1 = "P1"
    P2 = "P2"
    P3 = "P3"
    P4 = "P4"

    @classmethod
    def from_config(cls, value: int | str) -> "Pattern":
        """
        Parses a pattern given either as its number (0..4) or its name ("P2").

        :param value: Configured value.
        :return: The pattern.
        :raises ValueError: If the value names no pattern.
        """
        text = str(value).strip().upper()
        if not text.startswith("P"):
            text = f"P{text}"
        return cls(text)

    @property
    def number(self) -> int:
        return int(self.value[1:])

    @property
    def uses_bootstrap(self) -> bool:
        """
        Tells whether the pattern embeds bootstrap probabilities.

        :return: True for Patterns 2 and 4.
        """
        return self in (Pattern.P2, Pattern.P4)

    @property
    def uses_coefficients(self) -> bool:
        """
        Tells whether the pattern embeds causal coefficients.

        :return: True for Patterns 3 and 4.
        """
        return self in (Pattern.P3, Pattern.P4)


@dataclass(slots=True, frozen=True, kw_only=True)
class PromptContext:
    """
    Everything needed to render the prompts of one ordered variable pair.
    """

    theme: str
    """Theme of the causal inference."""
    variable_descriptions: str
    """Description of all the variables."""
    dataset_description: str
    """Description of the dataset the discovery ran on."""
    method: Method
    """Discovery method that produced the graph."""
    pattern: Pattern
    """Prompting pattern."""
    variable_names: tuple[str, ...]
    """Ordered variable labels."""
    effect: int
    """Index i of the effect variable x_i."""
    cause: int
    """Index j of the cause variable x_j."""
    scd_graph: CausalGraph | None = None
    """Graph found without prior knowledge (unused by Pattern 0)."""
    bootstrap: BootstrapSummary | None = None
    """Bootstrap probabilities (Patterns 2 and 4)."""
    algorithm_name: str | None = None
    """Algorithm name written in the prompt; defaults to the method's display name."""

    def __post_init__(self):
        """
        Validates the pair indices.
        """
        size = len(self.variable_names)
        if not (0 <= self.effect < size and 0 <= self.cause < size):
            raise ValueError(
                f"Pair ({self.effect}, {self.cause}) is out of range for {size} variables."
            )
        if self.effect == self.cause:
            raise ValueError("A prompt pair needs two distinct variables.")

    @property
    def algorithm(self) -> str:
        return self.algorithm_name or self.method.display_name

    @property
    def cause_name(self) -> str:
        return self.variable_names[self.cause]

    @property
    def effect_name(self) -> str:
        return self.variable_names[self.effect]
