from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from typing import Self

TokenCandidates = tuple[tuple[str, float], ...]
"""(token text, log-probability) candidates of one generated token position."""


@dataclass(slots=True, frozen=True, kw_only=True)
class CompletionResult:
    """
    One completion with the log-probabilities of the most likely tokens.
    """

    text: str
    """Generated reply."""
    top_logprobs: tuple[TokenCandidates, ...] = field(default_factory=tuple)
    """Candidates for each generated token position, in generation order."""

    def __post_init__(self):
        """
        Freezes the candidate lists and checks that every log-probability is <= 0.
        """
        positions = tuple(
            tuple((str(token), float(logprob)) for token, logprob in candidates)
            for candidates in self.top_logprobs
        )
        for candidates in positions:
            for token, logprob in candidates:
                if logprob > 0:
                    raise ValueError(
                        f"Log-probability of token '{token}' must be <= 0, got {logprob}."
                    )
        object.__setattr__(self, "top_logprobs", positions)


class LlmBackend(ABC):
    """Abstract base class for chat-completion backends."""

    model_id: str
    """Identifier of the model answering the prompts."""

    async def __aenter__(self) -> "Self":
        return self

    async def __aexit__(self, exc_type, exc_val, exc_tb) -> None:
        await self.close()

    @abstractmethod
    async def complete(
        self,
        prompt: str,
        temperature: float,
        want_logprobs: bool = True,
        shot: int = 0,
    ) -> CompletionResult:
        """
        Requests one single-turn completion.

        :param prompt: User message.
        :param temperature: Sampling temperature (>= 0).
        :param want_logprobs: Whether per-position candidate log-probabilities are needed.
        :param shot: Repetition index, part of the cache key and of the mock's seed.
        :return: The completion.
        """
        pass

    async def close(self) -> None:
        """
        Releases the resources held by the backend.
        """
        pass
