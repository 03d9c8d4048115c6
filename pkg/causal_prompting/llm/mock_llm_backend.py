import hashlib
import math
from collections.abc import Callable
from pathlib import Path

import numpy as np
from loguru import logger

from causal_prompting.core.serialization import read_matrix_table
from causal_prompting.llm.llm_backend import CompletionResult, LlmBackend
from causal_prompting.llm.llm_exceptions import LlmProtocolError
from causal_prompting.regex import INTEGRATION_QUESTION_PATTERN
from causal_prompting.sensitivity.se_model import SeModel

Responder = Callable[[str, str, int], float | tuple[float, float]]
"""Maps (cause name, effect name, shot) to a yes-probability or a (yes, no) pair."""

MOCK_EXPERT_REPLY = (
    "From a domain perspective, the relationship between {cause} and {effect} "
    "depends on the mechanisms linking the two quantities."
)
"""Reply the mock gives to knowledge-generation prompts."""


def _candidate(token: str, probability: float) -> tuple[str, float] | None:
    if probability <= 0:
        return None
    return token, min(math.log(probability), 0.0)


class MockLlmBackend(LlmBackend):
    """
    Deterministic backend that answers knowledge-integration prompts from a
    scripted responder, optionally jittered by the SE model.

    Knowledge-generation prompts receive a fixed reply. The jitter of each
    shot is seeded by (seed, prompt, shot), so identical runs are identical.
    """

    _responder: Responder
    """Scripted yes-probability per pair and shot."""
    _seed: int
    """Seed of the jitter."""
    _jitter: SeModel | None
    """SE model used to perturb each shot, or None for exact answers."""

    def __init__(
        self,
        responder: Responder,
        seed: int = 0,
        jitter: SeModel | None = None,
        model_id: str = "mock",
    ) -> None:
        super().__init__()
        self._responder = responder
        self._seed = seed
        self._jitter = jitter
        self.model_id = model_id

    @classmethod
    def from_probability_table(
        cls,
        path: str | Path,
        seed: int = 0,
        jitter: SeModel | None = None,
        default: float = 0.5,
    ) -> "MockLlmBackend":
        """
        Builds a mock answering with a stored probability table, where entry
        (i, j) is the yes-probability of x_j -> x_i.

        :param path: Labeled matrix table (CSV).
        :param seed: Seed of the jitter.
        :param jitter: Optional SE model.
        :param default: Probability of pairs whose names are not in the table.
        :return: The mock.
        """
        table, names = read_matrix_table(path)
        index = {name: position for position, name in enumerate(names)}

        def responder(cause: str, effect: str, shot: int) -> float:
            if cause not in index or effect not in index:
                return default
            value = float(table[index[effect], index[cause]])
            return default if np.isnan(value) else value

        return cls(responder, seed=seed, jitter=jitter, model_id=f"mock:{Path(path).name}")

    def _rng(self, prompt: str, shot: int) -> np.random.Generator:
        digest = hashlib.sha256(f"{self._seed}\x00{shot}\x00{prompt}".encode()).digest()
        return np.random.default_rng(int.from_bytes(digest[:8], "big"))

    async def complete(
        self,
        prompt: str,
        temperature: float,
        want_logprobs: bool = True,
        shot: int = 0,
    ) -> CompletionResult:
        questions = list(INTEGRATION_QUESTION_PATTERN.finditer(prompt))
        if not questions:
            return CompletionResult(text=self._knowledge_reply(prompt))

        cause = questions[-1].group("cause")
        effect = questions[-1].group("effect")
        answer = self._responder(cause, effect, shot)
        yes, no = answer if isinstance(answer, tuple) else (answer, 1.0 - answer)
        if self._jitter is not None:
            noise = self._rng(prompt, shot).normal(0.0, 1.0) * self._jitter.predict(yes)
            yes = float(np.clip(yes + noise, 0.0, 1.0))
            no = 1.0 - yes
        logger.debug(f"Mock answer for {cause} -> {effect} (shot {shot}): yes={yes:.4f}")

        candidates = tuple(
            candidate
            for candidate in (_candidate("yes", yes), _candidate("no", no))
            if candidate is not None
        )
        if want_logprobs and not candidates:
            raise LlmProtocolError("the scripted answer has neither yes nor no mass")
        return CompletionResult(
            text="yes" if yes >= no else "no",
            top_logprobs=(candidates,) if want_logprobs else (),
        )

    def _knowledge_reply(self, prompt: str) -> str:
        lines = prompt.splitlines()
        for line in reversed(lines):
            marker = "knowledge on the causal relationship between "
            if marker in line:
                pair = line.split(marker, 1)[1].rstrip(".").split(",", 1)[0]
                cause, _, effect = pair.partition(" and ")
                return MOCK_EXPERT_REPLY.format(cause=cause, effect=effect)
        return MOCK_EXPERT_REPLY.format(cause="the cause", effect="the effect")
