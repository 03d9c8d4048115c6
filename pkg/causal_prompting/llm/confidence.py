import asyncio
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from loguru import logger

from causal_prompting.core.core_exceptions import ArtifactValidationError
from causal_prompting.core.serialization import (
    matrix_field,
    read_yaml_artifact,
    write_matrix_table,
    write_yaml,
)
from causal_prompting.llm.llm_backend import CompletionResult, LlmBackend
from causal_prompting.llm.llm_exceptions import (
    AnswerExtractionError,
    LlmError,
    PairQueryError,
    TooManyFailedPairsError,
)
from causal_prompting.llm.request_limiter import RequestLimiter
from causal_prompting.prompting.prompt_builder import build_integration_prompt
from causal_prompting.regex import ANSWER_TOKEN_STRIP_PATTERN

_YES = "yes"
_NO = "no"


@dataclass(slots=True, frozen=True, kw_only=True)
class PairConfidence:
    """
    Aggregate of the M single-shot answers to one knowledge-integration prompt.
    """

    mean: float
    """Mean yes-probability."""
    stderr: float
    """Sample standard deviation of the yes-probabilities over sqrt(M)."""
    anti_mean: float
    """Mean no-probability."""
    yes_probabilities: tuple[float, ...]
    """Per-shot yes-probabilities."""
    no_probabilities: tuple[float, ...]
    """Per-shot no-probabilities."""


@dataclass(slots=True, frozen=True, kw_only=True)
class PairTranscript:
    """
    Prompts and replies exchanged for one ordered pair (effect i, cause j).
    """

    effect: int
    cause: int
    q1: str
    answer: str = ""
    q2: str = ""
    responses: tuple[CompletionResult, ...] = ()
    confidence: PairConfidence | None = None
    error: str | None = None


@dataclass(slots=True, frozen=True, kw_only=True, eq=False)
class ConfidenceMatrix:
    """
    Mean yes/no probabilities of every ordered pair; the diagonal and failed
    pairs hold NaN.
    """

    variable_names: tuple[str, ...]
    """Ordered variable labels."""
    mean: np.ndarray
    """Mean yes-probability of x_j -> x_i at (i, j)."""
    stderr: np.ndarray
    """Standard error of the mean yes-probability."""
    anti_mean: np.ndarray
    """Mean no-probability."""
    samples: int
    """Number of shots M per pair."""
    failed_pairs: frozenset[tuple[int, int]] = field(default_factory=frozenset)
    """Pairs (i, j) whose queries failed."""

    def __post_init__(self):
        """
        Validates shapes and ranges and writes NaN on the diagonal.
        """
        if self.samples < 1:
            raise ValueError(f"Confidence needs at least one sample, got {self.samples}.")
        size = len(self.variable_names)
        object.__setattr__(self, "variable_names", tuple(self.variable_names))
        object.__setattr__(self, "failed_pairs", frozenset(self.failed_pairs))
        for name in ("mean", "stderr", "anti_mean"):
            matrix = np.array(getattr(self, name), dtype=float)
            if matrix.shape != (size, size):
                raise ValueError(f"{name} must be {size}x{size}, got {matrix.shape}.")
            np.fill_diagonal(matrix, np.nan)
            defined = matrix[~np.isnan(matrix)]
            if np.any(defined < 0) or (name != "stderr" and np.any(defined > 1)):
                raise ValueError(f"{name} entries are out of range.")
            matrix.setflags(write=False)
            object.__setattr__(self, name, matrix)

    @property
    def size(self) -> int:
        return len(self.variable_names)


def extract_yes_no_probability(result: CompletionResult) -> tuple[float, float]:
    """
    Reads the yes- and no-probabilities at the first generated token position
    whose candidates contain either answer. Candidate tokens are stripped of
    whitespace and punctuation and case-folded; variants of one answer are summed.

    :param result: Completion with top log-probabilities.
    :return: (p, q), each in [0, 1]; an absent class gives 0.
    :raises AnswerExtractionError: If no position carries a yes/no candidate.
    """
    for candidates in result.top_logprobs:
        yes = no = 0.0
        matched = False
        for token, logprob in candidates:
            normalized = ANSWER_TOKEN_STRIP_PATTERN.sub("", token).casefold()
            if normalized == _YES:
                yes += math.exp(logprob)
                matched = True
            elif normalized == _NO:
                no += math.exp(logprob)
                matched = True
        if matched:
            return min(yes, 1.0), min(no, 1.0)
    raise AnswerExtractionError(result.text)


def _standard_error(values: list[float]) -> float:
    if len(values) < 2:
        return 0.0
    return float(np.std(values, ddof=1) / math.sqrt(len(values)))


async def confidence_for_pair(
    backend: LlmBackend,
    q2: str,
    samples: int,
    temperature: float,
    limiter: RequestLimiter | None = None,
) -> tuple[PairConfidence, tuple[CompletionResult, ...]]:
    """
    Asks the knowledge-integration prompt M times and averages the per-shot
    probabilities (mean of exponentials, never of log-probabilities).

    :param backend: Completion backend.
    :param q2: Knowledge-integration prompt.
    :param samples: Number of shots M.
    :param temperature: Sampling temperature.
    :param limiter: Optional concurrency and rate limiter.
    :return: The aggregate and the raw responses, in shot order.
    :raises LlmError: If any shot fails.
    """
    if samples < 1:
        raise ValueError(f"Confidence needs at least one sample, got {samples}.")
    limiter = limiter or RequestLimiter()

    async def shot(index: int) -> CompletionResult:
        async with limiter:
            return await backend.complete(q2, temperature, want_logprobs=True, shot=index)

    responses = await asyncio.gather(*(shot(index) for index in range(samples)))
    answers = [extract_yes_no_probability(response) for response in responses]
    yes = [p for p, _ in answers]
    no = [q for _, q in answers]
    confidence = PairConfidence(
        mean=float(np.mean(yes)),
        stderr=_standard_error(yes),
        anti_mean=float(np.mean(no)),
        yes_probabilities=tuple(yes),
        no_probabilities=tuple(no),
    )
    return confidence, tuple(responses)


async def query_pair(
    backend: LlmBackend,
    effect: int,
    cause: int,
    variable_names: tuple[str, ...],
    q1: str,
    samples: int,
    temperature: float,
    limiter: RequestLimiter,
) -> PairTranscript:
    """
    Runs the two-prompt exchange of one ordered pair: one knowledge-generation
    reply, then M knowledge-integration shots. Failures are recorded in the
    transcript instead of raised.

    :return: The transcript, with either a confidence or an error.
    """
    cause_name, effect_name = variable_names[cause], variable_names[effect]
    try:
        async with limiter:
            reply = await backend.complete(q1, temperature, want_logprobs=False, shot=0)
        q2 = build_integration_prompt(q1, reply.text, cause_name, effect_name)
        confidence, responses = await confidence_for_pair(
            backend, q2, samples, temperature, limiter
        )
    except LlmError as e:
        error = PairQueryError(cause_name, effect_name, str(e))
        logger.warning(str(error))
        return PairTranscript(effect=effect, cause=cause, q1=q1, error=str(error))

    logger.debug(
        f"Pair {cause_name} -> {effect_name}: "
        f"p={confidence.mean:.4f} se={confidence.stderr:.4f} r={confidence.anti_mean:.4f}"
    )
    return PairTranscript(
        effect=effect,
        cause=cause,
        q1=q1,
        answer=reply.text,
        q2=q2,
        responses=responses,
        confidence=confidence,
    )


async def collect_confidence_matrix(
    backend: LlmBackend,
    prompts: dict[tuple[int, int], str],
    variable_names: tuple[str, ...],
    samples: int,
    temperature: float,
    limiter: RequestLimiter | None = None,
    max_failed_ratio: float = 0.1,
) -> tuple[ConfidenceMatrix, list[PairTranscript]]:
    """
    Queries every ordered pair concurrently and assembles the confidence matrix.

    :param backend: Completion backend.
    :param prompts: Knowledge-generation prompt per (effect i, cause j).
    :param variable_names: Ordered variable labels.
    :param samples: Number of shots M per pair.
    :param temperature: Sampling temperature.
    :param limiter: Concurrency and rate limiter shared by all requests.
    :param max_failed_ratio: Largest tolerated share of failed pairs.
    :return: The matrix and the transcripts in row-major pair order.
    :raises TooManyFailedPairsError: If the failed share exceeds max_failed_ratio.
    """
    limiter = limiter or RequestLimiter()
    pairs = sorted(prompts)
    logger.info(f"Querying {backend.model_id} on {len(pairs)} pairs with {samples} shots each")
    transcripts = await asyncio.gather(
        *(
            query_pair(
                backend, effect, cause, variable_names, prompts[(effect, cause)],
                samples, temperature, limiter,
            )
            for effect, cause in pairs
        )
    )

    size = len(variable_names)
    mean = np.full((size, size), np.nan)
    stderr = np.full((size, size), np.nan)
    anti_mean = np.full((size, size), np.nan)
    failed = set()
    for transcript in transcripts:
        key = (transcript.effect, transcript.cause)
        if transcript.confidence is None:
            failed.add(key)
            continue
        mean[key] = transcript.confidence.mean
        stderr[key] = transcript.confidence.stderr
        anti_mean[key] = transcript.confidence.anti_mean

    if pairs and len(failed) > max_failed_ratio * len(pairs):
        raise TooManyFailedPairsError(len(failed), len(pairs), max_failed_ratio)

    matrix = ConfidenceMatrix(
        variable_names=variable_names,
        mean=mean,
        stderr=stderr,
        anti_mean=anti_mean,
        samples=samples,
        failed_pairs=frozenset(failed),
    )
    return matrix, list(transcripts)


def _defined_pairs(cm: ConfidenceMatrix) -> list[tuple[int, int]]:
    return [
        (i, j)
        for i in range(cm.size)
        for j in range(cm.size)
        if i != j and not np.isnan(cm.mean[i, j]) and not np.isnan(cm.anti_mean[i, j])
    ]


def faithfulness_check(cm: ConfidenceMatrix, tolerance: float = 0.05) -> list[tuple[int, int]]:
    """
    Pairs whose yes- and no-probabilities do not add up to one within tolerance.

    :param cm: Confidence matrix.
    :param tolerance: Allowed deviation of p + r from 1.
    :return: Violating pairs (i, j), row-major; undefined entries are skipped.
    """
    return [
        (i, j)
        for i, j in _defined_pairs(cm)
        if abs(cm.mean[i, j] + cm.anti_mean[i, j] - 1.0) > tolerance
    ]


def faithfulness_summary(cm: ConfidenceMatrix) -> dict[str, int]:
    """
    Counts pairs per band of p + r.

    :param cm: Confidence matrix.
    :return: Counts for "complete" (0.99 < s <= 1.01), "partial" (0.95 <= s <= 0.99),
        "violated" (s < 0.95) and "excess" (s > 1.01).
    """
    summary = {"complete": 0, "partial": 0, "violated": 0, "excess": 0}
    for i, j in _defined_pairs(cm):
        total = cm.mean[i, j] + cm.anti_mean[i, j]
        if total > 1.01:
            summary["excess"] += 1
        elif total > 0.99:
            summary["complete"] += 1
        elif total >= 0.95:
            summary["partial"] += 1
        else:
            summary["violated"] += 1
    return summary


def save_confidence(path: str | Path, cm: ConfidenceMatrix) -> None:
    """
    Stores a confidence matrix as YAML plus a labeled CSV table of the means.

    :param path: Destination YAML file.
    :param cm: Matrix to store.
    """
    path = Path(path)
    write_yaml(
        path,
        {
            "artifact": "confidence_matrix",
            "variables": list(cm.variable_names),
            "samples": cm.samples,
            "mean": cm.mean.tolist(),
            "stderr": cm.stderr.tolist(),
            "anti_mean": cm.anti_mean.tolist(),
            "failed_pairs": [list(pair) for pair in sorted(cm.failed_pairs)],
        },
    )
    write_matrix_table(path.with_suffix(".csv"), cm.mean, cm.variable_names)


def load_confidence(path: str | Path) -> ConfidenceMatrix:
    """
    Loads a confidence matrix stored by save_confidence.

    :param path: YAML file.
    :return: The matrix.
    :raises ArtifactValidationError: If a field is missing or malformed.
    """
    artifact = str(path)
    content = read_yaml_artifact(
        path, "confidence_matrix", ("variables", "samples", "mean", "stderr", "anti_mean")
    )
    names = tuple(str(name) for name in content["variables"])
    try:
        return ConfidenceMatrix(
            variable_names=names,
            mean=matrix_field(content, "mean", len(names), artifact),
            stderr=matrix_field(content, "stderr", len(names), artifact),
            anti_mean=matrix_field(content, "anti_mean", len(names), artifact),
            samples=int(content["samples"]),
            failed_pairs=frozenset(
                (int(i), int(j)) for i, j in content.get("failed_pairs") or []
            ),
        )
    except (TypeError, ValueError) as e:
        raise ArtifactValidationError(artifact, "mean", f"Invalid matrix ({e}) in field")
