import dataclasses
from dataclasses import dataclass
from enum import Enum
from typing import Any

import yaml

from causal_prompting.core.graph import Method
from causal_prompting.prompting.prompt_context import Pattern
from causal_prompting.regex import MODEL_ID_PATTERN
from causal_prompting.sensitivity.se_model import SeModel
from causal_prompting.types import SecretStr


class BackendKind(str, Enum):
    """
    Where completions come from.
    Inherits from str to handle YAML string matching automatically.
    """

    MOCK = "mock"
    LIVE = "live"


@dataclass(slots=True, frozen=True, kw_only=True)
class DatasetConfig:
    """
    Holds the location and layout of the observational data.
    """

    path: str
    """Path to the delimiter-separated data file."""
    has_header: bool = True
    """Whether the first line holds the variable names."""
    delimiter: str = ","
    """Field separator."""
    ground_truth: str | None = None
    """Bundled fixture name (AutoMPG, DWD, Sachs) or path to a labeled matrix table."""

    def __post_init__(self):
        """
        Validates that the path and delimiter are not empty.
        """
        if not self.path:
            raise ValueError("Dataset path cannot be empty.")
        if not self.delimiter:
            raise ValueError("Dataset delimiter cannot be empty.")


@dataclass(slots=True, frozen=True, kw_only=True)
class DiscoveryConfig:
    """
    Holds causal discovery configuration.
    """

    method: Method
    """Discovery algorithm."""
    bootstrap_resamples: int = 1000
    """Number of bootstrap resamples B."""
    pc_alpha: float = 0.05
    """Significance level of the PC independence tests."""
    max_variables: int = 12
    """Largest variable count exact search accepts."""
    prune_threshold: float = 1e-3
    """DirectLiNGAM coefficient pruning threshold."""
    workers: int = 1
    """Threads used for bootstrap resamples and candidate evaluation."""

    def __post_init__(self):
        """
        Validates counts and the PC significance level.
        """
        if self.bootstrap_resamples < 1:
            raise ValueError("Bootstrap resamples must be at least 1.")
        if not 0.0 < self.pc_alpha < 1.0:
            raise ValueError(f"PC alpha must lie in (0, 1), got {self.pc_alpha}.")
        if self.max_variables < 1:
            raise ValueError("Exact search variable cap must be at least 1.")
        if self.prune_threshold < 0:
            raise ValueError("Pruning threshold cannot be negative.")
        if self.workers < 1:
            raise ValueError("Workers must be at least 1.")


@dataclass(slots=True, frozen=True, kw_only=True)
class PromptingConfig:
    """
    Holds the prompt pattern and the free-text prompt blanks.
    """

    pattern: Pattern
    """How much discovery output the prompts embed."""
    theme: str
    """Theme of the causal inference."""
    variable_descriptions: str
    """Description of all the variables."""
    dataset_description: str
    """Description of the dataset."""
    algorithm_name: str | None = None
    """Algorithm name written in prompts, if it differs from the method's."""

    def __post_init__(self):
        """
        Validates that the prompt blanks are not empty.
        """
        if not self.theme:
            raise ValueError("Prompt theme cannot be empty.")
        if not self.variable_descriptions:
            raise ValueError("Variable descriptions cannot be empty.")
        if self.pattern != Pattern.P0 and not self.dataset_description:
            raise ValueError("Dataset description cannot be empty for Patterns 1 to 4.")


@dataclass(slots=True, frozen=True, kw_only=True)
class LlmConfig:
    """
    Holds LLM backend configuration.
    """

    backend: BackendKind
    """Scripted mock or live chat completions endpoint."""
    model: str = "gpt-4-0613"
    """Model identifier."""
    endpoint: str = "https://api.openai.com/v1/chat/completions"
    """Chat completions URL (live backend)."""
    api_key_env: str = "OPENAI_API_KEY"
    """Environment variable holding the API key."""
    api_key: SecretStr | None = None
    """API key, read from api_key_env for the live backend."""
    samples: int = 5
    """Shots M of the knowledge-integration prompt."""
    temperature: float = 0.7
    """Sampling temperature."""
    top_logprobs: int = 5
    """Candidates requested per generated token."""
    max_retries: int = 3
    """Attempts per request on transient failures."""
    backoff_seconds: float = 1.0
    """Base of the exponential backoff."""
    timeout: float = 120.0
    """Request timeout in seconds."""
    max_concurrency: int = 4
    """Requests in flight at once."""
    requests_per_second: float | None = None
    """Optional ceiling on request starts per second."""
    cache_dir: str | None = None
    """Directory of the response cache, or None to disable caching."""
    probability_table: str | None = None
    """Labeled matrix table scripting the mock's yes-probabilities."""
    mock_jitter: SeModel | None = None
    """SE model the mock uses to jitter each shot."""
    max_failed_ratio: float = 0.1
    """Largest tolerated share of failed pairs."""

    def __post_init__(self):
        """
        Validates the model identifier, sampling settings and backend requirements.
        """
        if not MODEL_ID_PATTERN.match(self.model):
            raise ValueError(f"Invalid model identifier '{self.model}'.")
        if self.samples < 1:
            raise ValueError("Samples per pair must be at least 1.")
        if self.temperature < 0:
            raise ValueError("Temperature cannot be negative.")
        if self.max_retries < 1:
            raise ValueError("Max retries must be at least 1.")
        if self.max_concurrency < 1:
            raise ValueError("Max concurrency must be at least 1.")
        if self.requests_per_second is not None and self.requests_per_second <= 0:
            raise ValueError("Requests per second must be positive.")
        if not 0.0 <= self.max_failed_ratio <= 1.0:
            raise ValueError("Max failed ratio must lie in [0, 1].")
        if self.backend == BackendKind.MOCK and not self.probability_table:
            raise ValueError("The mock backend needs a probability table.")
        if self.backend == BackendKind.LIVE and not self.api_key:
            raise ValueError(f"The live backend needs an API key in '{self.api_key_env}'.")


@dataclass(slots=True, frozen=True, kw_only=True)
class KnowledgeConfig:
    """
    Holds the prior knowledge thresholds.
    """

    alpha1: float = 0.05
    """Below this probability an entry is Forbidden."""
    alpha2: float = 0.95
    """From this probability on an entry is Forced."""
    candidate_cap: int = 10_000
    """Largest number of acyclic candidates per deletion round."""

    def __post_init__(self):
        """
        Validates the threshold order.
        """
        if not 0.0 <= self.alpha1 < self.alpha2 <= 1.0:
            raise ValueError(
                f"Thresholds must satisfy 0 <= alpha1 < alpha2 <= 1, got {self.alpha1} and {self.alpha2}."
            )
        if self.candidate_cap < 1:
            raise ValueError("Candidate cap must be at least 1.")


@dataclass(slots=True, frozen=True, kw_only=True)
class OutputConfig:
    """
    Holds where a run writes and how it seeds its randomness.
    """

    run_dir: str
    """Directory that receives every artifact of the run."""
    seed: int = 0
    """Root seed all stage seeds are derived from."""

    def __post_init__(self):
        if not self.run_dir:
            raise ValueError("Run directory cannot be empty.")


@dataclass(slots=True, frozen=True, kw_only=True)
class RunConfig:
    """
    Holds run configuration.
    """

    dataset_config: DatasetConfig
    discovery_config: DiscoveryConfig
    prompting_config: PromptingConfig
    llm_config: LlmConfig
    knowledge_config: KnowledgeConfig
    output_config: OutputConfig

    def __post_init__(self):
        """
        Validates that the pattern can be rendered for the method.
        """
        pattern = self.prompting_config.pattern
        method = self.discovery_config.method
        if pattern.uses_coefficients and method != Method.DIRECT_LINGAM:
            raise ValueError(
                f"Pattern {pattern.number} needs causal coefficients, "
                f"which {method.display_name} does not produce."
            )

    def to_dict(self) -> dict[str, Any]:
        """
        Plain snapshot of the configuration, without the API key.

        :return: Mapping ready to be dumped as YAML.
        """
        return {
            "dataset": _plain(self.dataset_config),
            "discovery": _plain(self.discovery_config),
            "prompting": _plain(self.prompting_config),
            "llm": _plain(self.llm_config),
            "knowledge": _plain(self.knowledge_config),
            "output": _plain(self.output_config),
        }


def _plain(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, SecretStr):
        return None
    if dataclasses.is_dataclass(value):
        return {
            field.name: _plain(getattr(value, field.name))
            for field in dataclasses.fields(value)
            if field.name != "api_key"
        }
    return value


def _load_yaml(file_path: str) -> dict[str, Any]:
    """
    Loads a YAML file and returns its content as a dictionary.

    :param file_path: Path to the YAML file.
    :return: Dictionary with the YAML content.
    """
    try:
        with open(file_path, "r", encoding="utf-8") as file:
            content = yaml.safe_load(file)
    except FileNotFoundError:
        raise ValueError(f"Configuration file '{file_path}' not found")
    except yaml.YAMLError as e:
        raise ValueError(f"Error parsing YAML file: {e}")
    if not isinstance(content, dict):
        raise ValueError(f"Configuration file '{file_path}' must contain a mapping")
    return content


def _get_dataset_config(dataset_data: dict[str, Any] | None) -> DatasetConfig:
    """
    Parses and validates the dataset configuration section.

    :param dataset_data: Raw dictionary containing dataset options.
    :return: Validated DatasetConfig object.
    """
    if not dataset_data:
        raise ValueError("Missing 'dataset' section in configuration.")

    try:
        ground_truth = dataset_data.get("ground_truth")
        return DatasetConfig(
            path=str(dataset_data["path"]),
            has_header=bool(dataset_data.get("has_header", True)),
            delimiter=str(dataset_data.get("delimiter", ",")),
            ground_truth=str(ground_truth) if ground_truth else None,
        )
    except KeyError as e:
        raise ValueError(f"Missing required field in 'dataset': {e}")
    except ValueError as e:
        raise ValueError(f"Validation failed for 'dataset': {e}")


def _get_discovery_config(discovery_data: dict[str, Any] | None) -> DiscoveryConfig:
    """
    Parses and validates the discovery configuration section.

    :param discovery_data: Raw dictionary containing discovery options.
    :return: Validated DiscoveryConfig object.
    """
    if not discovery_data:
        raise ValueError("Missing 'discovery' section in configuration.")

    try:
        return DiscoveryConfig(
            method=Method(discovery_data["method"]),
            bootstrap_resamples=int(discovery_data.get("bootstrap_resamples", 1000)),
            pc_alpha=float(discovery_data.get("pc_alpha", 0.05)),
            max_variables=int(discovery_data.get("max_variables", 12)),
            prune_threshold=float(discovery_data.get("prune_threshold", 1e-3)),
            workers=int(discovery_data.get("workers", 1)),
        )
    except KeyError as e:
        raise ValueError(f"Missing required field in 'discovery': {e}")
    except (TypeError, ValueError) as e:
        raise ValueError(f"Invalid value in 'discovery': {e}")


def _get_prompting_config(prompting_data: dict[str, Any] | None) -> PromptingConfig:
    """
    Parses and validates the prompting configuration section.

    :param prompting_data: Raw dictionary containing prompting options.
    :return: Validated PromptingConfig object.
    """
    if not prompting_data:
        raise ValueError("Missing 'prompting' section in configuration.")

    try:
        algorithm_name = prompting_data.get("algorithm_name")
        return PromptingConfig(
            pattern=Pattern.from_config(prompting_data["pattern"]),
            theme=str(prompting_data["theme"]).strip(),
            variable_descriptions=str(prompting_data["variable_descriptions"]).strip(),
            dataset_description=str(prompting_data.get("dataset_description", "")).strip(),
            algorithm_name=str(algorithm_name) if algorithm_name else None,
        )
    except KeyError as e:
        raise ValueError(f"Missing required field in 'prompting': {e}")
    except ValueError as e:
        raise ValueError(f"Validation failed for 'prompting': {e}")


def _parse_mock_jitter(jitter_data: dict[str, Any] | None) -> SeModel | None:
    """
    Parses the optional SE model used by the mock to jitter its answers.

    :param jitter_data: Raw dictionary with a_p and b_p.
    :return: SeModel or None if missing.
    """
    if not jitter_data:
        return None
    try:
        return SeModel(a_p=float(jitter_data["a_p"]), b_p=float(jitter_data["b_p"]))
    except (KeyError, TypeError, ValueError) as e:
        raise ValueError(f"Invalid mock jitter configuration: {jitter_data}. Error: {e}")


def _get_llm_config(llm_data: dict[str, Any] | None) -> LlmConfig:
    """
    Parses and validates the LLM configuration section.
    The API key is only read from the environment for the live backend.

    :param llm_data: Raw dictionary containing LLM options.
    :return: Validated LlmConfig object.
    """
    if not llm_data:
        raise ValueError("Missing 'llm' section in configuration.")

    try:
        backend = BackendKind(llm_data["backend"])
        api_key_env = str(llm_data.get("api_key_env", "OPENAI_API_KEY"))
        api_key = SecretStr.from_env(api_key_env) if backend == BackendKind.LIVE else None
        requests_per_second = llm_data.get("requests_per_second")
        cache_dir = llm_data.get("cache_dir")
        probability_table = llm_data.get("probability_table")
        return LlmConfig(
            backend=backend,
            model=str(llm_data.get("model", "gpt-4-0613")),
            endpoint=str(llm_data.get("endpoint", "https://api.openai.com/v1/chat/completions")),
            api_key_env=api_key_env,
            api_key=api_key,
            samples=int(llm_data.get("samples", 5)),
            temperature=float(llm_data.get("temperature", 0.7)),
            top_logprobs=int(llm_data.get("top_logprobs", 5)),
            max_retries=int(llm_data.get("max_retries", 3)),
            backoff_seconds=float(llm_data.get("backoff_seconds", 1.0)),
            timeout=float(llm_data.get("timeout", 120.0)),
            max_concurrency=int(llm_data.get("max_concurrency", 4)),
            requests_per_second=(
                float(requests_per_second) if requests_per_second is not None else None
            ),
            cache_dir=str(cache_dir) if cache_dir else None,
            probability_table=str(probability_table) if probability_table else None,
            mock_jitter=_parse_mock_jitter(llm_data.get("mock_jitter")),
            max_failed_ratio=float(llm_data.get("max_failed_ratio", 0.1)),
        )
    except KeyError as e:
        raise ValueError(f"Missing required field in 'llm': {e}")
    except (TypeError, ValueError) as e:
        raise ValueError(f"Validation failed for 'llm': {e}")


def _get_knowledge_config(knowledge_data: dict[str, Any] | None) -> KnowledgeConfig:
    """
    Parses and validates the knowledge configuration section.
    Optional: defaults apply if missing.

    :param knowledge_data: Raw dictionary containing threshold options.
    :return: Validated KnowledgeConfig object.
    """
    knowledge_data = knowledge_data or {}
    try:
        return KnowledgeConfig(
            alpha1=float(knowledge_data.get("alpha1", 0.05)),
            alpha2=float(knowledge_data.get("alpha2", 0.95)),
            candidate_cap=int(knowledge_data.get("candidate_cap", 10_000)),
        )
    except (TypeError, ValueError) as e:
        raise ValueError(f"Validation failed for 'knowledge': {e}")


def _get_output_config(output_data: dict[str, Any] | None) -> OutputConfig:
    """
    Parses and validates the output configuration section.

    :param output_data: Raw dictionary containing output options.
    :return: Validated OutputConfig object.
    """
    if not output_data:
        raise ValueError("Missing 'output' section in configuration.")

    try:
        return OutputConfig(
            run_dir=str(output_data["run_dir"]),
            seed=int(output_data.get("seed", 0)),
        )
    except KeyError as e:
        raise ValueError(f"Missing required field in 'output': {e}")
    except (TypeError, ValueError) as e:
        raise ValueError(f"Validation failed for 'output': {e}")


def load_config_from_yaml(file_path: str = "config.yml") -> RunConfig:
    """
    Loads run configuration from a YAML file.
    Manually maps YAML keys to dataclasses and validates types.

    :param file_path: Path to the YAML configuration file.
    :return: RunConfig object with the loaded configuration.
    """
    raw_config = _load_yaml(file_path)

    dataset_config = _get_dataset_config(raw_config.get("dataset"))
    discovery_config = _get_discovery_config(raw_config.get("discovery"))
    prompting_config = _get_prompting_config(raw_config.get("prompting"))
    llm_config = _get_llm_config(raw_config.get("llm"))
    knowledge_config = _get_knowledge_config(raw_config.get("knowledge"))
    output_config = _get_output_config(raw_config.get("output"))

    return RunConfig(
        dataset_config=dataset_config,
        discovery_config=discovery_config,
        prompting_config=prompting_config,
        llm_config=llm_config,
        knowledge_config=knowledge_config,
        output_config=output_config,
    )
