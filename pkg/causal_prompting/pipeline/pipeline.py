from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from loguru import logger

from causal_prompting.config import BackendKind, LlmConfig, PromptingConfig, RunConfig
from causal_prompting.core.dataset import Dataset, load_dataset, standardize
from causal_prompting.core.fixtures import FixtureName, ground_truth_fixture
from causal_prompting.core.graph import CausalGraph, GroundTruth, Method, PriorKnowledge
from causal_prompting.core.seeds import derive_seed
from causal_prompting.core.serialization import (
    read_matrix_table,
    save_graph,
    save_prior_knowledge,
    write_dot,
    write_matrix_table,
    write_yaml,
)
from causal_prompting.evaluation.evaluation_exceptions import EvaluationError
from causal_prompting.evaluation.metrics import evaluate_structure, metrics_on_pk
from causal_prompting.evaluation.sem import fit_sem
from causal_prompting.knowledge.acyclic import (
    acyclic_candidates,
    has_forced_cycle,
    select_by_bic,
    write_candidate_audit,
)
from causal_prompting.knowledge.transform import to_prior_knowledge
from causal_prompting.llm.confidence import (
    ConfidenceMatrix,
    PairTranscript,
    collect_confidence_matrix,
    faithfulness_check,
    faithfulness_summary,
    save_confidence,
)
from causal_prompting.llm.llm_backend import LlmBackend
from causal_prompting.llm.mock_llm_backend import MockLlmBackend
from causal_prompting.llm.openai_llm_backend import OpenAiLlmBackend
from causal_prompting.llm.request_limiter import RequestLimiter
from causal_prompting.llm.response_cache import CachedLlmBackend, ResponseCache
from causal_prompting.prompting.prompt_builder import build_knowledge_prompt, ordered_pairs
from causal_prompting.prompting.prompt_context import PromptContext
from causal_prompting.scd.bootstrap import (
    BootstrapSummary,
    bootstrap,
    make_discoverer,
    save_bootstrap,
)
from causal_prompting.scd.causal_discoverer import CausalDiscoverer

CONFIG_SNAPSHOT = "config_snapshot.yml"
GRAPH_INITIAL = "graph_initial"
GRAPH_FINAL = "graph_final"
BOOTSTRAP = "bootstrap.yml"
PROMPTS_DIR = "prompts"
RESPONSES_DIR = "responses"
CONFIDENCE = "confidence.yml"
PK_INITIAL = "pk_initial.yml"
PK_FINAL = "pk_final.yml"
CANDIDATE_AUDIT = "acyclic_candidates.csv"
METRICS = "metrics"
RUN_REPORT = "run_report.yml"

_METRIC_COLUMNS = ("shd", "fpr", "fnr", "precision", "f1", "cfi", "rmsea", "bic")


@dataclass(slots=True, frozen=True, kw_only=True)
class RunReport:
    """
    Summary of one end-to-end run.
    """

    run_dir: Path
    """Directory holding every artifact."""
    seeds: dict[str, int]
    """Root seed and the seed derived for each randomized stage."""
    initial_graph: CausalGraph
    """Graph found without prior knowledge."""
    final_graph: CausalGraph
    """Graph found with the final prior knowledge."""
    confidence: ConfidenceMatrix
    initial_prior_knowledge: PriorKnowledge
    """Prior knowledge straight out of the thresholds."""
    prior_knowledge: PriorKnowledge
    """Prior knowledge after the acyclic transform, if one was needed."""
    metrics: dict[str, dict] = field(default_factory=dict)
    """Metric rows for the initial graph, |PK| and the final graph."""
    artifacts: list[str] = field(default_factory=list)
    """Artifact paths relative to run_dir."""

    def to_dict(self) -> dict:
        return {
            "artifact": "run_report",
            "run_dir": str(self.run_dir),
            "seeds": dict(self.seeds),
            "variables": list(self.initial_graph.variable_names),
            "failed_pairs": [list(pair) for pair in sorted(self.confidence.failed_pairs)],
            "acyclic_transform": not np.array_equal(
                self.initial_prior_knowledge.entries, self.prior_knowledge.entries
            ),
            "metrics": self.metrics,
            "artifacts": list(self.artifacts),
        }


def stage_seeds(root_seed: int) -> dict[str, int]:
    """
    Seeds of the randomized stages, derived from the root seed.

    :param root_seed: Root seed of the run.
    :return: Mapping with the root and one entry per stage.
    """
    return {
        "root": root_seed,
        "bootstrap": derive_seed(root_seed, "bootstrap"),
        "mock": derive_seed(root_seed, "mock"),
    }


def load_standardized_dataset(config: RunConfig) -> Dataset:
    dataset_config = config.dataset_config
    dataset = load_dataset(
        dataset_config.path,
        has_header=dataset_config.has_header,
        delimiter=dataset_config.delimiter,
    )
    return standardize(dataset)


def load_ground_truth(source: str, variable_names: tuple[str, ...]) -> GroundTruth:
    """
    Loads a ground truth from a bundled fixture name or a labeled matrix
    table, reordered to the given variable order.

    :param source: Fixture name (AutoMPG, DWD, Sachs) or table path.
    :param variable_names: Variable order of the dataset.
    :return: Aligned ground truth.
    :raises ValueError: If the ground truth covers other variables.
    """
    if source in {fixture.value for fixture in FixtureName}:
        ground_truth = ground_truth_fixture(source)
    else:
        adjacency, names = read_matrix_table(source)
        ground_truth = GroundTruth(variable_names=names, adjacency=adjacency.astype(int))

    if ground_truth.variable_names == tuple(variable_names):
        return ground_truth
    if sorted(ground_truth.variable_names) != sorted(variable_names):
        raise ValueError(
            f"Ground truth variables {list(ground_truth.variable_names)} "
            f"do not match the dataset {list(variable_names)}."
        )
    order = [ground_truth.variable_names.index(name) for name in variable_names]
    return GroundTruth(
        variable_names=tuple(variable_names),
        adjacency=ground_truth.adjacency[np.ix_(order, order)],
    )


def make_backend(llm_config: LlmConfig, seed: int) -> LlmBackend:
    """
    Instantiates the configured completion backend, behind the response
    cache when a cache directory is set.

    :param llm_config: LLM configuration.
    :param seed: Seed of the mock's jitter.
    :return: Backend.
    """
    if llm_config.backend == BackendKind.MOCK:
        backend: LlmBackend = MockLlmBackend.from_probability_table(
            llm_config.probability_table, seed=seed, jitter=llm_config.mock_jitter
        )
    else:
        backend = OpenAiLlmBackend(
            endpoint=llm_config.endpoint,
            model_id=llm_config.model,
            api_key=llm_config.api_key,
            top_logprobs=llm_config.top_logprobs,
            max_retries=llm_config.max_retries,
            backoff_seconds=llm_config.backoff_seconds,
            timeout=llm_config.timeout,
        )
    if llm_config.cache_dir:
        backend = CachedLlmBackend(backend, ResponseCache(llm_config.cache_dir))
    return backend


def discoverer_for(config: RunConfig) -> CausalDiscoverer:
    discovery_config = config.discovery_config
    return make_discoverer(
        discovery_config.method,
        pc_alpha=discovery_config.pc_alpha,
        max_variables=discovery_config.max_variables,
        prune_threshold=discovery_config.prune_threshold,
    )


def render_prompts(
    prompting_config: PromptingConfig,
    method: Method,
    variable_names: tuple[str, ...],
    graph: CausalGraph | None,
    summary: BootstrapSummary | None,
) -> dict[tuple[int, int], str]:
    """
    Renders the knowledge-generation prompt of every ordered pair.

    :return: Prompt per (effect i, cause j), in row-major order.
    """
    return {
        (effect, cause): build_knowledge_prompt(
            PromptContext(
                theme=prompting_config.theme,
                variable_descriptions=prompting_config.variable_descriptions,
                dataset_description=prompting_config.dataset_description,
                method=method,
                pattern=prompting_config.pattern,
                variable_names=variable_names,
                effect=effect,
                cause=cause,
                scd_graph=graph,
                bootstrap=summary,
                algorithm_name=prompting_config.algorithm_name,
            )
        )
        for effect, cause in ordered_pairs(len(variable_names))
    }


def write_prompts(directory: Path, prompts: dict[tuple[int, int], str]) -> list[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for (effect, cause), prompt in sorted(prompts.items()):
        path = directory / f"q1_{effect}_{cause}.txt"
        path.write_text(prompt, encoding="utf-8")
        paths.append(path)
    return paths


def write_transcripts(run_dir: Path, transcripts: list[PairTranscript]) -> list[Path]:
    """
    Writes the reply to q1, the integration prompt q2 and the raw shot
    responses of every pair.

    :return: Written files.
    """
    prompts_dir = run_dir / PROMPTS_DIR
    responses_dir = run_dir / RESPONSES_DIR
    prompts_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for transcript in transcripts:
        suffix = f"{transcript.effect}_{transcript.cause}"
        if transcript.q2:
            answer_path = prompts_dir / f"answer_{suffix}.txt"
            answer_path.write_text(transcript.answer, encoding="utf-8")
            q2_path = prompts_dir / f"q2_{suffix}.txt"
            q2_path.write_text(transcript.q2, encoding="utf-8")
            paths += [answer_path, q2_path]
        response_path = responses_dir / f"response_{suffix}.yml"
        write_yaml(
            response_path,
            {
                "artifact": "pair_responses",
                "effect": transcript.effect,
                "cause": transcript.cause,
                "error": transcript.error,
                "mean": transcript.confidence.mean if transcript.confidence else None,
                "stderr": transcript.confidence.stderr if transcript.confidence else None,
                "shots": [
                    {
                        "text": response.text,
                        "top_logprobs": [
                            [[token, logprob] for token, logprob in position]
                            for position in response.top_logprobs
                        ],
                    }
                    for response in transcript.responses
                ],
            },
        )
        paths.append(response_path)
    return paths


def _metric_row(
    estimated: np.ndarray, ground_truth: GroundTruth | None, fit: dict | None
) -> dict:
    row: dict = {}
    if ground_truth is not None:
        report = evaluate_structure(estimated, ground_truth.adjacency)
        row.update(report.to_dict())
    if fit is not None:
        row.update(fit)
    return row


def _sem_or_failure(dataset: Dataset, graph: CausalGraph) -> dict:
    try:
        return fit_sem(dataset, graph).to_dict()
    except EvaluationError as e:
        logger.warning(f"SEM fit skipped: {e}")
        return {"sem_failure": str(e)}


def evaluate_run(
    dataset: Dataset,
    final_graph: CausalGraph,
    ground_truth: GroundTruth | None,
    initial_graph: CausalGraph | None = None,
    prior_knowledge: PriorKnowledge | None = None,
) -> dict[str, dict]:
    """
    Metric rows for the graph without prior knowledge, |PK| and the graph
    with prior knowledge, skipping the rows whose input is missing.
    Structural metrics need a ground truth; SEM fit indices are computed for
    both graphs.
    """
    metrics = {}
    if initial_graph is not None:
        metrics["initial_graph"] = _metric_row(
            initial_graph.adjacency, ground_truth, _sem_or_failure(dataset, initial_graph)
        )
    if prior_knowledge is not None and ground_truth is not None:
        metrics["prior_knowledge"] = metrics_on_pk(prior_knowledge, ground_truth).to_dict()
    metrics["final_graph"] = _metric_row(
        final_graph.adjacency, ground_truth, _sem_or_failure(dataset, final_graph)
    )
    return metrics


def _format_metric(value) -> str:
    if value is None:
        return "undefined"
    if isinstance(value, float):
        return f"{value:.3f}"
    return str(value)


def write_metrics(path_stem: Path, metrics: dict[str, dict]) -> list[Path]:
    """
    Writes the metric rows as YAML and as a fixed-width text table.

    :return: Written files.
    """
    labels = {
        "initial_graph": "G0 (no PK)",
        "prior_knowledge": "|PK|",
        "final_graph": "G (with PK)",
    }
    yaml_path = path_stem.with_suffix(".yml")
    write_yaml(yaml_path, {"artifact": "metrics", **metrics})

    header = f"{'':<14}" + "".join(f"{column.upper():>12}" for column in _METRIC_COLUMNS)
    lines = [header]
    for key, row in metrics.items():
        cells = "".join(
            f"{_format_metric(row.get(column)) if column in row else '-':>12}"
            for column in _METRIC_COLUMNS
        )
        lines.append(f"{labels[key]:<14}{cells}")
    text_path = path_stem.with_suffix(".txt")
    text_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return [yaml_path, text_path]


def _log_faithfulness(cm: ConfidenceMatrix) -> None:
    summary = faithfulness_summary(cm)
    logger.info(
        f"Faithfulness of p + r: {summary['complete']} complete, {summary['partial']} partial, "
        f"{summary['violated']} violated, {summary['excess']} above 1"
    )
    for i, j in faithfulness_check(cm):
        logger.warning(
            f"Pair {cm.variable_names[j]} -> {cm.variable_names[i]}: "
            f"p + r = {cm.mean[i, j] + cm.anti_mean[i, j]:.3f}"
        )


async def run_pipeline(config: RunConfig, backend: LlmBackend | None = None) -> RunReport:
    """
    Runs the whole loop: discovery without prior knowledge, optional
    bootstrap, prompting of every ordered pair, confidence matrix, prior
    knowledge (with the acyclic transform for DirectLiNGAM), constrained
    discovery and evaluation. Every intermediate is written to the run directory.

    :param config: Run configuration.
    :param backend: Completion backend; built from the configuration if omitted.
    :return: Run report.
    """
    run_dir = Path(config.output_config.run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    seeds = stage_seeds(config.output_config.seed)
    method = config.discovery_config.method
    pattern = config.prompting_config.pattern
    artifacts: list[Path] = []

    write_yaml(run_dir / CONFIG_SNAPSHOT, {"artifact": "run_config", **config.to_dict()})
    artifacts.append(run_dir / CONFIG_SNAPSHOT)

    logger.info(f"Loading dataset '{config.dataset_config.path}'...")
    dataset = load_standardized_dataset(config)
    ground_truth = None
    if config.dataset_config.ground_truth:
        ground_truth = load_ground_truth(config.dataset_config.ground_truth, dataset.variable_names)

    discoverer = discoverer_for(config)
    logger.info(f"Running {method.display_name} without prior knowledge...")
    initial_graph = discoverer.discover(dataset)
    save_graph(run_dir / f"{GRAPH_INITIAL}.yml", initial_graph)
    write_dot(run_dir / f"{GRAPH_INITIAL}.dot", initial_graph, GRAPH_INITIAL)
    artifacts += [run_dir / f"{GRAPH_INITIAL}.yml", run_dir / f"{GRAPH_INITIAL}.dot"]

    summary = None
    if pattern.uses_bootstrap:
        summary = bootstrap(
            discoverer,
            dataset,
            config.discovery_config.bootstrap_resamples,
            seeds["bootstrap"],
            workers=config.discovery_config.workers,
        )
        save_bootstrap(run_dir / BOOTSTRAP, summary)
        artifacts.append(run_dir / BOOTSTRAP)
    else:
        logger.info(f"Skipping the bootstrap, {pattern.value} does not use it")

    prompts = render_prompts(
        config.prompting_config, method, dataset.variable_names, initial_graph, summary
    )
    artifacts += write_prompts(run_dir / PROMPTS_DIR, prompts)

    llm_config = config.llm_config
    limiter = RequestLimiter(llm_config.max_concurrency, llm_config.requests_per_second)
    async with backend or make_backend(llm_config, seeds["mock"]) as llm:
        cm, transcripts = await collect_confidence_matrix(
            llm,
            prompts,
            dataset.variable_names,
            llm_config.samples,
            llm_config.temperature,
            limiter,
            llm_config.max_failed_ratio,
        )
    artifacts += write_transcripts(run_dir, transcripts)
    save_confidence(run_dir / CONFIDENCE, cm)
    artifacts += [run_dir / CONFIDENCE, (run_dir / CONFIDENCE).with_suffix(".csv")]
    _log_faithfulness(cm)

    knowledge_config = config.knowledge_config
    initial_pk = to_prior_knowledge(cm, method, knowledge_config.alpha1, knowledge_config.alpha2)
    save_prior_knowledge(run_dir / PK_INITIAL, initial_pk)
    write_matrix_table(
        (run_dir / PK_INITIAL).with_suffix(".csv"), initial_pk.entries, initial_pk.variable_names
    )
    artifacts += [run_dir / PK_INITIAL, (run_dir / PK_INITIAL).with_suffix(".csv")]

    prior_knowledge = initial_pk
    if method == Method.DIRECT_LINGAM and has_forced_cycle(initial_pk):
        logger.info("Forced entries contain cycles, running the acyclic transform...")
        candidates = acyclic_candidates(initial_pk, cap=knowledge_config.candidate_cap)
        prior_knowledge, audits = select_by_bic(
            candidates,
            dataset,
            original=initial_pk,
            discoverer=discoverer,
            workers=config.discovery_config.workers,
        )
        write_candidate_audit(run_dir / CANDIDATE_AUDIT, audits, dataset.variable_names)
        artifacts.append(run_dir / CANDIDATE_AUDIT)
    save_prior_knowledge(run_dir / PK_FINAL, prior_knowledge)
    write_matrix_table(
        (run_dir / PK_FINAL).with_suffix(".csv"),
        prior_knowledge.entries,
        prior_knowledge.variable_names,
    )
    artifacts += [run_dir / PK_FINAL, (run_dir / PK_FINAL).with_suffix(".csv")]

    logger.info(f"Running {method.display_name} with prior knowledge...")
    final_graph = discoverer.discover(dataset, prior_knowledge)
    save_graph(run_dir / f"{GRAPH_FINAL}.yml", final_graph)
    write_dot(run_dir / f"{GRAPH_FINAL}.dot", final_graph, GRAPH_FINAL)
    artifacts += [run_dir / f"{GRAPH_FINAL}.yml", run_dir / f"{GRAPH_FINAL}.dot"]

    metrics = evaluate_run(
        dataset,
        final_graph,
        ground_truth,
        initial_graph=initial_graph,
        prior_knowledge=prior_knowledge,
    )
    artifacts += write_metrics(run_dir / METRICS, metrics)

    report = RunReport(
        run_dir=run_dir,
        seeds=seeds,
        initial_graph=initial_graph,
        final_graph=final_graph,
        confidence=cm,
        initial_prior_knowledge=initial_pk,
        prior_knowledge=prior_knowledge,
        metrics=metrics,
        artifacts=sorted(str(path.relative_to(run_dir)) for path in artifacts) + [RUN_REPORT],
    )
    write_yaml(run_dir / RUN_REPORT, report.to_dict())
    logger.info(f"Run finished, artifacts in '{run_dir}'")
    return report
