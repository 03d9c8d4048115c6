import argparse
import asyncio
import re
import sys
from pathlib import Path

from loguru import logger

from causal_prompting.config import RunConfig, load_config_from_yaml
from causal_prompting.core.core_exceptions import CoreError
from causal_prompting.core.graph import Method
from causal_prompting.core.serialization import (
    load_graph,
    load_prior_knowledge,
    save_graph,
    save_prior_knowledge,
    write_dot,
)
from causal_prompting.evaluation.evaluation_exceptions import (
    DimensionMismatchError,
    EvaluationError,
)
from causal_prompting.knowledge.acyclic import (
    acyclic_candidates,
    has_forced_cycle,
    select_by_bic,
    write_candidate_audit,
)
from causal_prompting.knowledge.knowledge_exceptions import KnowledgeError
from causal_prompting.knowledge.transform import to_prior_knowledge
from causal_prompting.llm.confidence import (
    collect_confidence_matrix,
    load_confidence,
    save_confidence,
)
from causal_prompting.llm.llm_exceptions import LlmError
from causal_prompting.llm.request_limiter import RequestLimiter
from causal_prompting.pipeline.pipeline import (
    discoverer_for,
    evaluate_run,
    load_ground_truth,
    load_standardized_dataset,
    make_backend,
    render_prompts,
    run_pipeline,
    stage_seeds,
    write_metrics,
    write_prompts,
    write_transcripts,
)
from causal_prompting.prompting.prompt_context import Pattern, PromptContext
from causal_prompting.prompting.prompting_exceptions import PromptingError
from causal_prompting.scd.bootstrap import bootstrap, load_bootstrap, save_bootstrap
from causal_prompting.scd.scd_exceptions import ScdError, VariableCapExceededError
from causal_prompting.sensitivity.roc import inclusive_grid, roc_auc_simulation, write_roc
from causal_prompting.sensitivity.se_model import MEASURED_SE_MODEL, SeModel
from causal_prompting.sensitivity.sensitivity_exceptions import (
    PseudoResultError,
    SensitivityError,
    SweepPointError,
)
from causal_prompting.sensitivity.sweep import (
    regress_confidence,
    sweep_confidence,
    sweep_grid,
    write_regression,
    write_sweep,
)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_TRANSPORT = 4

_PROMPT_FILE_PATTERN = re.compile(r"^q1_(?P<effect>\d+)_(?P<cause>\d+)\.txt$")


def exit_code_for(error: Exception) -> int:
    """
    Maps a failure to the exit code of its class.

    :param error: Raised exception.
    :return: 2 for validation, 3 for numerical, 4 for transport failures, 1 otherwise.
    """
    if isinstance(error, SweepPointError) and isinstance(error.__cause__, LlmError):
        return EXIT_TRANSPORT
    if isinstance(error, LlmError):
        return EXIT_TRANSPORT
    if isinstance(
        error,
        (
            ValueError,
            CoreError,
            PromptingError,
            PseudoResultError,
            DimensionMismatchError,
            VariableCapExceededError,
        ),
    ):
        return EXIT_VALIDATION
    if isinstance(error, (ScdError, KnowledgeError, EvaluationError, SensitivityError)):
        return EXIT_NUMERICAL
    return EXIT_FAILURE


def _load_config(path: str) -> RunConfig:
    logger.info("Loading configuration...")
    config = load_config_from_yaml(path)
    logger.debug(config)
    logger.info("Configuration loaded")
    return config


async def _run(args: argparse.Namespace) -> None:
    config = _load_config(args.config)
    report = await run_pipeline(config)
    logger.info(f"Wrote {len(report.artifacts)} artifacts")


async def _discover(args: argparse.Namespace) -> None:
    config = _load_config(args.config)
    dataset = load_standardized_dataset(config)
    prior_knowledge = load_prior_knowledge(args.prior_knowledge) if args.prior_knowledge else None
    graph = discoverer_for(config).discover(dataset, prior_knowledge)
    output = Path(args.output)
    save_graph(output, graph)
    write_dot(output.with_suffix(".dot"), graph, output.stem)


async def _bootstrap(args: argparse.Namespace) -> None:
    config = _load_config(args.config)
    dataset = load_standardized_dataset(config)
    summary = bootstrap(
        discoverer_for(config),
        dataset,
        config.discovery_config.bootstrap_resamples,
        stage_seeds(config.output_config.seed)["bootstrap"],
        workers=config.discovery_config.workers,
    )
    save_bootstrap(args.output, summary)


async def _prompts(args: argparse.Namespace) -> None:
    config = _load_config(args.config)
    graph = load_graph(args.graph)
    summary = load_bootstrap(args.bootstrap) if args.bootstrap else None
    prompts = render_prompts(
        config.prompting_config,
        config.discovery_config.method,
        graph.variable_names,
        graph,
        summary,
    )
    paths = write_prompts(Path(args.output_dir), prompts)
    logger.info(f"Wrote {len(paths)} prompts to '{args.output_dir}'")


def _read_prompts(directory: Path, size: int) -> dict[tuple[int, int], str]:
    prompts = {}
    for path in sorted(directory.iterdir()):
        match = _PROMPT_FILE_PATTERN.match(path.name)
        if match:
            pair = (int(match.group("effect")), int(match.group("cause")))
            prompts[pair] = path.read_text(encoding="utf-8")
    expected = size * (size - 1)
    if len(prompts) != expected:
        raise ValueError(
            f"Expected {expected} knowledge-generation prompts in '{directory}', found {len(prompts)}."
        )
    return prompts


async def _confidence(args: argparse.Namespace) -> None:
    config = _load_config(args.config)
    graph = load_graph(args.graph)
    prompts = _read_prompts(Path(args.prompts_dir), graph.size)
    llm_config = config.llm_config
    limiter = RequestLimiter(llm_config.max_concurrency, llm_config.requests_per_second)
    seed = stage_seeds(config.output_config.seed)["mock"]
    async with make_backend(llm_config, seed) as backend:
        cm, transcripts = await collect_confidence_matrix(
            backend,
            prompts,
            graph.variable_names,
            llm_config.samples,
            llm_config.temperature,
            limiter,
            llm_config.max_failed_ratio,
        )
    output = Path(args.output)
    save_confidence(output, cm)
    write_transcripts(output.parent, transcripts)


async def _pk(args: argparse.Namespace) -> None:
    config = _load_config(args.config)
    method = config.discovery_config.method
    cm = load_confidence(args.confidence)
    prior_knowledge = to_prior_knowledge(
        cm, method, config.knowledge_config.alpha1, config.knowledge_config.alpha2
    )
    output = Path(args.output)
    if method == Method.DIRECT_LINGAM and has_forced_cycle(prior_knowledge):
        save_prior_knowledge(output.with_name(f"{output.stem}_initial.yml"), prior_knowledge)
        dataset = load_standardized_dataset(config)
        candidates = acyclic_candidates(
            prior_knowledge, cap=config.knowledge_config.candidate_cap
        )
        selected, audits = select_by_bic(
            candidates,
            dataset,
            original=prior_knowledge,
            discoverer=discoverer_for(config),
            workers=config.discovery_config.workers,
        )
        write_candidate_audit(
            output.with_name("acyclic_candidates.csv"), audits, dataset.variable_names
        )
        prior_knowledge = selected
    save_prior_knowledge(output, prior_knowledge)


async def _evaluate(args: argparse.Namespace) -> None:
    config = _load_config(args.config)
    dataset = load_standardized_dataset(config)
    final_graph = load_graph(args.graph)
    initial_graph = load_graph(args.initial_graph) if args.initial_graph else None
    prior_knowledge = (
        load_prior_knowledge(args.prior_knowledge) if args.prior_knowledge else None
    )
    source = args.ground_truth or config.dataset_config.ground_truth
    ground_truth = load_ground_truth(source, dataset.variable_names) if source else None
    metrics = evaluate_run(
        dataset,
        final_graph,
        ground_truth,
        initial_graph=initial_graph,
        prior_knowledge=prior_knowledge,
    )
    write_metrics(Path(args.output), metrics)


def _index_of(name: str, variable_names: tuple[str, ...]) -> int:
    if name not in variable_names:
        raise ValueError(f"Unknown variable '{name}' (available: {', '.join(variable_names)})")
    return variable_names.index(name)


async def _simulate_sweep(args: argparse.Namespace) -> None:
    config = _load_config(args.config)
    prompting_config = config.prompting_config
    pattern = Pattern.from_config(args.pattern)
    graph = load_graph(args.graph)
    summary = load_bootstrap(args.bootstrap) if args.bootstrap else None
    base = PromptContext(
        theme=prompting_config.theme,
        variable_descriptions=prompting_config.variable_descriptions,
        dataset_description=prompting_config.dataset_description,
        method=Method.DIRECT_LINGAM,
        pattern=pattern,
        variable_names=graph.variable_names,
        effect=_index_of(args.effect, graph.variable_names),
        cause=_index_of(args.cause, graph.variable_names),
        scd_graph=graph,
        bootstrap=summary,
        algorithm_name=prompting_config.algorithm_name,
    )
    llm_config = config.llm_config
    limiter = RequestLimiter(llm_config.max_concurrency, llm_config.requests_per_second)
    seed = stage_seeds(config.output_config.seed)["mock"]
    async with make_backend(llm_config, seed) as backend:
        records = await sweep_confidence(
            backend,
            base,
            sweep_grid(pattern),
            llm_config.samples,
            llm_config.temperature,
            limiter,
        )
    output = Path(args.output)
    write_sweep(output, records)
    regression = regress_confidence(records, pattern)
    write_regression(output.with_name(f"{output.stem}_regression.yml"), regression)
    logger.info(
        f"Regression: p0={regression.p0:.4f}, alpha={regression.alpha}, "
        f"beta={regression.beta}, rmse={regression.rmse:.4f}"
    )


async def _simulate_roc(args: argparse.Namespace) -> None:
    model = SeModel(a_p=args.a_p, b_p=args.b_p)
    points, auc = roc_auc_simulation(
        model,
        alpha1=args.alpha1,
        grid=inclusive_grid(args.grid_start, args.grid_stop, args.grid_step),
        trials=args.trials,
        seed=args.seed,
    )
    write_roc(args.output, points)
    logger.info(f"AUC = {auc:.3f}")
    print(f"AUC = {auc:.3f}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causal-prompting",
        description="Statistical causal prompting with LLM-derived prior knowledge.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run the whole loop end to end")
    run.add_argument("--config", default="config.yml")
    run.set_defaults(handler=_run)

    discover = commands.add_parser("discover", help="Run causal discovery once")
    discover.add_argument("--config", default="config.yml")
    discover.add_argument("--prior-knowledge", help="Prior knowledge YAML to constrain the run")
    discover.add_argument("--output", required=True, help="Graph YAML (a .dot is written next to it)")
    discover.set_defaults(handler=_discover)

    boot = commands.add_parser("bootstrap", help="Compute bootstrap edge probabilities")
    boot.add_argument("--config", default="config.yml")
    boot.add_argument("--output", required=True, help="Bootstrap summary YAML")
    boot.set_defaults(handler=_bootstrap)

    prompts = commands.add_parser("prompts", help="Render the knowledge-generation prompts")
    prompts.add_argument("--config", default="config.yml")
    prompts.add_argument("--graph", required=True, help="Graph YAML found without prior knowledge")
    prompts.add_argument("--bootstrap", help="Bootstrap summary YAML (Patterns 2 and 4)")
    prompts.add_argument("--output-dir", required=True)
    prompts.set_defaults(handler=_prompts)

    confidence = commands.add_parser("confidence", help="Query the LLM for the confidence matrix")
    confidence.add_argument("--config", default="config.yml")
    confidence.add_argument("--graph", required=True, help="Graph YAML naming the variables")
    confidence.add_argument("--prompts-dir", required=True)
    confidence.add_argument("--output", required=True, help="Confidence matrix YAML")
    confidence.set_defaults(handler=_confidence)

    pk = commands.add_parser("pk", help="Turn a confidence matrix into prior knowledge")
    pk.add_argument("--config", default="config.yml")
    pk.add_argument("--confidence", required=True)
    pk.add_argument("--output", required=True, help="Prior knowledge YAML")
    pk.set_defaults(handler=_pk)

    evaluate = commands.add_parser("evaluate", help="Compute structural metrics and SEM fit")
    evaluate.add_argument("--config", default="config.yml")
    evaluate.add_argument("--graph", required=True, help="Graph YAML to evaluate")
    evaluate.add_argument("--initial-graph", help="Graph YAML found without prior knowledge")
    evaluate.add_argument("--prior-knowledge", help="Prior knowledge YAML, evaluated as |PK|")
    evaluate.add_argument("--ground-truth", help="Fixture name or labeled matrix table")
    evaluate.add_argument("--output", required=True, help="Path stem of the metric reports")
    evaluate.set_defaults(handler=_evaluate)

    sweep = commands.add_parser("simulate-sweep", help="Sweep one edge of a pseudo-result")
    sweep.add_argument("--config", default="config.yml")
    sweep.add_argument("--graph", required=True, help="DirectLiNGAM graph YAML")
    sweep.add_argument("--bootstrap", help="Bootstrap summary YAML (Patterns 2 and 4)")
    sweep.add_argument("--pattern", required=True, choices=["2", "3", "4", "P2", "P3", "P4"])
    sweep.add_argument("--effect", required=True, help="Name of the effect variable")
    sweep.add_argument("--cause", required=True, help="Name of the cause variable")
    sweep.add_argument("--output", required=True, help="Sweep CSV")
    sweep.set_defaults(handler=_simulate_sweep)

    roc = commands.add_parser("simulate-roc", help="Monte Carlo ROC of the Forbidden decision")
    roc.add_argument("--a-p", type=float, default=MEASURED_SE_MODEL.a_p)
    roc.add_argument("--b-p", type=float, default=MEASURED_SE_MODEL.b_p)
    roc.add_argument("--alpha1", type=float, default=0.05)
    roc.add_argument("--grid-start", type=float, default=0.032)
    roc.add_argument("--grid-stop", type=float, default=0.108)
    roc.add_argument("--grid-step", type=float, default=0.001)
    roc.add_argument("--trials", type=int, default=1000)
    roc.add_argument("--seed", type=int, default=0)
    roc.add_argument("--output", required=True, help="ROC points CSV")
    roc.set_defaults(handler=_simulate_roc)
    return parser


def run_command(argv: list[str] | None = None) -> int:
    """
    Parses the arguments and runs one subcommand.

    :param argv: Arguments without the program name.
    :return: Exit code.
    """
    args = _build_parser().parse_args(argv)
    logger.info(f"Starting causal-prompting {args.command}...")
    try:
        asyncio.run(args.handler(args))
    except Exception as e:
        code = exit_code_for(e)
        logger.exception(f"Error while running '{args.command}': {e}")
        return code
    logger.info(f"causal-prompting {args.command} finished.")
    return EXIT_OK


def main() -> None:
    logger.add(
        "causal_prompting.log",
        rotation="1 day",
        retention="7 days",
        level="DEBUG",
    )
    sys.exit(run_command())


if __name__ == "__main__":
    main()
