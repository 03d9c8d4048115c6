import asyncio
import dataclasses
import itertools
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from loguru import logger

from causal_prompting.core.graph import CausalGraph
from causal_prompting.core.serialization import write_yaml
from causal_prompting.llm.confidence import confidence_for_pair
from causal_prompting.llm.llm_backend import LlmBackend
from causal_prompting.llm.llm_exceptions import LlmError
from causal_prompting.llm.request_limiter import RequestLimiter
from causal_prompting.prompting.prompt_builder import (
    build_integration_prompt,
    build_knowledge_prompt,
)
from causal_prompting.prompting.prompt_context import Pattern, PromptContext
from causal_prompting.prompting.prompting_exceptions import PromptingError
from causal_prompting.scd.bootstrap import BootstrapSummary
from causal_prompting.sensitivity.roc import inclusive_grid
from causal_prompting.sensitivity.sensitivity_exceptions import (
    DegenerateFitError,
    PseudoResultError,
    SweepPointError,
)

SWEEP_PATTERNS = (Pattern.P2, Pattern.P3, Pattern.P4)


@dataclass(slots=True, frozen=True, kw_only=True)
class SweepRecord:
    """
    Confidence measured for one modulated value of the probed edge.
    """

    pattern: Pattern
    coefficient: float | None
    """Causal coefficient written into the pseudo-result (Patterns 3 and 4)."""
    probability: float | None
    """Bootstrap probability written into the pseudo-result (Patterns 2 and 4)."""
    mean: float
    """Mean yes-probability over the shots."""
    stderr: float
    """Standard error of the mean."""


@dataclass(slots=True, frozen=True, kw_only=True)
class RegressionSummary:
    """
    Least-squares fit of the confidence against the modulated quantities:
    p = p0 + alpha * c + beta * b, with the unused terms absent.
    """

    pattern: Pattern
    p0: float
    p0_se: float
    alpha: float | None
    """Slope in the coefficient (Patterns 3 and 4)."""
    alpha_se: float | None
    beta: float | None
    """Slope in the bootstrap probability (Patterns 2 and 4)."""
    beta_se: float | None
    rmse: float
    n_records: int

    def to_dict(self) -> dict:
        content = dataclasses.asdict(self)
        content["pattern"] = self.pattern.value
        return content


def sweep_grid(
    pattern: Pattern,
    coefficients: np.ndarray | None = None,
    probabilities: np.ndarray | None = None,
) -> list[tuple[float | None, float | None]]:
    """
    Grid points (coefficient, probability) of a sweep. Omitted axes default
    to b = 0..1 step 0.1 (Pattern 2), c = -2..2 step 0.05 (Pattern 3) and
    b = 0.1..1 step 0.1 crossed with c = -1..1 step 0.1 (Pattern 4).

    :param pattern: Sweep pattern.
    :param coefficients: Coefficient axis, if overridden.
    :param probabilities: Bootstrap probability axis, if overridden.
    :return: Grid points, probability-major for Pattern 4.
    """
    match pattern:
        case Pattern.P2:
            axis = inclusive_grid(0.0, 1.0, 0.1) if probabilities is None else probabilities
            return [(None, float(b)) for b in axis]
        case Pattern.P3:
            axis = inclusive_grid(-2.0, 2.0, 0.05) if coefficients is None else coefficients
            return [(float(c), None) for c in axis]
        case Pattern.P4:
            b_axis = inclusive_grid(0.1, 1.0, 0.1) if probabilities is None else probabilities
            c_axis = inclusive_grid(-1.0, 1.0, 0.1) if coefficients is None else coefficients
            return [(float(c), float(b)) for b, c in itertools.product(b_axis, c_axis)]
        case _:
            raise ValueError(f"Sweeps support Patterns 2, 3 and 4, got {pattern.value}.")


def make_pseudo_result(
    graph: CausalGraph,
    summary: BootstrapSummary | None,
    effect: int,
    cause: int,
    pattern: Pattern,
    coefficient: float | None = None,
    probability: float | None = None,
) -> tuple[CausalGraph, BootstrapSummary | None]:
    """
    Copies a DirectLiNGAM result with one edge's coefficient and/or bootstrap
    probability overwritten.

    Patterns 3 and 4 set the coefficient and let the adjacency follow c != 0.
    Pattern 2 sets the adjacency to b != 0, keeping the original coefficient
    (or the given one) where the edge exists. Patterns 2 and 4 overwrite the
    bootstrap probability.

    :param graph: DirectLiNGAM result.
    :param summary: Bootstrap summary (required for Patterns 2 and 4).
    :param effect: Index i of the probed edge x_j -> x_i.
    :param cause: Index j of the probed edge.
    :param pattern: Sweep pattern.
    :param coefficient: Coefficient c to write.
    :param probability: Bootstrap probability b to write.
    :return: The pseudo graph and bootstrap summary.
    :raises PseudoResultError: If the inputs cannot form a consistent result.
    """
    if graph.coefficients is None:
        raise PseudoResultError("the base result carries no causal coefficients")
    size = graph.size
    if not (0 <= effect < size and 0 <= cause < size) or effect == cause:
        raise PseudoResultError(f"edge ({effect}, {cause}) is out of range for {size} variables")
    if pattern not in SWEEP_PATTERNS:
        raise PseudoResultError(f"pattern {pattern.value} has nothing to modulate")
    if pattern.uses_coefficients and coefficient is None:
        raise PseudoResultError(f"pattern {pattern.value} needs a coefficient")
    if pattern.uses_bootstrap:
        if probability is None or not 0.0 <= probability <= 1.0:
            raise PseudoResultError(f"pattern {pattern.value} needs a probability in [0, 1]")
        if summary is None:
            raise PseudoResultError(f"pattern {pattern.value} needs a bootstrap summary")

    adjacency = np.array(graph.adjacency)
    coefficients = np.array(graph.coefficients)
    if pattern.uses_coefficients:
        coefficients[effect, cause] = coefficient
        adjacency[effect, cause] = int(coefficient != 0)
    else:
        adjacency[effect, cause] = int(probability != 0)
        value = coefficient if coefficient is not None else graph.coefficients[effect, cause]
        coefficients[effect, cause] = value if adjacency[effect, cause] else 0.0
        if adjacency[effect, cause] and value == 0:
            raise PseudoResultError(
                "the probed edge has no coefficient to keep; pass one explicitly"
            )

    pseudo_graph = dataclasses.replace(graph, adjacency=adjacency, coefficients=coefficients)
    pseudo_summary = summary
    if pattern.uses_bootstrap:
        directed = np.array(summary.directed_prob)
        directed[effect, cause] = probability
        pseudo_summary = dataclasses.replace(summary, directed_prob=directed)
    return pseudo_graph, pseudo_summary


async def _sweep_point(
    backend: LlmBackend,
    base: PromptContext,
    summary: BootstrapSummary | None,
    coefficient: float | None,
    probability: float | None,
    samples: int,
    temperature: float,
    limiter: RequestLimiter,
) -> SweepRecord:
    try:
        graph, pseudo_summary = make_pseudo_result(
            base.scd_graph, summary, base.effect, base.cause, base.pattern,
            coefficient=coefficient, probability=probability,
        )
        ctx = dataclasses.replace(base, scd_graph=graph, bootstrap=pseudo_summary)
        q1 = build_knowledge_prompt(ctx)
        async with limiter:
            reply = await backend.complete(q1, temperature, want_logprobs=False, shot=0)
        q2 = build_integration_prompt(q1, reply.text, ctx.cause_name, ctx.effect_name)
        confidence, _ = await confidence_for_pair(backend, q2, samples, temperature, limiter)
    except (LlmError, PromptingError, PseudoResultError) as e:
        raise SweepPointError(coefficient, probability, str(e)) from e

    return SweepRecord(
        pattern=base.pattern,
        coefficient=coefficient,
        probability=probability,
        mean=confidence.mean,
        stderr=confidence.stderr,
    )


async def sweep_confidence(
    backend: LlmBackend,
    base: PromptContext,
    grid: list[tuple[float | None, float | None]],
    samples: int,
    temperature: float = 0.7,
    limiter: RequestLimiter | None = None,
) -> list[SweepRecord]:
    """
    Measures the confidence of one edge across a grid of pseudo-results.

    :param backend: Completion backend (wrap it in a cache to reuse answers).
    :param base: Prompt context holding the DirectLiNGAM result, the probed
        pair and the sweep pattern.
    :param grid: (coefficient, probability) points, see sweep_grid.
    :param samples: Shots M per point.
    :param temperature: Sampling temperature.
    :param limiter: Concurrency and rate limiter.
    :return: Records in grid order.
    :raises SweepPointError: If a point fails, naming the point.
    """
    if base.pattern not in SWEEP_PATTERNS:
        raise ValueError(f"Sweeps support Patterns 2, 3 and 4, got {base.pattern.value}.")
    if base.scd_graph is None:
        raise ValueError("A sweep needs the DirectLiNGAM result in its prompt context.")
    limiter = limiter or RequestLimiter()
    logger.info(
        f"Sweeping {base.cause_name} -> {base.effect_name} under {base.pattern.value} "
        f"over {len(grid)} points"
    )
    records = await asyncio.gather(
        *(
            _sweep_point(
                backend, base, base.bootstrap, coefficient, probability,
                samples, temperature, limiter,
            )
            for coefficient, probability in grid
        )
    )
    return list(records)


def regress_confidence(records: list[SweepRecord], pattern: Pattern) -> RegressionSummary:
    """
    Ordinary least squares of the mean confidence on the modulated
    quantities. Standard errors use sigma^2 = RSS / (n - p) and are NaN when
    there are no residual degrees of freedom.

    :param records: Sweep records of one pattern.
    :param pattern: Pattern the records were produced with.
    :return: Estimates, standard errors and RMSE.
    :raises DegenerateFitError: If the design matrix is rank deficient.
    """
    if pattern not in SWEEP_PATTERNS:
        raise ValueError(f"Regression supports Patterns 2, 3 and 4, got {pattern.value}.")
    if len(records) < 3:
        raise ValueError(f"Regression needs at least 3 records, got {len(records)}.")

    columns = [np.ones(len(records))]
    if pattern.uses_coefficients:
        columns.append(np.array([record.coefficient for record in records], dtype=float))
    if pattern.uses_bootstrap:
        columns.append(np.array([record.probability for record in records], dtype=float))
    design = np.column_stack(columns)
    response = np.array([record.mean for record in records], dtype=float)

    estimates, _, rank, _ = np.linalg.lstsq(design, response, rcond=None)
    n, p = design.shape
    if rank < p:
        raise DegenerateFitError(
            f"the {pattern.value} confidence regression", "the modulated values do not vary"
        )
    residuals = response - design @ estimates
    rss = float(residuals @ residuals)
    rmse = float(np.sqrt(rss / n))
    if n > p:
        sigma2 = rss / (n - p)
        errors = np.sqrt(sigma2 * np.diag(np.linalg.inv(design.T @ design)))
    else:
        logger.warning("Regression has no residual degrees of freedom; standard errors are NaN")
        errors = np.full(p, np.nan)

    alpha = alpha_se = beta = beta_se = None
    position = 1
    if pattern.uses_coefficients:
        alpha, alpha_se = float(estimates[position]), float(errors[position])
        position += 1
    if pattern.uses_bootstrap:
        beta, beta_se = float(estimates[position]), float(errors[position])

    return RegressionSummary(
        pattern=pattern,
        p0=float(estimates[0]),
        p0_se=float(errors[0]),
        alpha=alpha,
        alpha_se=alpha_se,
        beta=beta,
        beta_se=beta_se,
        rmse=rmse,
        n_records=n,
    )


def write_sweep(path: str | Path, records: list[SweepRecord]) -> None:
    """
    Writes sweep records as CSV.

    :param path: Destination file.
    :param records: Sweep records.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(
        [
            {
                "pattern": record.pattern.value,
                "coefficient": record.coefficient,
                "probability": record.probability,
                "mean": record.mean,
                "stderr": record.stderr,
            }
            for record in records
        ],
        columns=["pattern", "coefficient", "probability", "mean", "stderr"],
    ).to_csv(path, index=False)


def write_regression(path: str | Path, summary: RegressionSummary) -> None:
    write_yaml(path, {"artifact": "confidence_regression", **summary.to_dict()})
