from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np
from loguru import logger

from causal_prompting.core.core_exceptions import ArtifactValidationError, ConstantColumnError
from causal_prompting.core.dataset import Dataset, standardize
from causal_prompting.core.graph import CausalGraph, Method, PriorKnowledge
from causal_prompting.core.serialization import (
    matrix_field,
    read_yaml_artifact,
    write_matrix_table,
    write_yaml,
)
from causal_prompting.scd.causal_discoverer import CausalDiscoverer
from causal_prompting.scd.direct_lingam_causal_discoverer import DirectLingamCausalDiscoverer
from causal_prompting.scd.exact_search_causal_discoverer import ExactSearchCausalDiscoverer
from causal_prompting.scd.pc_causal_discoverer import PcCausalDiscoverer
from causal_prompting.scd.scd_exceptions import BootstrapFailureError, ScdError

_MAX_FAILED_RATIO = 0.1
"""Fraction of failed resamples above which the whole bootstrap fails."""


@dataclass(slots=True, frozen=True, kw_only=True, eq=False)
class BootstrapSummary:
    """
    Edge emergence frequencies over bootstrap resamples.
    """

    variable_names: tuple[str, ...]
    """Ordered variable labels."""
    directed_prob: np.ndarray
    """Entry (i, j) = fraction of resamples producing x_j -> x_i."""
    undirected_prob: np.ndarray
    """Symmetric fraction of resamples producing x_i - x_j (PC only, else zeros)."""
    resamples: int
    """Number of resamples the frequencies are computed over."""
    failed_resamples: int = 0
    """Resamples that failed numerically and were skipped."""

    def __post_init__(self):
        """
        Validates ranges, symmetry and the zero diagonal.
        """
        if self.resamples < 1:
            raise ValueError(f"Bootstrap needs at least one resample, got {self.resamples}.")
        size = len(self.variable_names)
        for name in ("directed_prob", "undirected_prob"):
            matrix = np.array(getattr(self, name), dtype=float)
            if matrix.shape != (size, size):
                raise ValueError(f"{name} must be {size}x{size}, got {matrix.shape}.")
            if np.any(matrix < 0) or np.any(matrix > 1):
                raise ValueError(f"{name} entries must lie in [0, 1].")
            if np.any(np.diag(matrix)):
                raise ValueError(f"{name} diagonal must be zero.")
            matrix.setflags(write=False)
            object.__setattr__(self, name, matrix)
        object.__setattr__(self, "variable_names", tuple(self.variable_names))
        if not np.allclose(self.undirected_prob, self.undirected_prob.T):
            raise ValueError("undirected_prob must be symmetric.")


def make_discoverer(
    method: Method,
    pc_alpha: float = 0.05,
    max_variables: int = 12,
    prune_threshold: float = 1e-3,
) -> CausalDiscoverer:
    """
    Instantiates the discoverer of a method with its options.

    :param method: Discovery method.
    :param pc_alpha: PC significance level.
    :param max_variables: Exact search variable cap.
    :param prune_threshold: DirectLiNGAM coefficient pruning threshold.
    :return: Discoverer instance.
    """
    match method:
        case Method.PC:
            return PcCausalDiscoverer(alpha=pc_alpha)
        case Method.EXACT_SEARCH:
            return ExactSearchCausalDiscoverer(max_variables=max_variables)
        case Method.DIRECT_LINGAM:
            return DirectLingamCausalDiscoverer(prune_threshold=prune_threshold)


def _run_resample(
    discoverer: CausalDiscoverer,
    dataset: Dataset,
    prior_knowledge: PriorKnowledge | None,
    seed_sequence: np.random.SeedSequence,
    index: int,
) -> CausalGraph | None:
    rng = np.random.default_rng(seed_sequence)
    rows = rng.integers(0, dataset.n_samples, size=dataset.n_samples)
    try:
        resampled = standardize(dataset.resample(rows))
        return discoverer.discover(resampled, prior_knowledge)
    except (ScdError, ConstantColumnError) as e:
        logger.warning(f"Bootstrap resample {index} failed and is skipped: {e}")
        return None


def bootstrap(
    discoverer: CausalDiscoverer,
    dataset: Dataset,
    resamples: int,
    seed: int,
    prior_knowledge: PriorKnowledge | None = None,
    workers: int = 1,
) -> BootstrapSummary:
    """
    Runs a discoverer on resamples of n rows drawn with replacement and counts
    how often each edge emerges.

    Resample b uses the b-th child of SeedSequence(seed), so results are
    identical whatever the number of workers.

    :param discoverer: Discovery algorithm.
    :param dataset: Dataset to resample.
    :param resamples: Number of resamples B.
    :param seed: Root seed.
    :param prior_knowledge: Optional constraints applied to every run.
    :param workers: Number of threads running resamples concurrently.
    :return: Emergence frequencies.
    :raises BootstrapFailureError: If more than 10% of resamples fail.
    """
    if resamples < 1:
        raise ValueError(f"Bootstrap needs at least one resample, got {resamples}.")

    children = np.random.SeedSequence(seed).spawn(resamples)
    logger.info(
        f"Bootstrapping {discoverer.method.display_name} with {resamples} resamples"
    )
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            graphs = list(
                executor.map(
                    lambda item: _run_resample(
                        discoverer, dataset, prior_knowledge, item[1], item[0]
                    ),
                    enumerate(children),
                )
            )
    else:
        graphs = [
            _run_resample(discoverer, dataset, prior_knowledge, child, index)
            for index, child in enumerate(children)
        ]

    succeeded = [graph for graph in graphs if graph is not None]
    failed = resamples - len(succeeded)
    if failed > _MAX_FAILED_RATIO * resamples or not succeeded:
        raise BootstrapFailureError(failed, resamples, _MAX_FAILED_RATIO)

    size = dataset.n_variables
    directed_counts = np.zeros((size, size), dtype=int)
    undirected_counts = np.zeros((size, size), dtype=int)
    for graph in succeeded:
        directed_counts += graph.adjacency
        for i, j in graph.undirected:
            undirected_counts[i, j] += 1
            undirected_counts[j, i] += 1

    return BootstrapSummary(
        variable_names=dataset.variable_names,
        directed_prob=directed_counts / len(succeeded),
        undirected_prob=undirected_counts / len(succeeded),
        resamples=len(succeeded),
        failed_resamples=failed,
    )


def save_bootstrap(path: str | Path, summary: BootstrapSummary) -> None:
    """
    Stores a bootstrap summary as YAML plus labeled CSV tables next to it.

    :param path: Destination YAML file.
    :param summary: Summary to store.
    """
    path = Path(path)
    write_yaml(
        path,
        {
            "artifact": "bootstrap_summary",
            "variables": list(summary.variable_names),
            "resamples": summary.resamples,
            "failed_resamples": summary.failed_resamples,
            "directed_prob": summary.directed_prob.tolist(),
            "undirected_prob": summary.undirected_prob.tolist(),
        },
    )
    write_matrix_table(
        path.with_name(f"{path.stem}_directed.csv"),
        summary.directed_prob,
        summary.variable_names,
    )
    if np.any(summary.undirected_prob):
        write_matrix_table(
            path.with_name(f"{path.stem}_undirected.csv"),
            summary.undirected_prob,
            summary.variable_names,
        )


def load_bootstrap(path: str | Path) -> BootstrapSummary:
    """
    Loads a bootstrap summary stored by save_bootstrap.

    :param path: YAML file.
    :return: The summary.
    :raises ArtifactValidationError: If a field is missing or malformed.
    """
    artifact = str(path)
    content = read_yaml_artifact(
        path,
        "bootstrap_summary",
        ("variables", "resamples", "directed_prob", "undirected_prob"),
    )
    names = tuple(str(name) for name in content["variables"])
    try:
        return BootstrapSummary(
            variable_names=names,
            directed_prob=matrix_field(content, "directed_prob", len(names), artifact),
            undirected_prob=matrix_field(content, "undirected_prob", len(names), artifact),
            resamples=int(content["resamples"]),
            failed_resamples=int(content.get("failed_resamples", 0)),
        )
    except ValueError as e:
        raise ArtifactValidationError(artifact, "directed_prob", f"Invalid summary ({e}) in field")


def undirected_pairs(summary: BootstrapSummary) -> list[tuple[int, int]]:
    """
    Pairs (i < j) with a nonzero undirected frequency, sorted.

    :param summary: Bootstrap summary.
    :return: Sorted unordered pairs.
    """
    return [
        (i, j)
        for i, j in combinations(range(len(summary.variable_names)), 2)
        if summary.undirected_prob[i, j] > 0
    ]
