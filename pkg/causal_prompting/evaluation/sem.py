from dataclasses import asdict, dataclass

import networkx as nx
import numpy as np
from loguru import logger

from causal_prompting.core.dataset import Dataset
from causal_prompting.core.graph import CausalGraph
from causal_prompting.evaluation.evaluation_exceptions import (
    NotADagError,
    UnderidentifiedModelError,
)


@dataclass(slots=True, frozen=True, kw_only=True)
class SemFit:
    """
    Maximum-likelihood fit of a recursive linear-Gaussian structural equation model.
    """

    chi2: float
    """Likelihood-ratio statistic (n - 1) * F_ML against the sample covariance."""
    df: int
    """Moments minus free parameters."""
    loglik: float
    """Full Gaussian log-likelihood of the data under the implied covariance."""
    cfi: float
    """Comparative fit index against the independence model, in [0, 1]."""
    rmsea: float
    """Root mean square error of approximation."""
    bic: float
    """-2 * loglik + free parameters * log(n)."""
    n_parameters: int
    """Path coefficients plus residual variances."""

    def to_dict(self) -> dict:
        return asdict(self)


def _oriented_adjacency(graph: CausalGraph) -> np.ndarray:
    """
    Directed adjacency with undirected edges oriented along a topological
    order of the directed part.

    :raises NotADagError: If the directed part has a cycle.
    """
    directed = graph.to_networkx()
    if not nx.is_directed_acyclic_graph(directed):
        raise NotADagError()
    adjacency = np.array(graph.adjacency, dtype=int)
    if graph.undirected:
        position = {
            node: rank for rank, node in enumerate(nx.lexicographical_topological_sort(directed))
        }
        for i, j in graph.undirected_edges():
            cause, effect = (i, j) if position[i] < position[j] else (j, i)
            adjacency[effect, cause] = 1
        logger.debug(
            f"Oriented {len(graph.undirected)} undirected edge(s) along a topological order"
        )
    return adjacency


def _discrepancy(sample: np.ndarray, implied: np.ndarray) -> float:
    """
    :return: log|Sigma| + tr(S Sigma^-1).
    """
    sign, log_det = np.linalg.slogdet(implied)
    if sign <= 0:
        raise np.linalg.LinAlgError("Implied covariance is not positive definite")
    trace = float(np.trace(sample @ np.linalg.inv(implied)))
    return float(log_det) + trace


def fit_sem(dataset: Dataset, graph: CausalGraph) -> SemFit:
    """
    Fits a graph as a recursive linear-Gaussian SEM. Path coefficients are the
    per-equation least-squares estimates, residual variances their residual
    variances, which together give the maximum-likelihood solution.

    :param dataset: Data the graph is fitted on.
    :param graph: Acyclic graph over the dataset's variables.
    :return: Fit statistics.
    :raises NotADagError: If the graph has a directed cycle.
    :raises UnderidentifiedModelError: If parameters exceed moments or observations.
    """
    if graph.variable_names != dataset.variable_names:
        raise ValueError("The graph does not cover the dataset's variables.")
    adjacency = _oriented_adjacency(graph)
    size = dataset.n_variables
    n = dataset.n_samples
    moments = size * (size + 1) // 2
    n_parameters = int(adjacency.sum()) + size
    if n_parameters > moments:
        raise UnderidentifiedModelError(n_parameters, moments, "covariance moments")
    if n <= n_parameters:
        raise UnderidentifiedModelError(n_parameters, n - 1, "the number of observations minus one")

    sample = np.atleast_2d(np.cov(dataset.values, rowvar=False, bias=True))
    coefficients = np.zeros((size, size))
    residual_variances = np.zeros(size)
    try:
        for node in range(size):
            parents = list(np.nonzero(adjacency[node])[0])
            residual_variances[node] = sample[node, node]
            if parents:
                weights = np.linalg.solve(
                    sample[np.ix_(parents, parents)], sample[parents, node]
                )
                coefficients[node, parents] = weights
                residual_variances[node] -= float(sample[node, parents] @ weights)

        inverse = np.linalg.inv(np.eye(size) - coefficients)
        implied = inverse @ np.diag(residual_variances) @ inverse.T
        model_term = _discrepancy(sample, implied)
        sample_sign, sample_log_det = np.linalg.slogdet(sample)
        if sample_sign <= 0:
            raise np.linalg.LinAlgError("Sample covariance is singular")
    except np.linalg.LinAlgError as e:
        raise UnderidentifiedModelError(n_parameters, moments, f"what the data identifies ({e})")

    f_ml = max(model_term - sample_log_det - size, 0.0)
    chi2 = (n - 1) * f_ml
    df = moments - n_parameters

    baseline_f = max(float(np.sum(np.log(np.diag(sample)))) - sample_log_det, 0.0)
    baseline_chi2 = (n - 1) * baseline_f
    baseline_df = moments - size

    excess = max(chi2 - df, 0.0)
    denominator = max(baseline_chi2 - baseline_df, chi2 - df, 0.0)
    cfi = 1.0 if denominator == 0 else float(np.clip(1.0 - excess / denominator, 0.0, 1.0))
    rmsea = 0.0 if df == 0 else float(np.sqrt(excess / (df * (n - 1))))

    loglik = -n / 2 * (size * np.log(2 * np.pi) + model_term)
    bic = -2 * loglik + n_parameters * np.log(n)
    return SemFit(
        chi2=float(chi2),
        df=df,
        loglik=float(loglik),
        cfi=cfi,
        rmsea=rmsea,
        bic=float(bic),
        n_parameters=n_parameters,
    )
