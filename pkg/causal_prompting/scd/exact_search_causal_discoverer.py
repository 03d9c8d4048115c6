import numpy as np
from loguru import logger

from causal_prompting.core.dataset import Dataset
from causal_prompting.core.graph import CausalGraph, Method, PriorKnowledge
from causal_prompting.scd.causal_discoverer import CausalDiscoverer
from causal_prompting.scd.scd_exceptions import ScdNumericalError, VariableCapExceededError

_MIN_RESIDUAL_VARIANCE = 1e-300
"""Lower bound on RSS/n to keep the log finite for exactly explained variables."""


def local_score(covariance: np.ndarray, n_samples: int, node: int, parents: tuple[int, ...]) -> float:
    """
    Gaussian BIC contribution of one node: -n * log(RSS/n) - |parents| * log(n).

    :param covariance: Population covariance (X^T X / n) of the standardized data.
    :param n_samples: Number of observations n.
    :param node: Child variable.
    :param parents: Parent variables.
    :return: Local score (higher is better).
    :raises np.linalg.LinAlgError: If the parents' covariance is singular.
    """
    residual_variance = covariance[node, node]
    if parents:
        parent_list = list(parents)
        block = covariance[np.ix_(parent_list, parent_list)]
        cross = covariance[parent_list, node]
        residual_variance -= float(cross @ np.linalg.solve(block, cross))
    residual_variance = max(residual_variance, _MIN_RESIDUAL_VARIANCE)
    return -n_samples * np.log(residual_variance) - len(parents) * np.log(n_samples)


def graph_score(dataset: Dataset, adjacency: np.ndarray) -> float:
    """
    Decomposable score of a DAG: the sum of the local scores of its nodes.

    :param dataset: Standardized dataset.
    :param adjacency: Binary adjacency (row = effect, column = cause).
    :return: Score of the DAG.
    """
    covariance = _covariance(dataset)
    return sum(
        local_score(
            covariance,
            dataset.n_samples,
            node,
            tuple(int(k) for k in np.nonzero(adjacency[node])[0]),
        )
        for node in range(dataset.n_variables)
    )


def _covariance(dataset: Dataset) -> np.ndarray:
    values = dataset.values - dataset.values.mean(axis=0)
    return values.T @ values / dataset.n_samples


def _bits(mask: int) -> tuple[int, ...]:
    return tuple(index for index in range(mask.bit_length()) if mask >> index & 1)


class ExactSearchCausalDiscoverer(CausalDiscoverer):
    """
    Score-optimal DAG search by dynamic programming over variable subsets.

    A super-structure (binary prior knowledge) restricts the candidate
    parents: x_j -> x_i is allowed only when entry (i, j) is not 0.
    """

    method = Method.EXACT_SEARCH

    _max_variables: int
    """Largest number of variables the exponential search accepts."""

    def __init__(self, max_variables: int = 12) -> None:
        super().__init__()
        if max_variables < 1:
            raise ValueError(f"Exact search cap must be positive, got {max_variables}.")
        self._max_variables = max_variables

    def discover(
        self, dataset: Dataset, prior_knowledge: PriorKnowledge | None = None
    ) -> CausalGraph:
        self._check_prior_knowledge(dataset, prior_knowledge)
        size = dataset.n_variables
        if size > self._max_variables:
            raise VariableCapExceededError(size, self._max_variables)

        allowed_masks = []
        for node in range(size):
            mask = 0
            for cause in range(size):
                if cause != node and (
                    prior_knowledge is None or not prior_knowledge.is_forbidden(node, cause)
                ):
                    mask |= 1 << cause
            allowed_masks.append(mask)

        best_parents = self._best_parent_sets(dataset, allowed_masks)
        order = self._best_order(best_parents, size)

        adjacency = np.zeros((size, size), dtype=int)
        predecessors = 0
        for node in order:
            _, parents = best_parents[node][predecessors]
            for parent in _bits(parents):
                adjacency[node, parent] = 1
            predecessors |= 1 << node

        logger.debug(f"Exact search selected {int(adjacency.sum())} edges, order {order}")
        return CausalGraph(variable_names=dataset.variable_names, adjacency=adjacency)

    def _best_parent_sets(
        self, dataset: Dataset, allowed_masks: list[int]
    ) -> list[list[tuple[float, int]]]:
        """
        For every node and every candidate set C (bitmask), the best-scoring
        allowed parent set contained in C.

        :return: best[node][C] = (score, parent mask).
        """
        size = dataset.n_variables
        covariance = _covariance(dataset)
        full = 1 << size
        best: list[list[tuple[float, int]]] = []
        for node in range(size):
            table: list[tuple[float, int]] = [(-np.inf, 0)] * full
            for candidates in range(full):
                if candidates >> node & 1:
                    continue
                entry = (-np.inf, 0)
                if candidates & ~allowed_masks[node] == 0:
                    try:
                        entry = (
                            local_score(covariance, dataset.n_samples, node, _bits(candidates)),
                            candidates,
                        )
                    except np.linalg.LinAlgError:
                        raise ScdNumericalError(
                            f"Gaussian score of {dataset.variable_names[node]} given parents",
                            [dataset.variable_names[k] for k in _bits(candidates)],
                        )
                for removed in _bits(candidates):
                    subset_entry = table[candidates & ~(1 << removed)]
                    if subset_entry[0] > entry[0]:
                        entry = subset_entry
                table[candidates] = entry
            best.append(table)
        return best

    def _best_order(self, best_parents: list[list[tuple[float, int]]], size: int) -> list[int]:
        """
        Finds the variable order whose best parent sets maximize the total score.

        :return: Optimal order (sinks last).
        """
        full = 1 << size
        scores = [-np.inf] * full
        sinks = [-1] * full
        scores[0] = 0.0
        for subset in range(1, full):
            for sink in _bits(subset):
                rest = subset & ~(1 << sink)
                candidate = scores[rest] + best_parents[sink][rest][0]
                if candidate > scores[subset]:
                    scores[subset] = candidate
                    sinks[subset] = sink

        order: list[int] = []
        subset = full - 1
        while subset:
            sink = sinks[subset]
            order.append(sink)
            subset &= ~(1 << sink)
        order.reverse()
        return order
