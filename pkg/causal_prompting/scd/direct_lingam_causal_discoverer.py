import networkx as nx
import numpy as np
from loguru import logger

from causal_prompting.core.dataset import Dataset
from causal_prompting.core.graph import CausalGraph, Method, PriorKnowledge
from causal_prompting.scd.causal_discoverer import CausalDiscoverer
from causal_prompting.scd.scd_exceptions import PriorKnowledgeCycleError, ScdNumericalError

_ENTROPY_K1 = 79.047
_ENTROPY_K2 = 7.4129
_ENTROPY_GAMMA = 0.37457


def _residual(xi: np.ndarray, xj: np.ndarray) -> np.ndarray:
    """The residual when xi is regressed on xj."""
    return xi - (np.cov(xi, xj, bias=True)[0, 1] / np.var(xj)) * xj


def _entropy(u: np.ndarray) -> float:
    """Maximum-entropy approximation of the differential entropy of a unit-variance variable."""
    return (
        (1 + np.log(2 * np.pi)) / 2
        - _ENTROPY_K1 * (np.mean(np.log(np.cosh(u))) - _ENTROPY_GAMMA) ** 2
        - _ENTROPY_K2 * (np.mean(u * np.exp(-(u**2) / 2))) ** 2
    )


def _diff_mutual_info(
    xi_std: np.ndarray, xj_std: np.ndarray, ri_j: np.ndarray, rj_i: np.ndarray
) -> float:
    """Difference of the mutual informations between each variable and the other's residual."""
    return (_entropy(xj_std) + _entropy(ri_j / np.std(ri_j))) - (
        _entropy(xi_std) + _entropy(rj_i / np.std(rj_i))
    )


def _standardized(column: np.ndarray) -> np.ndarray:
    return (column - np.mean(column)) / np.std(column)


class DirectLingamCausalDiscoverer(CausalDiscoverer):
    """
    DirectLiNGAM: iterative exogenous-variable selection with the pairwise
    likelihood-ratio measure, least-squares coefficients along the estimated
    causal order, and magnitude pruning.

    Prior knowledge semantics: a Forced entry (i, j) makes x_j precede x_i and
    keeps the edge x_j -> x_i; a Forbidden entry (i, j) keeps x_j out of the
    regressors of x_i and, when (j, i) is not Forbidden, makes x_i precede x_j;
    Unknown is neutral.
    """

    method = Method.DIRECT_LINGAM

    _prune_threshold: float
    """Edges with |b_ij| below this value are dropped (unless Forced)."""

    def __init__(self, prune_threshold: float = 1e-3) -> None:
        super().__init__()
        if prune_threshold < 0:
            raise ValueError(f"Prune threshold cannot be negative, got {prune_threshold}.")
        self._prune_threshold = prune_threshold

    def discover(
        self, dataset: Dataset, prior_knowledge: PriorKnowledge | None = None
    ) -> CausalGraph:
        self._check_prior_knowledge(dataset, prior_knowledge)
        if dataset.n_samples <= dataset.n_variables:
            raise ValueError(
                f"DirectLiNGAM needs more observations ({dataset.n_samples}) "
                f"than variables ({dataset.n_variables})."
            )
        order_constraints = self._partial_orders(dataset.variable_names, prior_knowledge)
        causal_order = self.estimate_causal_order(dataset, order_constraints)
        logger.debug(
            f"DirectLiNGAM causal order: {[dataset.variable_names[k] for k in causal_order]}"
        )
        coefficients = self._estimate_coefficients(dataset, causal_order, prior_knowledge)
        adjacency = (coefficients != 0).astype(int)
        return CausalGraph(
            variable_names=dataset.variable_names,
            adjacency=adjacency,
            coefficients=coefficients,
        )

    def _partial_orders(
        self, names: tuple[str, ...], prior_knowledge: PriorKnowledge | None
    ) -> nx.DiGraph:
        """
        Builds the precedence graph (edge a -> b means a precedes b).

        :raises PriorKnowledgeCycleError: If the Forced entries are cyclic.
        """
        orders = nx.DiGraph()
        orders.add_nodes_from(range(len(names)))
        if prior_knowledge is None:
            return orders

        orders.add_edges_from(prior_knowledge.forced_edges())
        try:
            cycle = nx.find_cycle(orders)
            raise PriorKnowledgeCycleError([names[a] for a, _ in cycle] + [names[cycle[0][0]]])
        except nx.NetworkXNoCycle:
            pass

        size = len(names)
        for effect in range(size):
            for cause in range(size):
                if not prior_knowledge.is_forbidden(effect, cause):
                    continue
                if prior_knowledge.is_forbidden(cause, effect):
                    continue
                if orders.has_edge(effect, cause):
                    continue
                if nx.has_path(orders, cause, effect):
                    logger.debug(
                        f"Ignoring the order {names[effect]} before {names[cause]}: "
                        "it contradicts the forced orders"
                    )
                    continue
                orders.add_edge(effect, cause)
        return orders

    def estimate_causal_order(
        self, dataset: Dataset, order_constraints: nx.DiGraph | None = None
    ) -> list[int]:
        """
        Estimates the full causal order by repeatedly selecting the most
        exogenous remaining variable and regressing it out of the others.

        :param dataset: Standardized dataset.
        :param order_constraints: Precedence graph the order must respect.
        :return: Variable indices, causes first.
        """
        values = np.array(dataset.values, dtype=float)
        remaining = list(range(dataset.n_variables))
        orders = order_constraints.copy() if order_constraints is not None else nx.DiGraph()
        causal_order: list[int] = []
        while remaining:
            candidates = [
                k
                for k in remaining
                if not orders.has_node(k) or orders.in_degree(k) == 0
            ]
            selected = self._most_exogenous(values, remaining, candidates)
            for k in remaining:
                if k != selected:
                    values[:, k] = _residual(values[:, k], values[:, selected])
            causal_order.append(selected)
            remaining.remove(selected)
            if orders.has_node(selected):
                orders.remove_node(selected)
        return causal_order

    def _most_exogenous(
        self, values: np.ndarray, remaining: list[int], candidates: list[int]
    ) -> int:
        if len(candidates) == 1:
            return candidates[0]
        scores = []
        for i in candidates:
            score = 0.0
            xi_std = _standardized(values[:, i])
            for j in remaining:
                if i == j:
                    continue
                xj_std = _standardized(values[:, j])
                ri_j = _residual(xi_std, xj_std)
                rj_i = _residual(xj_std, xi_std)
                score += min(0.0, _diff_mutual_info(xi_std, xj_std, ri_j, rj_i)) ** 2
            scores.append(-score)
        return candidates[int(np.argmax(scores))]

    def _estimate_coefficients(
        self,
        dataset: Dataset,
        causal_order: list[int],
        prior_knowledge: PriorKnowledge | None,
    ) -> np.ndarray:
        size = dataset.n_variables
        values = dataset.values - dataset.values.mean(axis=0)
        coefficients = np.zeros((size, size))
        for position, target in enumerate(causal_order):
            predictors = [
                p
                for p in causal_order[:position]
                if prior_knowledge is None or not prior_knowledge.is_forbidden(target, p)
            ]
            if not predictors:
                continue
            design = values[:, predictors]
            solution, _, rank, _ = np.linalg.lstsq(design, values[:, target], rcond=None)
            if rank < len(predictors):
                raise ScdNumericalError(
                    f"least-squares regression of {dataset.variable_names[target]}",
                    [dataset.variable_names[p] for p in predictors],
                )
            for predictor, value in zip(predictors, solution):
                forced = prior_knowledge is not None and prior_knowledge.is_forced(
                    target, predictor
                )
                if forced or abs(value) >= self._prune_threshold:
                    coefficients[target, predictor] = value
        return coefficients
