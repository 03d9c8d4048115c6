from itertools import combinations

import numpy as np
from loguru import logger
from scipy import stats

from causal_prompting.core.dataset import Dataset
from causal_prompting.core.graph import CausalGraph, Method, PriorKnowledge
from causal_prompting.scd.causal_discoverer import CausalDiscoverer
from causal_prompting.scd.scd_exceptions import ScdNumericalError

_MAX_CONDITION_NUMBER = 1e12
"""Correlation submatrices above this condition number are treated as singular."""

_CORRELATION_CLIP = 1.0 - 1e-12
"""Partial correlations are clipped to (-1, 1) before the Fisher z-transform."""


class PcCausalDiscoverer(CausalDiscoverer):
    """
    PC algorithm with Fisher-z partial-correlation tests (order-independent
    skeleton phase), v-structure orientation and Meek rules 1-3.

    Prior knowledge semantics: a Forbidden entry (i, j) never appears as the
    directed edge x_j -> x_i; a Forced entry (i, j) makes x_i and x_j adjacent
    with the orientation x_j -> x_i fixed; Unknown imposes nothing.
    """

    method = Method.PC

    _alpha: float
    """Significance level of the conditional-independence tests."""

    def __init__(self, alpha: float = 0.05) -> None:
        super().__init__()
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"PC significance level must be in (0, 1), got {alpha}.")
        self._alpha = alpha

    def discover(
        self, dataset: Dataset, prior_knowledge: PriorKnowledge | None = None
    ) -> CausalGraph:
        self._check_prior_knowledge(dataset, prior_knowledge)
        names = dataset.variable_names
        size = dataset.n_variables
        correlation = np.atleast_2d(np.corrcoef(dataset.values, rowvar=False))

        adjacent = ~np.eye(size, dtype=bool)
        required: set[frozenset[int]] = set()
        if prior_knowledge is not None:
            for cause, effect in prior_knowledge.forced_edges():
                required.add(frozenset((cause, effect)))
            for i, j in combinations(range(size), 2):
                if prior_knowledge.is_forbidden(i, j) and prior_knowledge.is_forbidden(j, i):
                    adjacent[i, j] = adjacent[j, i] = False

        separating_sets = self._learn_skeleton(
            correlation, dataset.n_samples, adjacent, required, names
        )
        arrows, locked = self._orient_from_prior_knowledge(adjacent, prior_knowledge, names)
        self._orient_colliders(adjacent, arrows, locked, separating_sets)
        self._apply_meek_rules(adjacent, arrows, locked)

        adjacency = arrows.T.astype(int)
        undirected = frozenset(
            (i, j)
            for i, j in combinations(range(size), 2)
            if adjacent[i, j] and not arrows[i, j] and not arrows[j, i]
        )
        logger.debug(
            f"PC found {int(adjacency.sum())} directed and {len(undirected)} undirected edges"
        )
        return CausalGraph(variable_names=names, adjacency=adjacency, undirected=undirected)

    def _p_value(
        self,
        correlation: np.ndarray,
        n_samples: int,
        x: int,
        y: int,
        conditioning: tuple[int, ...],
        names: tuple[str, ...],
    ) -> float:
        """
        Fisher-z test of x independent of y given the conditioning set.

        :return: Two-sided p-value.
        :raises ScdNumericalError: If the correlation submatrix is singular.
        """
        indices = [x, y, *conditioning]
        submatrix = correlation[np.ix_(indices, indices)]
        conditioning_names = [names[k] for k in conditioning]
        if np.linalg.cond(submatrix) > _MAX_CONDITION_NUMBER:
            raise ScdNumericalError(
                f"Fisher-z test of {names[x]} and {names[y]} given conditioning set",
                conditioning_names,
            )
        try:
            precision = np.linalg.inv(submatrix)
        except np.linalg.LinAlgError:
            raise ScdNumericalError(
                f"Fisher-z test of {names[x]} and {names[y]} given conditioning set",
                conditioning_names,
            )

        partial = -precision[0, 1] / np.sqrt(precision[0, 0] * precision[1, 1])
        partial = float(np.clip(partial, -_CORRELATION_CLIP, _CORRELATION_CLIP))
        degrees = n_samples - len(conditioning) - 3
        if degrees <= 0:
            raise ScdNumericalError(
                f"Fisher-z test with {n_samples} samples given conditioning set",
                conditioning_names,
            )
        statistic = np.sqrt(degrees) * np.arctanh(partial)
        return float(2.0 * stats.norm.sf(abs(statistic)))

    def _learn_skeleton(
        self,
        correlation: np.ndarray,
        n_samples: int,
        adjacent: np.ndarray,
        required: set[frozenset[int]],
        names: tuple[str, ...],
    ) -> dict[frozenset[int], set[int]]:
        size = adjacent.shape[0]
        separating_sets: dict[frozenset[int], set[int]] = {}
        depth = 0
        while True:
            snapshot = adjacent.copy()
            testable = False
            for x in range(size):
                for y in range(size):
                    if x == y or not adjacent[x, y] or frozenset((x, y)) in required:
                        continue
                    neighbours = [k for k in range(size) if snapshot[x, k] and k != y]
                    if len(neighbours) < depth:
                        continue
                    testable = True
                    for conditioning in combinations(neighbours, depth):
                        p_value = self._p_value(
                            correlation, n_samples, x, y, conditioning, names
                        )
                        if p_value > self._alpha:
                            adjacent[x, y] = adjacent[y, x] = False
                            separating_sets[frozenset((x, y))] = set(conditioning)
                            break
            if not testable:
                break
            depth += 1
        return separating_sets

    def _orient_from_prior_knowledge(
        self,
        adjacent: np.ndarray,
        prior_knowledge: PriorKnowledge | None,
        names: tuple[str, ...],
    ) -> tuple[np.ndarray, np.ndarray]:
        """
        Fixes orientations implied by the prior knowledge.

        :return: arrows[a, b] = a -> b, and locked[a, b] for pairs no rule may reorient.
        """
        size = adjacent.shape[0]
        arrows = np.zeros((size, size), dtype=bool)
        locked = np.zeros((size, size), dtype=bool)
        if prior_knowledge is None:
            return arrows, locked

        for i, j in combinations(range(size), 2):
            if not adjacent[i, j]:
                continue
            j_causes_i = prior_knowledge.is_forced(i, j)
            i_causes_j = prior_knowledge.is_forced(j, i)
            if j_causes_i and i_causes_j:
                logger.warning(
                    f"Both {names[j]} -> {names[i]} and {names[i]} -> {names[j]} are forced; "
                    "keeping the pair undirected"
                )
            elif j_causes_i or (
                prior_knowledge.is_forbidden(j, i) and not prior_knowledge.is_forbidden(i, j)
            ):
                arrows[j, i] = True
            elif i_causes_j or (
                prior_knowledge.is_forbidden(i, j) and not prior_knowledge.is_forbidden(j, i)
            ):
                arrows[i, j] = True
            else:
                continue
            locked[i, j] = locked[j, i] = True
        return arrows, locked

    @staticmethod
    def _is_open(adjacent: np.ndarray, arrows: np.ndarray, locked: np.ndarray, a: int, b: int) -> bool:
        return bool(adjacent[a, b] and not arrows[a, b] and not arrows[b, a] and not locked[a, b])

    def _orient_colliders(
        self,
        adjacent: np.ndarray,
        arrows: np.ndarray,
        locked: np.ndarray,
        separating_sets: dict[frozenset[int], set[int]],
    ) -> None:
        size = adjacent.shape[0]
        for z in range(size):
            neighbours = [k for k in range(size) if adjacent[z, k]]
            for x, y in combinations(neighbours, 2):
                if adjacent[x, y]:
                    continue
                separating = separating_sets.get(frozenset((x, y)))
                if separating is None or z in separating:
                    continue
                for parent in (x, y):
                    if self._is_open(adjacent, arrows, locked, parent, z):
                        arrows[parent, z] = True

    def _apply_meek_rules(
        self, adjacent: np.ndarray, arrows: np.ndarray, locked: np.ndarray
    ) -> None:
        size = adjacent.shape[0]
        changed = True
        while changed:
            changed = False
            for a in range(size):
                for b in range(size):
                    if a == b or not self._is_open(adjacent, arrows, locked, a, b):
                        continue
                    if self._meek_applies(adjacent, arrows, a, b):
                        arrows[a, b] = True
                        changed = True

    def _meek_applies(self, adjacent: np.ndarray, arrows: np.ndarray, a: int, b: int) -> bool:
        """
        Tells whether Meek rules 1-3 orient the undirected edge a - b as a -> b.
        """
        size = adjacent.shape[0]
        for c in range(size):
            if c in (a, b):
                continue
            # R1: c -> a - b with c, b non-adjacent.
            if arrows[c, a] and not adjacent[c, b]:
                return True
            # R2: a -> c -> b.
            if arrows[a, c] and arrows[c, b]:
                return True
        # R3: a - c -> b and a - d -> b with c, d non-adjacent.
        spouses = [
            c
            for c in range(size)
            if c not in (a, b)
            and adjacent[a, c]
            and not arrows[a, c]
            and not arrows[c, a]
            and arrows[c, b]
        ]
        for c, d in combinations(spouses, 2):
            if not adjacent[c, d]:
                return True
        return False
