import numpy as np
from loguru import logger

from causal_prompting.core.graph import Constraint, Method, PriorKnowledge
from causal_prompting.llm.confidence import ConfidenceMatrix


def to_prior_knowledge(
    cm: ConfidenceMatrix,
    method: Method,
    alpha1: float = 0.05,
    alpha2: float = 0.95,
) -> PriorKnowledge:
    """
    Thresholds mean yes-probabilities into a prior knowledge matrix:
    p < alpha1 gives Forbidden, p >= alpha2 gives Forced (except for Exact
    Search), anything else Unknown. Undefined entries (failed pairs) are Unknown.
    For Exact Search the result is binary: Forbidden stays 0, the rest becomes 1.

    :param cm: Confidence matrix.
    :param method: Discovery method the matrix is meant for.
    :param alpha1: Forbidden threshold.
    :param alpha2: Forced threshold.
    :return: Prior knowledge.
    """
    if not 0.0 <= alpha1 < alpha2 <= 1.0:
        raise ValueError(
            f"Thresholds must satisfy 0 <= alpha1 < alpha2 <= 1, got {alpha1} and {alpha2}."
        )
    size = cm.size
    entries = np.full((size, size), int(Constraint.UNKNOWN))
    for i in range(size):
        for j in range(size):
            probability = cm.mean[i, j]
            if i == j:
                entries[i, j] = Constraint.FORBIDDEN
            elif np.isnan(probability):
                continue
            elif probability < alpha1:
                entries[i, j] = Constraint.FORBIDDEN
            elif probability >= alpha2 and method != Method.EXACT_SEARCH:
                entries[i, j] = Constraint.FORCED

    if method == Method.EXACT_SEARCH:
        entries = np.where(entries == Constraint.FORBIDDEN, 0, 1)

    forbidden = int(np.sum(entries == 0)) - size
    forced = int(np.sum(entries == 1)) if method != Method.EXACT_SEARCH else 0
    logger.info(
        f"Prior knowledge for {method.display_name}: {forced} forced, "
        f"{forbidden} forbidden off-diagonal entries"
    )
    return PriorKnowledge(variable_names=cm.variable_names, entries=entries, method=method)
