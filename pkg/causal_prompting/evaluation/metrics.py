from dataclasses import asdict, dataclass

import numpy as np

from causal_prompting.core.graph import GroundTruth, PriorKnowledge
from causal_prompting.evaluation.evaluation_exceptions import DimensionMismatchError

UNDEFINED = None
"""Marker of a rate whose denominator is zero."""


@dataclass(slots=True, frozen=True, kw_only=True)
class ConfusionCounts:
    """
    Edge-level confusion counts, summed over every ordered (i, j) including the diagonal.
    """

    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("Confusion counts cannot be negative.")


@dataclass(slots=True, frozen=True, kw_only=True)
class MetricReport:
    """
    Structural metrics of one estimated matrix against the ground truth.
    Rates are None when their denominator is zero.
    """

    shd: int
    fpr: float | None
    fnr: float | None
    precision: float | None
    f1: float | None
    counts: ConfusionCounts

    def to_dict(self) -> dict:
        content = asdict(self)
        content["counts"] = asdict(self.counts)
        return content


def _binary_pair(estimated: np.ndarray, reference: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    estimated = np.asarray(estimated)
    reference = np.asarray(reference)
    if estimated.shape != reference.shape or estimated.ndim != 2:
        raise DimensionMismatchError(estimated.shape, reference.shape)
    return (estimated != 0).astype(int), (reference != 0).astype(int)


def _indicator(values: np.ndarray) -> np.ndarray:
    return (values == 0).astype(int)


def shd(estimated: np.ndarray, reference: np.ndarray) -> int:
    """
    Structural Hamming distance as the sum of edge additions, deletions and
    reversals, each evaluated entrywise with 1(x) = 1 iff x = 0.

    :param estimated: Estimated binary matrix G' (row = effect, column = cause).
    :param reference: Ground truth binary matrix G.
    :return: A + D + R.
    :raises DimensionMismatchError: If the shapes differ.
    """
    g_est, g = _binary_pair(estimated, reference)
    additions = _indicator(g) * _indicator(g.T) * _indicator(g_est - 1)
    deletions = _indicator(g_est) * _indicator(g_est.T) * _indicator(g - 1)
    reversals = _indicator(g) * _indicator(g.T - 1) * _indicator(g_est - 1) * _indicator(g_est.T)
    return int(additions.sum() + deletions.sum() + reversals.sum())


def confusion(estimated: np.ndarray, reference: np.ndarray) -> ConfusionCounts:
    """
    Counts true/false positives and negatives over all d^2 entries.

    :param estimated: Estimated binary matrix.
    :param reference: Ground truth binary matrix.
    :return: Confusion counts summing to d^2.
    :raises DimensionMismatchError: If the shapes differ.
    """
    g_est, g = _binary_pair(estimated, reference)
    return ConfusionCounts(
        tp=int(np.sum((g == 1) & (g_est == 1))),
        fp=int(np.sum((g == 0) & (g_est == 1))),
        tn=int(np.sum((g == 0) & (g_est == 0))),
        fn=int(np.sum((g == 1) & (g_est == 0))),
    )


def _ratio(numerator: int, denominator: int) -> float | None:
    return UNDEFINED if denominator == 0 else numerator / denominator


def rates(counts: ConfusionCounts) -> tuple[float | None, float | None, float | None, float | None]:
    """
    False positive rate, false negative rate, precision and F1 score.

    :param counts: Confusion counts.
    :return: (fpr, fnr, precision, f1), each None when undefined.
    """
    return (
        _ratio(counts.fp, counts.tn + counts.fp),
        _ratio(counts.fn, counts.tp + counts.fn),
        _ratio(counts.tp, counts.tp + counts.fp),
        _ratio(2 * counts.tp, 2 * counts.tp + counts.fn + counts.fp),
    )


def evaluate_structure(estimated: np.ndarray, reference: np.ndarray) -> MetricReport:
    """
    Computes SHD, the confusion counts and the rates of an estimated matrix.

    :param estimated: Estimated binary matrix.
    :param reference: Ground truth binary matrix.
    :return: Metric report.
    """
    counts = confusion(estimated, reference)
    fpr, fnr, precision, f1 = rates(counts)
    return MetricReport(
        shd=shd(estimated, reference),
        fpr=fpr,
        fnr=fnr,
        precision=precision,
        f1=f1,
        counts=counts,
    )


def metrics_on_pk(prior_knowledge: PriorKnowledge, ground_truth: GroundTruth) -> MetricReport:
    """
    Evaluates a prior knowledge matrix through |PK|: Forced and Unknown both
    count as asserted edges, Forbidden as absent.

    :param prior_knowledge: Prior knowledge.
    :param ground_truth: Reference structure.
    :return: Metric report of |PK|.
    :raises DimensionMismatchError: If the sizes differ.
    """
    return evaluate_structure(np.abs(prior_knowledge.entries), ground_truth.adjacency)
