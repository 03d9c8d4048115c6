from itertools import product

import numpy as np
import pytest

from causal_prompting.core.fixtures import ground_truth_fixture
from causal_prompting.core.graph import GroundTruth, Method, PriorKnowledge
from causal_prompting.evaluation.evaluation_exceptions import DimensionMismatchError
from causal_prompting.evaluation.metrics import (
    ConfusionCounts,
    confusion,
    evaluate_structure,
    metrics_on_pk,
    rates,
    shd,
)


def _edit_count(estimated: np.ndarray, reference: np.ndarray) -> int:
    """Counts additions, deletions and reversals entry by entry."""
    size = reference.shape[0]
    total = 0
    for i in range(size):
        for j in range(size):
            g_ij, g_ji = reference[i, j], reference[j, i]
            e_ij, e_ji = estimated[i, j], estimated[j, i]
            if not g_ij and not g_ji and e_ij:
                total += 1
            if not e_ij and not e_ji and g_ij:
                total += 1
            if not g_ij and g_ji and e_ij and not e_ji:
                total += 1
    return total


def _all_digraphs(size: int) -> list[np.ndarray]:
    positions = [(i, j) for i in range(size) for j in range(size) if i != j]
    graphs = []
    for bits in product((0, 1), repeat=len(positions)):
        matrix = np.zeros((size, size), dtype=int)
        for (i, j), bit in zip(positions, bits):
            matrix[i, j] = bit
        graphs.append(matrix)
    return graphs


def test_shd_matches_edit_count_on_every_three_node_pair():
    graphs = _all_digraphs(3)

    assert len(graphs) == 64
    for estimated in graphs:
        for reference in graphs:
            assert shd(estimated, reference) == _edit_count(estimated, reference)


def test_shd_of_identical_graphs_is_zero():
    for graph in _all_digraphs(3):
        assert shd(graph, graph) == 0


def test_shd_is_invariant_under_relabeling():
    rng = np.random.default_rng(0)
    permutation = rng.permutation(3)
    graphs = _all_digraphs(3)

    for _ in range(200):
        estimated, reference = (graphs[k] for k in rng.integers(0, 64, size=2))
        relabeled = shd(
            estimated[np.ix_(permutation, permutation)],
            reference[np.ix_(permutation, permutation)],
        )
        assert relabeled == shd(estimated, reference)


def test_reversal_counts_once():
    estimated = np.array([[0, 0], [1, 0]])
    reference = np.array([[0, 1], [0, 0]])

    assert shd(estimated, reference) == 1


@pytest.mark.parametrize("name", ["AutoMPG", "DWD", "Sachs"])
def test_empty_estimate_misses_every_edge(name):
    ground_truth = ground_truth_fixture(name)
    empty = np.zeros_like(ground_truth.adjacency)

    assert shd(empty, ground_truth.adjacency) == int(ground_truth.adjacency.sum())
    assert confusion(empty, ground_truth.adjacency).fn == int(ground_truth.adjacency.sum())


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        shd(np.zeros((2, 2)), np.zeros((3, 3)))
    with pytest.raises(DimensionMismatchError):
        confusion(np.zeros((3, 3)), np.zeros((3, 2)))


def test_confusion_counts_the_diagonal():
    counts = confusion(np.zeros((3, 3)), np.zeros((3, 3)))

    assert counts == ConfusionCounts(tp=0, fp=0, tn=9, fn=0)


def test_perfect_match():
    adjacency = ground_truth_fixture("AutoMPG").adjacency

    counts = confusion(adjacency, adjacency)

    assert counts.fp == counts.fn == 0
    assert counts.tp == int(adjacency.sum())
    assert counts.tp + counts.fp + counts.tn + counts.fn == adjacency.size


def test_single_miss():
    reference = np.zeros((3, 3), dtype=int)
    reference[1, 0] = 1

    assert confusion(np.zeros((3, 3)), reference).fn == 1


def test_rates():
    fpr, fnr, precision, f1 = rates(ConfusionCounts(tp=1, fp=0, tn=5, fn=0))
    assert (fpr, fnr, precision, f1) == (0.0, 0.0, 1.0, 1.0)

    _, _, precision, _ = rates(ConfusionCounts(tp=0, fp=0, tn=4, fn=2))
    assert precision is None

    _, _, _, f1 = rates(ConfusionCounts(tp=2, fp=1, tn=3, fn=1))
    assert f1 == pytest.approx(2 / 3)


def test_rates_on_all_zero_counts():
    assert rates(ConfusionCounts(tp=0, fp=0, tn=0, fn=0)) == (None, None, None, None)


def test_negative_counts_are_rejected():
    with pytest.raises(ValueError):
        ConfusionCounts(tp=-1, fp=0, tn=0, fn=0)


def test_report_to_dict():
    estimated = np.array([[0, 1], [0, 0]])
    reference = np.array([[0, 0], [1, 0]])

    report = evaluate_structure(estimated, reference).to_dict()

    assert report["shd"] == 1
    assert report["counts"] == {"tp": 0, "fp": 1, "tn": 2, "fn": 1}
    assert report["precision"] == 0.0
    assert report["f1"] == 0.0


def test_metrics_on_pk_count_unknown_as_asserted():
    names = ("a", "b", "c")
    ground_truth = GroundTruth(
        variable_names=names, adjacency=np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]])
    )
    prior_knowledge = PriorKnowledge(
        variable_names=names,
        entries=np.array([[0, 0, 0], [1, 0, 0], [-1, 0, 0]]),
        method=Method.DIRECT_LINGAM,
    )

    report = metrics_on_pk(prior_knowledge, ground_truth)

    assert report.counts == ConfusionCounts(tp=1, fp=1, tn=6, fn=1)
    assert report.shd == 2


def test_metrics_on_pk_dimension_mismatch():
    ground_truth = GroundTruth(variable_names=("a", "b"), adjacency=np.zeros((2, 2), dtype=int))
    prior_knowledge = PriorKnowledge.unconstrained(("a", "b", "c"), Method.PC)

    with pytest.raises(DimensionMismatchError):
        metrics_on_pk(prior_knowledge, ground_truth)
