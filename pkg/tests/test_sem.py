import numpy as np
import pytest

from causal_prompting.core.dataset import Dataset, standardize
from causal_prompting.core.graph import CausalGraph
from causal_prompting.evaluation.evaluation_exceptions import (
    NotADagError,
    UnderidentifiedModelError,
)
from causal_prompting.evaluation.sem import fit_sem
from tests.conftest import linear_sem_sample

NAMES = ("x1", "x2", "x3", "x4")
# x1 -> x2, x1 -> x3, x2 -> x4, x3 -> x4
TRUE_EDGES = [(0, 1), (0, 2), (1, 3), (2, 3)]


def _diamond(seed: int, n_samples: int = 5000) -> Dataset:
    adjacency = np.zeros((4, 4), dtype=int)
    for cause, effect in TRUE_EDGES:
        adjacency[effect, cause] = 1
    values = linear_sem_sample(adjacency, np.full((4, 4), 0.7), n_samples, seed)
    return standardize(Dataset(variable_names=NAMES, values=values))


def test_saturated_model_reproduces_the_covariance():
    dataset = _diamond(0)
    edges = [(i, j) for i in range(4) for j in range(4) if i < j]

    fit = fit_sem(dataset, CausalGraph.from_edge_list(NAMES, edges))

    assert fit.df == 0
    assert fit.chi2 < 1e-6
    assert fit.cfi == 1.0
    assert fit.rmsea == 0.0
    assert fit.n_parameters == 10


@pytest.mark.parametrize("seed", range(20))
def test_true_structure_fits_well(seed):
    fit = fit_sem(_diamond(seed), CausalGraph.from_edge_list(NAMES, TRUE_EDGES))

    assert fit.df == 2
    assert fit.rmsea < 0.05
    assert 0.0 <= fit.cfi <= 1.0


def test_bic_penalizes_a_spurious_edge():
    wins = 0
    for seed in range(20):
        dataset = _diamond(seed)
        true_fit = fit_sem(dataset, CausalGraph.from_edge_list(NAMES, TRUE_EDGES))
        spurious_fit = fit_sem(
            dataset, CausalGraph.from_edge_list(NAMES, [*TRUE_EDGES, (0, 3)])
        )
        wins += true_fit.bic < spurious_fit.bic

    assert wins >= 18


def test_missing_edge_fits_worse():
    dataset = _diamond(3)

    true_fit = fit_sem(dataset, CausalGraph.from_edge_list(NAMES, TRUE_EDGES))
    missing_fit = fit_sem(dataset, CausalGraph.from_edge_list(NAMES, TRUE_EDGES[1:]))

    assert missing_fit.chi2 > true_fit.chi2
    assert missing_fit.bic > true_fit.bic
    assert missing_fit.rmsea > 0.05


def test_undirected_edges_are_oriented():
    dataset = _diamond(1)
    directed = CausalGraph.from_edge_list(NAMES, TRUE_EDGES)
    partially_directed = CausalGraph.from_edge_list(
        NAMES, [(1, 3), (2, 3)], undirected=[(0, 1), (0, 2)]
    )

    assert fit_sem(dataset, partially_directed) == fit_sem(dataset, directed)


def test_cyclic_graph_is_rejected():
    graph = CausalGraph.from_edge_list(NAMES, [(0, 1), (1, 2), (2, 0)])

    with pytest.raises(NotADagError):
        fit_sem(_diamond(0), graph)


def test_too_few_samples():
    dataset = _diamond(0, n_samples=5)
    graph = CausalGraph.from_edge_list(NAMES, TRUE_EDGES)

    with pytest.raises(UnderidentifiedModelError) as e:
        fit_sem(dataset, graph)
    assert e.value.parameters == 8


def test_graph_must_cover_the_dataset():
    with pytest.raises(ValueError):
        fit_sem(_diamond(0), CausalGraph.empty(("a", "b", "c", "d")))


def test_to_dict():
    fit = fit_sem(_diamond(0), CausalGraph.from_edge_list(NAMES, TRUE_EDGES))

    assert set(fit.to_dict()) == {"chi2", "df", "loglik", "cfi", "rmsea", "bic", "n_parameters"}
