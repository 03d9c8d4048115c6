import numpy as np
import pytest

from causal_prompting.core.dataset import Dataset, standardize
from causal_prompting.core.graph import Method, PriorKnowledge
from causal_prompting.scd.direct_lingam_causal_discoverer import DirectLingamCausalDiscoverer
from causal_prompting.scd.scd_exceptions import PriorKnowledgeCycleError
from tests.conftest import linear_sem_sample


def _pk(entries) -> PriorKnowledge:
    return PriorKnowledge(
        variable_names=("x1", "x2"), entries=np.array(entries), method=Method.DIRECT_LINGAM
    )


def test_recovers_direction_and_coefficient(chain_dataset):
    graph = DirectLingamCausalDiscoverer().discover(chain_dataset)

    # Standardized coefficient of x1 -> x2: 0.8 * sd(x1) / sd(x2) with uniform(-1, 1) inputs.
    expected = 0.8 * np.sqrt(1 / 3) / np.sqrt(1.64 / 3)
    assert graph.edges() == [(0, 1)]
    assert graph.coefficients[1, 0] == pytest.approx(expected, abs=0.05)


def test_forced_edge_overrides_the_data(chain_dataset):
    graph = DirectLingamCausalDiscoverer().discover(chain_dataset, _pk([[0, 1], [-1, 0]]))

    assert graph.has_edge(0, 1)
    assert not graph.has_edge(1, 0)


def test_forbidden_edge_is_absent(chain_dataset):
    graph = DirectLingamCausalDiscoverer().discover(chain_dataset, _pk([[0, -1], [0, 0]]))

    assert not graph.has_edge(1, 0)
    assert graph.has_edge(0, 1)


def test_forced_cycle_is_rejected(chain_dataset):
    with pytest.raises(PriorKnowledgeCycleError):
        DirectLingamCausalDiscoverer().discover(chain_dataset, _pk([[0, 1], [1, 0]]))


def test_forced_edge_survives_pruning(chain_dataset):
    discoverer = DirectLingamCausalDiscoverer(prune_threshold=10.0)

    graph = discoverer.discover(chain_dataset, _pk([[0, -1], [1, 0]]))

    assert graph.edges() == [(0, 1)]


def test_needs_more_observations_than_variables():
    values = np.array([[1.0, 2.0, 0.0], [2.0, 1.0, 1.0], [0.0, 0.0, 3.0]])
    dataset = standardize(Dataset(variable_names=("a", "b", "c"), values=values))

    with pytest.raises(ValueError, match="more observations"):
        DirectLingamCausalDiscoverer().discover(dataset)


def test_prior_knowledge_for_another_method_is_rejected(chain_dataset):
    pk = PriorKnowledge.unconstrained(("x1", "x2"), Method.PC)

    with pytest.raises(ValueError, match="cannot constrain"):
        DirectLingamCausalDiscoverer().discover(chain_dataset, pk)


def _random_model(seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    order = rng.permutation(5)
    adjacency = np.zeros((5, 5), dtype=int)
    for later in range(5):
        for earlier in range(later):
            if rng.random() < 0.5:
                adjacency[order[later], order[earlier]] = 1
    weights = rng.uniform(0.5, 1.0, size=(5, 5)) * rng.choice((-1.0, 1.0), size=(5, 5))
    return adjacency, adjacency * weights


def test_five_variable_causal_order_and_coefficients():
    names = ("a", "b", "c", "d", "e")
    correct_orders = 0
    for seed in range(20):
        adjacency, weights = _random_model(seed)
        values = linear_sem_sample(adjacency, weights, 3000, seed=seed)
        dataset = standardize(Dataset(variable_names=names, values=values))

        graph = DirectLingamCausalDiscoverer().discover(dataset)
        order = DirectLingamCausalDiscoverer().estimate_causal_order(dataset)

        position = {node: index for index, node in enumerate(order)}
        if all(position[cause] < position[effect] for effect, cause in zip(*np.nonzero(adjacency))):
            correct_orders += 1
            scale = values.std(axis=0)
            standardized_truth = weights * scale[np.newaxis, :] / scale[:, np.newaxis]
            estimated = graph.coefficients if graph.coefficients is not None else np.zeros((5, 5))
            assert np.all(np.abs(estimated - standardized_truth) < 0.1), f"seed {seed}"

    assert correct_orders >= 19
