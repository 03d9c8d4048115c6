from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from causal_prompting.core.dataset import Dataset, standardize
from causal_prompting.core.fixtures import ground_truth_fixture
from causal_prompting.core.graph import CausalGraph
from causal_prompting.core.serialization import write_matrix_table
from causal_prompting.scd.bootstrap import BootstrapSummary

GOLDEN_DIR = Path(__file__).parent / "golden"

WEATHER_NAMES = ("Altitude", "Temperature", "Sunshine")
WEATHER_THEME = "the climate of Germany"
WEATHER_VARIABLES = "Altitude, Temperature, Sunshine"
WEATHER_DATASET = "weather stations in Germany"


def linear_sem_sample(
    adjacency: np.ndarray, weights: np.ndarray, n_samples: int, seed: int
) -> np.ndarray:
    """
    Samples a linear acyclic model with uniform noise; entry (i, j) of the
    matrices refers to x_j -> x_i.
    """
    rng = np.random.default_rng(seed)
    size = adjacency.shape[0]
    coefficients = adjacency * weights
    noise = rng.uniform(-1.0, 1.0, size=(n_samples, size))
    values = np.zeros((n_samples, size))
    order = _topological_order(adjacency)
    for node in order:
        values[:, node] = values @ coefficients[node] + noise[:, node]
    return values


def _topological_order(adjacency: np.ndarray) -> list[int]:
    remaining = set(range(adjacency.shape[0]))
    order = []
    while remaining:
        ready = sorted(
            node for node in remaining if not any(adjacency[node, parent] for parent in remaining)
        )
        order.extend(ready)
        remaining -= set(ready)
    return order


@pytest.fixture
def chain_dataset() -> Dataset:
    """x2 = 0.8 * x1 + uniform noise, n = 3000."""
    rng = np.random.default_rng(7)
    x1 = rng.uniform(-1.0, 1.0, 3000)
    x2 = 0.8 * x1 + rng.uniform(-1.0, 1.0, 3000)
    return standardize(Dataset(variable_names=("x1", "x2"), values=np.column_stack([x1, x2])))


@pytest.fixture
def dwd_ground_truth():
    return ground_truth_fixture("DWD")


@pytest.fixture
def dwd_dataset(dwd_ground_truth) -> Dataset:
    weights = np.full(dwd_ground_truth.adjacency.shape, 0.9)
    values = linear_sem_sample(dwd_ground_truth.adjacency, weights, 600, seed=11)
    return standardize(Dataset(variable_names=dwd_ground_truth.variable_names, values=values))


@pytest.fixture
def dwd_csv(tmp_path, dwd_dataset) -> Path:
    path = tmp_path / "dwd.csv"
    pd.DataFrame(dwd_dataset.values, columns=list(dwd_dataset.variable_names)).to_csv(
        path, index=False
    )
    return path


@pytest.fixture
def dwd_probability_table(tmp_path, dwd_ground_truth) -> Path:
    """Yes-probabilities that mirror the ground truth, with one undecided pair."""
    table = np.where(dwd_ground_truth.adjacency == 1, 0.97, 0.02)
    table[0, 5] = 0.5
    np.fill_diagonal(table, np.nan)
    path = tmp_path / "dwd_probabilities.csv"
    write_matrix_table(path, table, dwd_ground_truth.variable_names)
    return path


@pytest.fixture
def weather_lingam_graph() -> CausalGraph:
    return CausalGraph.from_edge_list(
        WEATHER_NAMES,
        [(0, 1), (0, 2)],
        coefficients={(0, 1): -0.8, (0, 2): 0.25},
    )


@pytest.fixture
def weather_dag_graph() -> CausalGraph:
    return CausalGraph.from_edge_list(WEATHER_NAMES, [(0, 1), (0, 2)])


@pytest.fixture
def weather_bootstrap() -> BootstrapSummary:
    directed = np.zeros((3, 3))
    directed[1, 0] = 0.85
    directed[2, 0] = 0.4
    directed[0, 2] = 0.05
    return BootstrapSummary(
        variable_names=WEATHER_NAMES,
        directed_prob=directed,
        undirected_prob=np.zeros((3, 3)),
        resamples=1000,
    )


@pytest.fixture
def weather_pc_graph() -> CausalGraph:
    return CausalGraph.from_edge_list(WEATHER_NAMES, [(0, 1)], undirected=[(1, 2)])


@pytest.fixture
def weather_pc_bootstrap() -> BootstrapSummary:
    directed = np.zeros((3, 3))
    directed[1, 0] = 0.62
    undirected = np.zeros((3, 3))
    undirected[1, 2] = undirected[2, 1] = 0.3
    return BootstrapSummary(
        variable_names=WEATHER_NAMES,
        directed_prob=directed,
        undirected_prob=undirected,
        resamples=1000,
    )
