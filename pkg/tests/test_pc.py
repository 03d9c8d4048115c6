import numpy as np
import pytest

from causal_prompting.core.dataset import Dataset, standardize
from causal_prompting.core.graph import Method, PriorKnowledge
from causal_prompting.scd.pc_causal_discoverer import PcCausalDiscoverer

NAMES = ("a", "b", "c")


@pytest.fixture
def chain() -> Dataset:
    rng = np.random.default_rng(5)
    a = rng.normal(size=2000)
    b = 0.9 * a + rng.normal(size=2000)
    c = 0.9 * b + rng.normal(size=2000)
    return standardize(Dataset(variable_names=NAMES, values=np.column_stack([a, b, c])))


@pytest.fixture
def collider() -> Dataset:
    rng = np.random.default_rng(9)
    a = rng.normal(size=2000)
    b = rng.normal(size=2000)
    c = a + b + rng.normal(size=2000)
    return standardize(Dataset(variable_names=NAMES, values=np.column_stack([a, c, b])))


def _pk(entries) -> PriorKnowledge:
    return PriorKnowledge(variable_names=NAMES, entries=np.array(entries), method=Method.PC)


def test_chain_is_left_undirected(chain):
    graph = PcCausalDiscoverer(alpha=0.01).discover(chain)

    assert graph.edges() == []
    assert graph.undirected_edges() == [(0, 1), (1, 2)]


def test_collider_is_oriented(collider):
    # Column order is (a, c, b): both a and b point into index 1.
    graph = PcCausalDiscoverer(alpha=0.01).discover(collider)

    assert graph.edges() == [(0, 1), (2, 1)]
    assert graph.undirected_edges() == []


def test_forced_edge_propagates_through_meek_rules(chain):
    pk = _pk([[0, -1, -1], [1, 0, -1], [-1, -1, 0]])

    graph = PcCausalDiscoverer(alpha=0.01).discover(chain, pk)

    assert graph.edges() == [(0, 1), (1, 2)]


def test_forbidden_in_both_directions_removes_adjacency(chain):
    pk = _pk([[0, 0, -1], [0, 0, -1], [-1, -1, 0]])

    graph = PcCausalDiscoverer(alpha=0.01).discover(chain, pk)

    assert not graph.has_edge(0, 1) and not graph.has_edge(1, 0)
    assert (0, 1) not in graph.undirected_edges()


def test_one_sided_forbidden_orients_the_edge(chain):
    pk = _pk([[0, 0, -1], [-1, 0, -1], [-1, -1, 0]])

    graph = PcCausalDiscoverer(alpha=0.01).discover(chain, pk)

    assert graph.has_edge(1, 0)


def test_mutually_forced_pair_stays_undirected(chain):
    pk = _pk([[0, 1, -1], [1, 0, -1], [-1, -1, 0]])

    graph = PcCausalDiscoverer(alpha=0.01).discover(chain, pk)

    assert (0, 1) in graph.undirected_edges()


def test_alpha_must_be_a_probability():
    with pytest.raises(ValueError):
        PcCausalDiscoverer(alpha=1.5)
