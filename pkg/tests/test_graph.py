import numpy as np
import pytest

from causal_prompting.core.graph import CausalGraph, Constraint, GroundTruth, Method, PriorKnowledge


def test_from_edge_list_uses_effect_cause_orientation():
    graph = CausalGraph.from_edge_list(("a", "b", "c"), [(0, 1), (1, 2)])

    assert graph.adjacency[1, 0] == 1
    assert graph.adjacency[2, 1] == 1
    assert graph.adjacency[0, 1] == 0
    assert graph.edges() == [(0, 1), (1, 2)]
    assert graph.has_edge(1, 0)
    assert not graph.has_edge(0, 1)


def test_edges_are_listed_in_row_major_order():
    graph = CausalGraph.from_edge_list(("a", "b", "c"), [(2, 0), (0, 1), (0, 2)])

    assert graph.edges() == [(2, 0), (0, 1), (0, 2)]


def test_matrices_are_read_only():
    graph = CausalGraph.from_edge_list(("a", "b"), [(0, 1)], coefficients={(0, 1): 0.5})

    with pytest.raises(ValueError):
        graph.adjacency[0, 1] = 1
    with pytest.raises(ValueError):
        graph.coefficients[1, 0] = 2.0


def test_self_loop_is_rejected():
    with pytest.raises(ValueError, match="diagonal"):
        CausalGraph(variable_names=("a", "b"), adjacency=np.eye(2, dtype=int))


def test_non_binary_adjacency_is_rejected():
    with pytest.raises(ValueError, match="0 or 1"):
        CausalGraph(variable_names=("a", "b"), adjacency=np.array([[0, 2], [0, 0]]))


def test_undirected_pair_cannot_coincide_with_directed_edge():
    with pytest.raises(ValueError, match="coincides"):
        CausalGraph.from_edge_list(("a", "b"), [(0, 1)], undirected=[(0, 1)])


def test_coefficients_must_match_adjacency():
    with pytest.raises(ValueError, match="nonzero exactly"):
        CausalGraph(
            variable_names=("a", "b"),
            adjacency=np.array([[0, 0], [1, 0]]),
            coefficients=np.zeros((2, 2)),
        )


def test_undirected_edges_are_normalized_and_sorted():
    graph = CausalGraph.from_edge_list(("a", "b", "c"), [], undirected=[(2, 1), (1, 0)])

    assert graph.undirected_edges() == [(0, 1), (1, 2)]


def test_is_dag():
    acyclic = CausalGraph.from_edge_list(("a", "b", "c"), [(0, 1), (1, 2)])
    cyclic = CausalGraph.from_edge_list(("a", "b", "c"), [(0, 1), (1, 2), (2, 0)])

    assert acyclic.is_dag()
    assert not cyclic.is_dag()


def test_empty_graph_has_no_edges():
    graph = CausalGraph.empty(["a", "b", "c"])

    assert graph.edges() == []
    assert graph.size == 3


def test_ground_truth_rejects_self_loops():
    with pytest.raises(ValueError, match="diagonal"):
        GroundTruth(variable_names=("a", "b"), adjacency=np.eye(2, dtype=int))


def test_unconstrained_prior_knowledge():
    trinary = PriorKnowledge.unconstrained(("a", "b", "c"), Method.PC)
    binary = PriorKnowledge.unconstrained(("a", "b", "c"), Method.EXACT_SEARCH)

    assert trinary.entries.tolist() == [[0, -1, -1], [-1, 0, -1], [-1, -1, 0]]
    assert binary.entries.tolist() == [[0, 1, 1], [1, 0, 1], [1, 1, 0]]


def test_exact_search_prior_knowledge_is_binary():
    with pytest.raises(ValueError, match="only accepts"):
        PriorKnowledge(
            variable_names=("a", "b"),
            entries=np.array([[0, -1], [1, 0]]),
            method=Method.EXACT_SEARCH,
        )


def test_prior_knowledge_diagonal_must_be_forbidden():
    with pytest.raises(ValueError, match="Forbidden"):
        PriorKnowledge(
            variable_names=("a", "b"),
            entries=np.array([[-1, -1], [-1, 0]]),
            method=Method.PC,
        )


def test_forced_and_forbidden_queries():
    pk = PriorKnowledge(
        variable_names=("a", "b", "c"),
        entries=np.array([[0, 1, -1], [0, 0, 1], [-1, -1, 0]]),
        method=Method.DIRECT_LINGAM,
    )

    assert pk.is_forced(0, 1)
    assert pk.is_forbidden(1, 0)
    assert not pk.is_forbidden(0, 0)
    assert pk.forced_edges() == [(1, 0), (2, 1)]


def test_with_entry_returns_modified_copy():
    pk = PriorKnowledge.unconstrained(("a", "b"), Method.DIRECT_LINGAM)

    changed = pk.with_entry(1, 0, Constraint.FORCED)

    assert changed.is_forced(1, 0)
    assert not pk.is_forced(1, 0)
    assert changed.canonical_key() == (0, -1, 1, 0)


def test_method_display_names():
    assert Method.PC.display_name == "PC"
    assert Method.EXACT_SEARCH.display_name == "Exact Search"
    assert Method("direct_lingam").display_name == "DirectLiNGAM"
