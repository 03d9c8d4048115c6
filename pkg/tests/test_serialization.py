import numpy as np
import pytest

from causal_prompting.core.core_exceptions import ArtifactValidationError
from causal_prompting.core.graph import CausalGraph, Method, PriorKnowledge
from causal_prompting.core.serialization import (
    graph_to_dot,
    load_graph,
    load_prior_knowledge,
    read_matrix_table,
    save_graph,
    save_prior_knowledge,
    write_matrix_table,
    write_yaml,
)


def test_graph_survives_storage(tmp_path):
    graph = CausalGraph.from_edge_list(
        ("a", "b", "c"), [(0, 1), (0, 2)], coefficients={(0, 1): 0.5, (0, 2): -1.25}
    )

    save_graph(tmp_path / "graph.yml", graph)
    loaded = load_graph(tmp_path / "graph.yml")

    assert loaded.variable_names == graph.variable_names
    np.testing.assert_array_equal(loaded.adjacency, graph.adjacency)
    np.testing.assert_allclose(loaded.coefficients, graph.coefficients)


def test_pc_graph_keeps_undirected_edges(tmp_path):
    graph = CausalGraph.from_edge_list(("a", "b", "c"), [(0, 1)], undirected=[(1, 2)])

    save_graph(tmp_path / "graph.yml", graph)

    assert load_graph(tmp_path / "graph.yml").undirected_edges() == [(1, 2)]


def test_wrong_artifact_kind_is_rejected(tmp_path):
    write_yaml(tmp_path / "other.yml", {"artifact": "prior_knowledge", "variables": ["a"]})

    with pytest.raises(ArtifactValidationError, match="artifact"):
        load_graph(tmp_path / "other.yml")


def test_malformed_adjacency_is_rejected(tmp_path):
    write_yaml(
        tmp_path / "graph.yml",
        {"artifact": "causal_graph", "variables": ["a", "b"], "adjacency": [[0, 1]]},
    )

    with pytest.raises(ArtifactValidationError, match="adjacency"):
        load_graph(tmp_path / "graph.yml")


def test_missing_artifact_file(tmp_path):
    with pytest.raises(ArtifactValidationError):
        load_graph(tmp_path / "absent.yml")


def test_prior_knowledge_keeps_method(tmp_path):
    pk = PriorKnowledge(
        variable_names=("a", "b"),
        entries=np.array([[0, 1], [0, 0]]),
        method=Method.EXACT_SEARCH,
    )

    save_prior_knowledge(tmp_path / "pk.yml", pk)
    loaded = load_prior_knowledge(tmp_path / "pk.yml")

    assert loaded.method == Method.EXACT_SEARCH
    assert loaded.entries.tolist() == [[0, 1], [0, 0]]


def test_matrix_table_keeps_labels(tmp_path):
    matrix = np.array([[np.nan, 0.25], [0.75, np.nan]])

    write_matrix_table(tmp_path / "table.csv", matrix, ("a", "b"))
    loaded, names = read_matrix_table(tmp_path / "table.csv")

    assert names == ("a", "b")
    np.testing.assert_allclose(loaded, matrix)


def test_dot_rendering():
    graph = CausalGraph.from_edge_list(
        ("a", "b", "c"), [(0, 1)], coefficients={(0, 1): 0.5}
    )

    dot = graph_to_dot(graph, name="G0")

    assert dot.startswith("digraph G0 {")
    assert '    0 [label="a"];' in dot
    assert '    0 -> 1 [label="0.50"];' in dot


def test_dot_undirected_edges():
    graph = CausalGraph.from_edge_list(("a", "b"), [], undirected=[(0, 1)])

    assert "    0 -> 1 [dir=none];" in graph_to_dot(graph)
