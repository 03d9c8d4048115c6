from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
import yaml

from causal_prompting.core.core_exceptions import ArtifactValidationError
from causal_prompting.core.graph import CausalGraph, Method, PriorKnowledge

_TABLE_INDEX_LABEL = "effect\\cause"
"""Header of the row-label column in labeled matrix tables."""


def write_yaml(path: str | Path, content: dict[str, Any]) -> None:
    """
    Writes a mapping as YAML, keeping key order so reruns are byte-identical.

    :param path: Destination file.
    :param content: Mapping to dump.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as file:
        yaml.safe_dump(content, file, sort_keys=False, allow_unicode=True)


def read_yaml_artifact(
    path: str | Path, artifact: str, required_fields: tuple[str, ...]
) -> dict[str, Any]:
    """
    Reads a stage artifact and checks its declared kind and required fields.

    :param path: Artifact file.
    :param artifact: Expected value of the 'artifact' field.
    :param required_fields: Fields that must be present.
    :return: Parsed mapping.
    :raises ArtifactValidationError: On unreadable files, wrong kind or missing fields.
    """
    try:
        with open(path, "r", encoding="utf-8") as file:
            content = yaml.safe_load(file)
    except FileNotFoundError:
        raise ArtifactValidationError(str(path), "<file>", "Missing file for")
    except yaml.YAMLError as e:
        raise ArtifactValidationError(str(path), "<file>", f"Unparseable YAML ({e}) in")

    if not isinstance(content, dict):
        raise ArtifactValidationError(str(path), "<root>", "Expected a mapping at")
    if content.get("artifact") != artifact:
        raise ArtifactValidationError(
            str(path), "artifact", f"Expected kind '{artifact}' in field"
        )
    for required in required_fields:
        if required not in content:
            raise ArtifactValidationError(str(path), required, "Missing field")
    return content


def matrix_field(
    content: dict[str, Any], field: str, size: int, artifact: str, dtype: type = float
) -> np.ndarray:
    """
    Extracts a square matrix field from a parsed artifact.

    :param content: Parsed artifact.
    :param field: Field name.
    :param size: Expected dimension.
    :param artifact: Artifact path, for error messages.
    :param dtype: Element type.
    :return: The matrix.
    :raises ArtifactValidationError: If the field is not a size x size matrix.
    """
    try:
        matrix = np.array(content[field], dtype=dtype)
    except (TypeError, ValueError):
        raise ArtifactValidationError(artifact, field, "Non-numeric matrix in field")
    if matrix.shape != (size, size):
        raise ArtifactValidationError(
            artifact, field, f"Expected a {size}x{size} matrix in field"
        )
    return matrix


def write_matrix_table(
    path: str | Path,
    matrix: np.ndarray,
    variable_names: tuple[str, ...],
    float_format: str | None = None,
) -> None:
    """
    Writes a labeled matrix table (rows = effects, columns = causes) as CSV.

    :param path: Destination file.
    :param matrix: d x d matrix.
    :param variable_names: Row and column labels.
    :param float_format: Optional printf-style float format.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(matrix, index=list(variable_names), columns=list(variable_names))
    frame.index.name = _TABLE_INDEX_LABEL
    frame.to_csv(path, float_format=float_format)


def read_matrix_table(path: str | Path) -> tuple[np.ndarray, tuple[str, ...]]:
    """
    Reads a labeled matrix table written by write_matrix_table.

    :param path: Table file.
    :return: The matrix and its labels.
    :raises ArtifactValidationError: If row and column labels disagree.
    """
    try:
        frame = pd.read_csv(path, index_col=0)
    except FileNotFoundError:
        raise ArtifactValidationError(str(path), "<file>", "Missing file for")
    rows = tuple(str(label) for label in frame.index)
    columns = tuple(str(label) for label in frame.columns)
    if rows != columns:
        raise ArtifactValidationError(str(path), "labels", "Row/column mismatch in")
    return frame.to_numpy(dtype=float), rows


def graph_to_dict(graph: CausalGraph) -> dict[str, Any]:
    content: dict[str, Any] = {
        "artifact": "causal_graph",
        "variables": list(graph.variable_names),
        "adjacency": graph.adjacency.tolist(),
        "undirected": [list(pair) for pair in graph.undirected_edges()],
    }
    if graph.coefficients is not None:
        content["coefficients"] = graph.coefficients.tolist()
    return content


def save_graph(path: str | Path, graph: CausalGraph) -> None:
    """
    Stores a graph in the textual adjacency-matrix format.

    :param path: Destination YAML file.
    :param graph: Graph to store.
    """
    write_yaml(path, graph_to_dict(graph))


def load_graph(path: str | Path) -> CausalGraph:
    """
    Loads a graph stored by save_graph.

    :param path: Graph YAML file.
    :return: The graph.
    :raises ArtifactValidationError: If a field is missing or malformed.
    """
    artifact = str(path)
    content = read_yaml_artifact(path, "causal_graph", ("variables", "adjacency"))
    names = tuple(str(name) for name in content["variables"])
    adjacency = matrix_field(content, "adjacency", len(names), artifact, int)
    coefficients = None
    if "coefficients" in content:
        coefficients = matrix_field(content, "coefficients", len(names), artifact)
    try:
        undirected = frozenset(tuple(pair) for pair in content.get("undirected") or [])
        return CausalGraph(
            variable_names=names,
            adjacency=adjacency,
            undirected=undirected,
            coefficients=coefficients,
        )
    except (TypeError, ValueError) as e:
        raise ArtifactValidationError(artifact, "adjacency", f"Invalid graph ({e}) in field")


def graph_to_dot(graph: CausalGraph, name: str = "G") -> str:
    """
    Renders a graph in DOT. Directed edges carry their coefficient as label
    when present, undirected edges use dir=none.

    :param graph: Graph to render.
    :param name: DOT graph identifier.
    :return: DOT source.
    """
    lines = [f"digraph {name} {{"]
    for index, variable in enumerate(graph.variable_names):
        lines.append(f'    {index} [label="{variable}"];')
    for cause, effect in graph.edges():
        attributes = ""
        if graph.coefficients is not None:
            attributes = f' [label="{graph.coefficients[effect, cause]:.2f}"]'
        lines.append(f"    {cause} -> {effect}{attributes};")
    for first, second in graph.undirected_edges():
        lines.append(f"    {first} -> {second} [dir=none];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_dot(path: str | Path, graph: CausalGraph, name: str = "G") -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(graph_to_dot(graph, name), encoding="utf-8")


def save_prior_knowledge(path: str | Path, prior_knowledge: PriorKnowledge) -> None:
    """
    Stores a prior knowledge matrix with its method tag.

    :param path: Destination YAML file.
    :param prior_knowledge: Matrix to store.
    """
    write_yaml(
        path,
        {
            "artifact": "prior_knowledge",
            "method": prior_knowledge.method.value,
            "variables": list(prior_knowledge.variable_names),
            "entries": prior_knowledge.entries.tolist(),
        },
    )


def load_prior_knowledge(path: str | Path) -> PriorKnowledge:
    """
    Loads a prior knowledge matrix stored by save_prior_knowledge.

    :param path: YAML file.
    :return: The prior knowledge.
    :raises ArtifactValidationError: If a field is missing or malformed.
    """
    artifact = str(path)
    content = read_yaml_artifact(
        path, "prior_knowledge", ("method", "variables", "entries")
    )
    names = tuple(str(name) for name in content["variables"])
    try:
        method = Method(content["method"])
    except ValueError:
        raise ArtifactValidationError(artifact, "method", "Unknown method in field")
    entries = matrix_field(content, "entries", len(names), artifact, int)
    try:
        return PriorKnowledge(variable_names=names, entries=entries, method=method)
    except ValueError as e:
        raise ArtifactValidationError(artifact, "entries", f"Invalid matrix ({e}) in field")
