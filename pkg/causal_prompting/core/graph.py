from dataclasses import dataclass, field
from enum import Enum, IntEnum

import networkx as nx
import numpy as np


class Method(str, Enum):
    """
    Constrainable causal discovery algorithms.
    Inherits from str to handle YAML string matching automatically.
    """

    PC = "pc"
    EXACT_SEARCH = "exact_search"
    DIRECT_LINGAM = "direct_lingam"

    @property
    def display_name(self) -> str:
        """
        Human-readable algorithm name, as written in prompts and reports.

        :return: Display name of the method.
        """
        mapping = {
            "pc": "PC",
            "exact_search": "Exact Search",
            "direct_lingam": "DirectLiNGAM",
        }
        return mapping[self.value]


class Constraint(IntEnum):
    """
    Values of a prior knowledge matrix entry.
    """

    FORBIDDEN = 0
    FORCED = 1
    UNKNOWN = -1


def _frozen_matrix(values: np.ndarray | list, dtype: type) -> np.ndarray:
    matrix = np.array(values, dtype=dtype)
    matrix.setflags(write=False)
    return matrix


def _check_square(matrix: np.ndarray, size: int, name: str) -> None:
    if matrix.shape != (size, size):
        raise ValueError(
            f"{name} must be {size}x{size} to match the variables, got {matrix.shape}."
        )


@dataclass(slots=True, frozen=True, kw_only=True, eq=False)
class CausalGraph:
    """
    Result of a causal discovery run.

    Entry (i, j) of every matrix refers to the edge x_j -> x_i
    (row = effect, column = cause).
    """

    variable_names: tuple[str, ...]
    """Ordered variable labels."""
    adjacency: np.ndarray
    """Binary directed adjacency matrix."""
    undirected: frozenset[tuple[int, int]] = field(default_factory=frozenset)
    """Unordered pairs (i < j) of undirected edges (PC only)."""
    coefficients: np.ndarray | None = None
    """Path coefficients b_ij (DirectLiNGAM only)."""

    def __post_init__(self):
        """
        Validates the graph invariants and freezes the matrices.
        """
        size = len(self.variable_names)
        object.__setattr__(self, "variable_names", tuple(self.variable_names))
        object.__setattr__(self, "adjacency", _frozen_matrix(self.adjacency, int))
        _check_square(self.adjacency, size, "Adjacency")
        if not np.isin(self.adjacency, (0, 1)).all():
            raise ValueError("Adjacency entries must be 0 or 1.")
        if np.any(np.diag(self.adjacency)):
            raise ValueError("Adjacency diagonal must be zero.")

        object.__setattr__(self, "undirected", frozenset(self.undirected))
        for i, j in self.undirected:
            if not 0 <= i < j < size:
                raise ValueError(f"Undirected pair {(i, j)} must satisfy 0 <= i < j < d.")
            if self.adjacency[i, j] or self.adjacency[j, i]:
                raise ValueError(
                    f"Undirected pair {(i, j)} coincides with a directed edge."
                )

        if self.coefficients is not None:
            object.__setattr__(
                self, "coefficients", _frozen_matrix(self.coefficients, float)
            )
            _check_square(self.coefficients, size, "Coefficients")
            if not np.array_equal(self.coefficients != 0, self.adjacency == 1):
                raise ValueError(
                    "Coefficients must be nonzero exactly where the adjacency is 1."
                )

    @property
    def size(self) -> int:
        """
        Number of variables.

        :return: d.
        """
        return len(self.variable_names)

    @classmethod
    def empty(cls, variable_names: tuple[str, ...] | list[str]) -> "CausalGraph":
        """
        Builds a graph without edges.

        :param variable_names: Ordered variable labels.
        :return: Empty graph.
        """
        size = len(variable_names)
        return cls(
            variable_names=tuple(variable_names),
            adjacency=np.zeros((size, size), dtype=int),
        )

    @classmethod
    def from_edge_list(
        cls,
        variable_names: tuple[str, ...] | list[str],
        edges: list[tuple[int, int]],
        undirected: list[tuple[int, int]] | None = None,
        coefficients: dict[tuple[int, int], float] | None = None,
    ) -> "CausalGraph":
        """
        Builds a graph from (cause, effect) index pairs.

        :param variable_names: Ordered variable labels.
        :param edges: Directed edges as (cause, effect).
        :param undirected: Undirected edges as unordered pairs.
        :param coefficients: Optional coefficient per (cause, effect) edge.
        :return: The graph.
        """
        size = len(variable_names)
        adjacency = np.zeros((size, size), dtype=int)
        for cause, effect in edges:
            adjacency[effect, cause] = 1

        coefficient_matrix = None
        if coefficients is not None:
            coefficient_matrix = np.zeros((size, size))
            for (cause, effect), value in coefficients.items():
                coefficient_matrix[effect, cause] = value

        return cls(
            variable_names=tuple(variable_names),
            adjacency=adjacency,
            undirected=frozenset(
                (min(a, b), max(a, b)) for a, b in (undirected or [])
            ),
            coefficients=coefficient_matrix,
        )

    def edges(self) -> list[tuple[int, int]]:
        """
        Directed edges as (cause, effect), in row-major order over the adjacency matrix.

        :return: List of directed edges.
        """
        effects, causes = np.nonzero(self.adjacency)
        return [(int(cause), int(effect)) for effect, cause in zip(effects, causes)]

    def undirected_edges(self) -> list[tuple[int, int]]:
        """
        Undirected edges sorted by (i, j).

        :return: List of unordered pairs.
        """
        return sorted(self.undirected)

    def has_edge(self, effect: int, cause: int) -> bool:
        """
        Tells whether the directed edge cause -> effect exists.

        :param effect: Effect index i.
        :param cause: Cause index j.
        :return: True if x_j -> x_i is in the graph.
        """
        return bool(self.adjacency[effect, cause])

    def to_networkx(self) -> nx.DiGraph:
        """
        Directed part of the graph as a networkx DiGraph over variable indices.

        :return: DiGraph with edges cause -> effect.
        """
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.size))
        graph.add_edges_from(self.edges())
        return graph

    def is_dag(self) -> bool:
        """
        Tells whether the directed part contains no directed cycle.

        :return: True if acyclic.
        """
        return nx.is_directed_acyclic_graph(self.to_networkx())


@dataclass(slots=True, frozen=True, kw_only=True, eq=False)
class GroundTruth:
    """
    Reference causal structure of a benchmark dataset.
    """

    variable_names: tuple[str, ...]
    """Ordered variable labels."""
    adjacency: np.ndarray
    """Binary adjacency matrix (row = effect, column = cause)."""

    def __post_init__(self):
        """
        Validates that the matrix is square, binary and has a zero diagonal.
        """
        object.__setattr__(self, "variable_names", tuple(self.variable_names))
        object.__setattr__(self, "adjacency", _frozen_matrix(self.adjacency, int))
        _check_square(self.adjacency, len(self.variable_names), "Ground truth")
        if not np.isin(self.adjacency, (0, 1)).all():
            raise ValueError("Ground truth entries must be 0 or 1.")
        if np.any(np.diag(self.adjacency)):
            raise ValueError("Ground truth diagonal must be zero.")

    @property
    def size(self) -> int:
        return len(self.variable_names)


@dataclass(slots=True, frozen=True, kw_only=True, eq=False)
class PriorKnowledge:
    """
    Constraint matrix fed back into constrained causal discovery.

    For PC and DirectLiNGAM the entries are trinary (Forced=1, Forbidden=0,
    Unknown=-1). For Exact Search the entries are binary and 1 means
    "not forbidden".
    """

    variable_names: tuple[str, ...]
    """Ordered variable labels."""
    entries: np.ndarray
    """Constraint matrix (row = effect, column = cause)."""
    method: Method
    """Discovery method the matrix is encoded for."""

    def __post_init__(self):
        """
        Validates the encoding for the method and the Forbidden diagonal.
        """
        object.__setattr__(self, "variable_names", tuple(self.variable_names))
        object.__setattr__(self, "entries", _frozen_matrix(self.entries, int))
        _check_square(self.entries, len(self.variable_names), "Prior knowledge")
        if np.any(np.diag(self.entries) != Constraint.FORBIDDEN):
            raise ValueError("Prior knowledge diagonal must be Forbidden (0).")
        allowed = (0, 1) if self.method == Method.EXACT_SEARCH else (-1, 0, 1)
        if not np.isin(self.entries, allowed).all():
            raise ValueError(
                f"Prior knowledge for {self.method.display_name} only accepts {allowed}."
            )

    @property
    def size(self) -> int:
        return len(self.variable_names)

    @classmethod
    def unconstrained(
        cls, variable_names: tuple[str, ...] | list[str], method: Method
    ) -> "PriorKnowledge":
        """
        Builds a matrix that imposes nothing besides the Forbidden diagonal.

        :param variable_names: Ordered variable labels.
        :param method: Target discovery method.
        :return: Unconstrained prior knowledge.
        """
        size = len(variable_names)
        fill = 1 if method == Method.EXACT_SEARCH else Constraint.UNKNOWN
        entries = np.full((size, size), int(fill))
        np.fill_diagonal(entries, Constraint.FORBIDDEN)
        return cls(variable_names=tuple(variable_names), entries=entries, method=method)

    def is_forbidden(self, effect: int, cause: int) -> bool:
        return effect != cause and self.entries[effect, cause] == Constraint.FORBIDDEN

    def is_forced(self, effect: int, cause: int) -> bool:
        if self.method == Method.EXACT_SEARCH:
            return False
        return self.entries[effect, cause] == Constraint.FORCED

    def forced_edges(self) -> list[tuple[int, int]]:
        """
        Forced entries as (cause, effect) pairs in row-major order.

        :return: List of forced edges (empty for Exact Search).
        """
        if self.method == Method.EXACT_SEARCH:
            return []
        effects, causes = np.nonzero(self.entries == Constraint.FORCED)
        return [(int(cause), int(effect)) for effect, cause in zip(effects, causes)]

    def with_entry(self, effect: int, cause: int, value: Constraint) -> "PriorKnowledge":
        """
        Returns a copy with one entry replaced.

        :param effect: Row index.
        :param cause: Column index.
        :param value: New constraint.
        :return: Modified copy.
        """
        entries = self.entries.copy()
        entries[effect, cause] = int(value)
        return PriorKnowledge(
            variable_names=self.variable_names, entries=entries, method=self.method
        )

    def canonical_key(self) -> tuple[int, ...]:
        """
        Key of the fixed canonical ordering (row-major entries) used for tie-breaks.

        :return: Flattened entries.
        """
        return tuple(int(value) for value in self.entries.ravel())
