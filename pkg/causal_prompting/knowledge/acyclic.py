from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import networkx as nx
import pandas as pd
from loguru import logger

from causal_prompting.core.dataset import Dataset
from causal_prompting.core.graph import Constraint, Method, PriorKnowledge
from causal_prompting.evaluation.evaluation_exceptions import EvaluationError
from causal_prompting.evaluation.sem import fit_sem
from causal_prompting.knowledge.knowledge_exceptions import (
    CandidateExplosionError,
    CandidateSelectionError,
    CycleEnumerationError,
)
from causal_prompting.scd.direct_lingam_causal_discoverer import DirectLingamCausalDiscoverer
from causal_prompting.scd.scd_exceptions import ScdError

DEFAULT_CANDIDATE_CAP = 10_000
DEFAULT_CYCLE_CAP = 100_000


@dataclass(slots=True, frozen=True, kw_only=True)
class CandidateAudit:
    """
    Outcome of evaluating one acyclic candidate.
    """

    index: int
    """Position of the candidate in canonical order."""
    deleted: tuple[tuple[int, int], ...]
    """Entries (i, j) turned from Forced into Forbidden."""
    bic: float | None = None
    """BIC of the constrained discovery result, if it could be computed."""
    failure: str | None = None
    """Reason the candidate could not be evaluated."""
    selected: bool = False


def _forced_graph(prior_knowledge: PriorKnowledge) -> nx.DiGraph:
    graph = nx.DiGraph()
    graph.add_nodes_from(range(prior_knowledge.size))
    graph.add_edges_from(prior_knowledge.forced_edges())
    return graph


def has_forced_cycle(prior_knowledge: PriorKnowledge) -> bool:
    return not nx.is_directed_acyclic_graph(_forced_graph(prior_knowledge))


def _normalized(cycle: list[int]) -> tuple[int, ...]:
    start = cycle.index(min(cycle))
    return tuple(cycle[start:] + cycle[:start])


def forced_cycles(
    prior_knowledge: PriorKnowledge, max_cycles: int = DEFAULT_CYCLE_CAP
) -> list[tuple[int, ...]]:
    """
    Elementary directed cycles of the graph whose edges are the Forced entries.

    Each cycle is a vertex sequence (cause before effect) starting at its
    smallest index; cycles are sorted.

    :param prior_knowledge: Prior knowledge matrix.
    :param max_cycles: Enumeration cap.
    :return: Sorted cycles.
    :raises CycleEnumerationError: If there are more than max_cycles cycles.
    """
    cycles = []
    for cycle in nx.simple_cycles(_forced_graph(prior_knowledge)):
        cycles.append(_normalized(cycle))
        if len(cycles) > max_cycles:
            raise CycleEnumerationError(max_cycles)
    return sorted(cycles)


def _most_frequent_edges(
    prior_knowledge: PriorKnowledge, max_cycles: int
) -> list[tuple[int, int]]:
    """
    Forced entries (i, j) that lie on the largest number of cycles.
    """
    frequency: Counter[tuple[int, int]] = Counter()
    for cycle in forced_cycles(prior_knowledge, max_cycles):
        for position, cause in enumerate(cycle):
            effect = cycle[(position + 1) % len(cycle)]
            frequency[(effect, cause)] += 1
    top = max(frequency.values())
    return sorted(entry for entry, count in frequency.items() if count == top)


def acyclic_candidates(
    prior_knowledge: PriorKnowledge,
    cap: int = DEFAULT_CANDIDATE_CAP,
    max_cycles: int = DEFAULT_CYCLE_CAP,
) -> list[PriorKnowledge]:
    """
    Breadth-first deletion of Forced entries until the Forced graph is acyclic.

    In every round each cyclic matrix branches once per edge tied for the
    largest cycle membership, that entry becoming Forbidden. The search stops
    at the first round where some matrix is acyclic and returns all acyclic
    matrices of that round.

    :param prior_knowledge: DirectLiNGAM prior knowledge.
    :param cap: Largest number of matrices a round may hold.
    :param max_cycles: Cycle enumeration cap per matrix.
    :return: Distinct acyclic candidates in canonical order.
    :raises CandidateExplosionError: If a round exceeds the cap.
    """
    if prior_knowledge.method != Method.DIRECT_LINGAM:
        raise ValueError(
            "The acyclic transform applies to DirectLiNGAM prior knowledge, "
            f"got {prior_knowledge.method.display_name}."
        )

    frontier = {prior_knowledge.canonical_key(): prior_knowledge}
    depth = 0
    while True:
        acyclic = [
            candidate
            for _, candidate in sorted(frontier.items())
            if not has_forced_cycle(candidate)
        ]
        if acyclic:
            logger.info(
                f"Acyclic transform: {len(acyclic)} candidate(s) after {depth} deletion round(s)"
            )
            return acyclic

        children: dict[tuple[int, ...], PriorKnowledge] = {}
        for _, candidate in sorted(frontier.items()):
            for effect, cause in _most_frequent_edges(candidate, max_cycles):
                child = candidate.with_entry(effect, cause, Constraint.FORBIDDEN)
                children[child.canonical_key()] = child
                if len(children) > cap:
                    raise CandidateExplosionError(len(children), cap)
        depth += 1
        logger.debug(f"Deletion round {depth}: {len(children)} matrices")
        frontier = children


def _deleted_entries(
    original: PriorKnowledge, candidate: PriorKnowledge
) -> tuple[tuple[int, int], ...]:
    return tuple(
        (i, j)
        for i in range(original.size)
        for j in range(original.size)
        if original.entries[i, j] == Constraint.FORCED
        and candidate.entries[i, j] == Constraint.FORBIDDEN
    )


def _evaluate(
    dataset: Dataset, candidate: PriorKnowledge, discoverer: DirectLingamCausalDiscoverer
) -> tuple[float | None, str | None]:
    try:
        graph = discoverer.discover(dataset, candidate)
        return fit_sem(dataset, graph).bic, None
    except (ScdError, EvaluationError) as e:
        return None, f"{e.__class__.__name__}: {e}"


def select_by_bic(
    candidates: list[PriorKnowledge],
    dataset: Dataset,
    original: PriorKnowledge | None = None,
    discoverer: DirectLingamCausalDiscoverer | None = None,
    workers: int = 1,
) -> tuple[PriorKnowledge, list[CandidateAudit]]:
    """
    Runs DirectLiNGAM under every candidate, fits each result as a
    linear-Gaussian SEM and keeps the candidate with the lowest BIC; ties go
    to the first candidate in canonical order.

    :param candidates: Acyclic candidates.
    :param dataset: Standardized dataset.
    :param original: Matrix the candidates were derived from, for the audit.
    :param discoverer: DirectLiNGAM instance (default settings if omitted).
    :param workers: Number of threads evaluating candidates.
    :return: The selected candidate and the audit of all candidates.
    :raises CandidateSelectionError: If every candidate fails.
    """
    if not candidates:
        raise ValueError("BIC selection needs at least one candidate.")
    ordered = sorted(candidates, key=lambda candidate: candidate.canonical_key())
    reference = original if original is not None else ordered[0]
    if len(ordered) == 1:
        audit = CandidateAudit(
            index=0, deleted=_deleted_entries(reference, ordered[0]), selected=True
        )
        return ordered[0], [audit]

    discoverer = discoverer or DirectLingamCausalDiscoverer()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            outcomes = list(
                executor.map(lambda candidate: _evaluate(dataset, candidate, discoverer), ordered)
            )
    else:
        outcomes = [_evaluate(dataset, candidate, discoverer) for candidate in ordered]

    scored = [
        (bic, index) for index, (bic, _) in enumerate(outcomes) if bic is not None
    ]
    if not scored:
        raise CandidateSelectionError(
            [f"candidate {index}: {failure}" for index, (_, failure) in enumerate(outcomes)]
        )
    _, best = min(scored)

    audits = []
    for index, (candidate, (bic, failure)) in enumerate(zip(ordered, outcomes)):
        if failure is not None:
            logger.warning(f"Candidate {index} could not be evaluated: {failure}")
        audits.append(
            CandidateAudit(
                index=index,
                deleted=_deleted_entries(reference, candidate),
                bic=bic,
                failure=failure,
                selected=index == best,
            )
        )
    logger.info(f"Selected candidate {best} of {len(ordered)} (BIC {outcomes[best][0]:.3f})")
    return ordered[best], audits


def write_candidate_audit(
    path: str | Path, audits: list[CandidateAudit], variable_names: tuple[str, ...]
) -> None:
    """
    Writes the candidate audit as CSV, naming deleted entries "cause->effect".

    :param path: Destination file.
    :param audits: Audit entries.
    :param variable_names: Ordered variable labels.
    """
    rows = [
        {
            "candidate": audit.index,
            "deleted": ";".join(
                f"{variable_names[j]}->{variable_names[i]}" for i, j in audit.deleted
            ),
            "bic": audit.bic,
            "failure": audit.failure or "",
            "selected": audit.selected,
        }
        for audit in audits
    ]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(rows, columns=["candidate", "deleted", "bic", "failure", "selected"]).to_csv(
        path, index=False
    )
