from collections import Counter
from itertools import combinations, permutations

import numpy as np
import pandas as pd
import pytest

from causal_prompting.core.dataset import Dataset, standardize
from causal_prompting.core.graph import Constraint, Method, PriorKnowledge
from causal_prompting.knowledge.acyclic import (
    acyclic_candidates,
    forced_cycles,
    has_forced_cycle,
    select_by_bic,
    write_candidate_audit,
)
from causal_prompting.knowledge.knowledge_exceptions import (
    CandidateExplosionError,
    CycleEnumerationError,
)
from causal_prompting.scd.direct_lingam_causal_discoverer import DirectLingamCausalDiscoverer
from tests.conftest import linear_sem_sample


def _prior_knowledge(forced: list[tuple[int, int]], size: int) -> PriorKnowledge:
    """Unknown everywhere except the given (cause, effect) pairs, which are Forced."""
    names = tuple(f"x{i + 1}" for i in range(size))
    prior_knowledge = PriorKnowledge.unconstrained(names, Method.DIRECT_LINGAM)
    for cause, effect in forced:
        prior_knowledge = prior_knowledge.with_entry(effect, cause, Constraint.FORCED)
    return prior_knowledge


def _brute_force_cycles(forced: set[tuple[int, int]], size: int) -> list[tuple[int, ...]]:
    cycles = []
    for length in range(2, size + 1):
        for nodes in combinations(range(size), length):
            for rest in permutations(nodes[1:]):
                cycle = (nodes[0], *rest)
                if all(
                    (cycle[k], cycle[(k + 1) % length]) in forced for k in range(length)
                ):
                    cycles.append(cycle)
    return sorted(cycles)


def _oracle_candidates(forced: set[tuple[int, int]], size: int) -> set[frozenset]:
    """Edge sets left by breadth-first deletion of the most frequent cycle edges."""
    frontier = {frozenset(forced)}
    while True:
        done = {edges for edges in frontier if not _brute_force_cycles(set(edges), size)}
        if done:
            return done
        children = set()
        for edges in frontier:
            frequency = Counter()
            for cycle in _brute_force_cycles(set(edges), size):
                for k, cause in enumerate(cycle):
                    frequency[(cause, cycle[(k + 1) % len(cycle)])] += 1
            top = max(frequency.values())
            for edge, count in frequency.items():
                if count == top:
                    children.add(edges - {edge})
        frontier = children


def test_two_cycle():
    prior_knowledge = _prior_knowledge([(0, 1), (1, 0)], 2)

    assert has_forced_cycle(prior_knowledge)
    assert forced_cycles(prior_knowledge) == [(0, 1)]

    candidates = acyclic_candidates(prior_knowledge)

    assert len(candidates) == 2
    for candidate in candidates:
        difference = np.argwhere(candidate.entries != prior_knowledge.entries)
        assert len(difference) == 1
        i, j = difference[0]
        assert prior_knowledge.entries[i, j] == Constraint.FORCED
        assert candidate.entries[i, j] == Constraint.FORBIDDEN
        assert not has_forced_cycle(candidate)


def test_acyclic_matrix_is_its_own_candidate():
    prior_knowledge = _prior_knowledge([(0, 1), (1, 2)], 3)

    assert forced_cycles(prior_knowledge) == []
    candidates = acyclic_candidates(prior_knowledge)

    assert [candidate.canonical_key() for candidate in candidates] == [
        prior_knowledge.canonical_key()
    ]


def test_disjoint_cycles_are_all_reported():
    prior_knowledge = _prior_knowledge([(0, 1), (1, 2), (2, 0), (3, 4), (4, 3)], 5)

    assert forced_cycles(prior_knowledge) == [(0, 1, 2), (3, 4)]

    candidates = acyclic_candidates(prior_knowledge)

    assert len(candidates) == 6
    for candidate in candidates:
        assert not has_forced_cycle(candidate)
        assert int(np.sum(candidate.entries != prior_knowledge.entries)) == 2


def test_shared_edge_is_deleted_first():
    # x1 -> x2 lies on both cycles
    prior_knowledge = _prior_knowledge([(0, 1), (1, 0), (1, 2), (2, 0)], 3)

    candidates = acyclic_candidates(prior_knowledge)

    assert len(candidates) == 1
    assert candidates[0].entries[1, 0] == Constraint.FORBIDDEN


def test_candidates_are_in_canonical_order():
    candidates = acyclic_candidates(_prior_knowledge([(0, 1), (1, 2), (2, 0)], 3))

    keys = [candidate.canonical_key() for candidate in candidates]
    assert keys == sorted(keys)
    assert len(set(keys)) == 3


@pytest.mark.parametrize("seed", range(200))
def test_random_matrices_match_the_oracle(seed):
    rng = np.random.default_rng(seed)
    size = 6
    forced = {
        (cause, effect)
        for cause in range(size)
        for effect in range(size)
        if cause != effect and rng.random() < 0.25
    }
    prior_knowledge = _prior_knowledge(sorted(forced), size)

    assert forced_cycles(prior_knowledge) == _brute_force_cycles(forced, size)

    candidates = acyclic_candidates(prior_knowledge)
    remaining = {frozenset(candidate.forced_edges()) for candidate in candidates}

    assert remaining == _oracle_candidates(forced, size)
    assert len({len(edges) for edges in remaining}) == 1
    for candidate in candidates:
        assert not has_forced_cycle(candidate)
        changed = candidate.entries != prior_knowledge.entries
        assert np.all(prior_knowledge.entries[changed] == Constraint.FORCED)
        assert np.all(candidate.entries[changed] == Constraint.FORBIDDEN)


def test_non_lingam_knowledge_is_rejected():
    prior_knowledge = PriorKnowledge.unconstrained(("a", "b"), Method.PC)

    with pytest.raises(ValueError):
        acyclic_candidates(prior_knowledge)


def test_candidate_cap():
    prior_knowledge = _prior_knowledge([(0, 1), (1, 2), (2, 0), (3, 4), (4, 3)], 5)

    with pytest.raises(CandidateExplosionError) as e:
        acyclic_candidates(prior_knowledge, cap=2)
    assert e.value.cap == 2


def test_cycle_cap():
    forced = [(i, j) for i in range(4) for j in range(4) if i != j]

    with pytest.raises(CycleEnumerationError):
        forced_cycles(_prior_knowledge(forced, 4), max_cycles=3)


@pytest.fixture
def three_chain() -> Dataset:
    adjacency = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]])
    values = linear_sem_sample(adjacency, np.full((3, 3), 0.8), 2000, seed=5)
    return standardize(Dataset(variable_names=("x1", "x2", "x3"), values=values))


@pytest.fixture
def three_cycle() -> PriorKnowledge:
    return _prior_knowledge([(0, 1), (1, 2), (2, 0)], 3)


def test_bic_prefers_the_true_chain(three_chain, three_cycle):
    candidates = acyclic_candidates(three_cycle)
    discoverer = DirectLingamCausalDiscoverer(prune_threshold=0.1)

    selected, audits = select_by_bic(candidates, three_chain, three_cycle, discoverer)

    # x3 -> x1 is the only forced edge absent from the data
    assert selected.entries[0, 2] == Constraint.FORBIDDEN
    assert selected.entries[1, 0] == Constraint.FORCED
    assert selected.entries[2, 1] == Constraint.FORCED
    assert [audit.selected for audit in audits].count(True) == 1
    assert all(audit.bic is not None and audit.failure is None for audit in audits)
    best = next(audit for audit in audits if audit.selected)
    assert best.deleted == ((0, 2),)
    assert best.bic == min(audit.bic for audit in audits)


def test_bic_selection_is_deterministic(three_chain, three_cycle):
    candidates = acyclic_candidates(three_cycle)
    discoverer = DirectLingamCausalDiscoverer(prune_threshold=0.1)

    first, first_audits = select_by_bic(candidates, three_chain, three_cycle, discoverer)
    second, second_audits = select_by_bic(
        list(reversed(candidates)), three_chain, three_cycle, discoverer, workers=3
    )

    assert first.canonical_key() == second.canonical_key()
    assert first_audits == second_audits


def test_single_candidate_needs_no_discovery(three_chain):
    prior_knowledge = _prior_knowledge([(0, 1)], 3)

    selected, audits = select_by_bic([prior_knowledge], three_chain)

    assert selected.canonical_key() == prior_knowledge.canonical_key()
    assert len(audits) == 1
    assert audits[0].selected
    assert audits[0].bic is None


def test_empty_candidates(three_chain):
    with pytest.raises(ValueError):
        select_by_bic([], three_chain)


def test_candidate_audit_csv(tmp_path, three_chain, three_cycle):
    candidates = acyclic_candidates(three_cycle)
    discoverer = DirectLingamCausalDiscoverer(prune_threshold=0.1)
    _, audits = select_by_bic(candidates, three_chain, three_cycle, discoverer)

    write_candidate_audit(tmp_path / "audit" / "candidates.csv", audits, three_chain.variable_names)

    frame = pd.read_csv(tmp_path / "audit" / "candidates.csv")
    assert list(frame.columns) == ["candidate", "deleted", "bic", "failure", "selected"]
    assert len(frame) == 3
    assert frame.loc[frame["selected"], "deleted"].item() == "x3->x1"
