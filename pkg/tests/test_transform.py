import numpy as np
import pytest

from causal_prompting.core.graph import Constraint, Method
from causal_prompting.knowledge.transform import to_prior_knowledge
from causal_prompting.llm.confidence import ConfidenceMatrix
from tests.conftest import WEATHER_NAMES


def _confidence(mean: list[list[float]]) -> ConfidenceMatrix:
    mean = np.array(mean, dtype=float)
    return ConfidenceMatrix(
        variable_names=WEATHER_NAMES,
        mean=mean,
        stderr=np.zeros_like(mean),
        anti_mean=np.where(np.isnan(mean), np.nan, 1.0 - mean),
        samples=5,
    )


@pytest.fixture
def confidence() -> ConfidenceMatrix:
    return _confidence(
        [
            [np.nan, 0.01, 0.049],
            [0.95, np.nan, 0.5],
            [0.999, 0.05, np.nan],
        ]
    )


@pytest.mark.parametrize("method", [Method.PC, Method.DIRECT_LINGAM])
def test_thresholds(confidence, method):
    prior_knowledge = to_prior_knowledge(confidence, method)

    expected = np.array([[0, 0, 0], [1, 0, -1], [1, -1, 0]])
    np.testing.assert_array_equal(prior_knowledge.entries, expected)
    assert prior_knowledge.method == method


def test_exact_search_is_binary(confidence):
    prior_knowledge = to_prior_knowledge(confidence, Method.EXACT_SEARCH)

    expected = np.array([[0, 0, 0], [1, 0, 1], [1, 1, 0]])
    np.testing.assert_array_equal(prior_knowledge.entries, expected)
    assert prior_knowledge.forced_edges() == []


def test_failed_pairs_are_unknown():
    confidence = _confidence(
        [
            [np.nan, np.nan, 0.99],
            [0.0, np.nan, np.nan],
            [np.nan, np.nan, np.nan],
        ]
    )

    prior_knowledge = to_prior_knowledge(confidence, Method.DIRECT_LINGAM)

    assert prior_knowledge.entries[0, 1] == Constraint.UNKNOWN
    assert prior_knowledge.entries[0, 2] == Constraint.FORCED
    assert prior_knowledge.entries[1, 0] == Constraint.FORBIDDEN
    assert prior_knowledge.entries[2, 1] == Constraint.UNKNOWN
    assert np.all(np.diag(prior_knowledge.entries) == 0)


def test_custom_thresholds(confidence):
    prior_knowledge = to_prior_knowledge(confidence, Method.PC, alpha1=0.3, alpha2=0.5)

    assert prior_knowledge.entries[2, 1] == Constraint.FORBIDDEN
    assert prior_knowledge.entries[1, 2] == Constraint.FORCED


@pytest.mark.parametrize(
    ("alpha1", "alpha2"), [(0.5, 0.5), (0.9, 0.1), (-0.1, 0.9), (0.1, 1.2)]
)
def test_invalid_thresholds(confidence, alpha1, alpha2):
    with pytest.raises(ValueError):
        to_prior_knowledge(confidence, Method.PC, alpha1=alpha1, alpha2=alpha2)
