import re

ANSWER_TOKEN_STRIP_PATTERN = re.compile(r"^[\W_]+|[\W_]+$")
"""Pattern that strips leading/trailing whitespace and punctuation from a token."""

INTEGRATION_QUESTION_PATTERN = re.compile(
    r"Considering objectively this discussion above, if (?P<cause>.+?) is modified, "
    r"will it have a direct or indirect impact on (?P<effect>.+?)\?"
)
"""Pattern that recovers the (cause, effect) names from a knowledge-integration prompt."""

FIXTURE_VARIABLES_PATTERN = re.compile(r"^variables:\s*(?P<names>.+)$")
"""Pattern that matches the variable header line of a bundled matrix fixture."""

MODEL_ID_PATTERN = re.compile(r"^[\w.\-:/]+$")
"""Pattern that checks for valid model identifiers (e.g., gpt-4-0613)."""
