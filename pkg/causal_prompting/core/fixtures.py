from enum import Enum
from importlib import resources

import numpy as np

from causal_prompting.core.core_exceptions import UnknownFixtureError
from causal_prompting.core.graph import GroundTruth
from causal_prompting.regex import FIXTURE_VARIABLES_PATTERN


class FixtureName(str, Enum):
    """
    Bundled benchmark ground truths.
    """

    AUTO_MPG = "AutoMPG"
    DWD = "DWD"
    SACHS = "Sachs"

    @property
    def resource(self) -> str:
        mapping = {
            "AutoMPG": "auto_mpg.txt",
            "DWD": "dwd.txt",
            "Sachs": "sachs.txt",
        }
        return mapping[self.value]


def parse_matrix_fixture(text: str) -> GroundTruth:
    """
    Parses the textual fixture format: '#' comment lines, one
    'variables: a,b,c' header, then one whitespace-separated row per variable.

    :param text: Fixture content.
    :return: Parsed ground truth.
    :raises ValueError: If the header is missing or rows are malformed.
    """
    names: list[str] | None = None
    rows: list[list[int]] = []
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        match = FIXTURE_VARIABLES_PATTERN.match(stripped)
        if match:
            names = [name.strip() for name in match.group("names").split(",")]
            continue
        rows.append([int(token) for token in stripped.split()])

    if names is None:
        raise ValueError("Fixture is missing its 'variables:' header.")
    return GroundTruth(variable_names=tuple(names), adjacency=np.array(rows, dtype=int))


def ground_truth_fixture(name: str | FixtureName) -> GroundTruth:
    """
    Loads one of the bundled benchmark ground truths.

    :param name: AutoMPG, DWD or Sachs.
    :return: The ground truth matrix with its variable names.
    :raises UnknownFixtureError: If the name is not recognized.
    """
    try:
        fixture = FixtureName(name)
    except ValueError:
        raise UnknownFixtureError(str(name), [member.value for member in FixtureName])

    text = (
        resources.files("causal_prompting.core.resources")
        .joinpath(fixture.resource)
        .read_text(encoding="utf-8")
    )
    return parse_matrix_fixture(text)
