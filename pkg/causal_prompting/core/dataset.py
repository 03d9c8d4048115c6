from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import pandas as pd
from loguru import logger

from causal_prompting.core.core_exceptions import ConstantColumnError, DatasetLoadError

_STANDARDIZED_TOLERANCE = 1e-9
"""Tolerance on column mean 0 / variance 1 for datasets flagged as standardized."""


@dataclass(slots=True, frozen=True, kw_only=True, eq=False)
class Dataset:
    """
    Named continuous variables observed n times.
    """

    variable_names: tuple[str, ...]
    """Ordered, distinct variable labels."""
    values: np.ndarray
    """n x d matrix, rows are observations."""
    standardized: bool = False
    """Whether every column has mean 0 and (population) variance 1."""

    def __post_init__(self):
        """
        Validates names, shape, completeness and the standardization flag.
        """
        object.__setattr__(self, "variable_names", tuple(self.variable_names))
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[1] != len(self.variable_names):
            raise ValueError(
                f"Values must be an n x {len(self.variable_names)} matrix, got {values.shape}."
            )
        if len(set(self.variable_names)) != len(self.variable_names):
            raise ValueError(f"Variable names must be distinct: {self.variable_names}")
        if np.isnan(values).any():
            raise ValueError("Dataset values cannot contain missing entries.")
        if self.standardized:
            if np.any(np.abs(values.mean(axis=0)) > _STANDARDIZED_TOLERANCE) or np.any(
                np.abs(values.var(axis=0) - 1.0) > _STANDARDIZED_TOLERANCE
            ):
                raise ValueError(
                    "Dataset flagged as standardized but columns are not mean 0 / variance 1."
                )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_variables(self) -> int:
        return self.values.shape[1]

    def resample(self, indices: np.ndarray) -> "Dataset":
        """
        Returns the rows at the given indices, no longer flagged as standardized.

        :param indices: Row indices (repetitions allowed).
        :return: Resampled dataset.
        """
        return replace(self, values=self.values[indices], standardized=False)


def _parse_cell(path: str, raw: object, row: int, column: str) -> float:
    if raw is None or (isinstance(raw, float) and np.isnan(raw)) or str(raw).strip() == "":
        raise DatasetLoadError(path, "missing value", row=row, column=column)
    try:
        return float(str(raw).strip())
    except ValueError:
        raise DatasetLoadError(
            path, f"non-numeric value '{raw}'", row=row, column=column
        )


def load_dataset(
    path: str | Path, has_header: bool = True, delimiter: str = ","
) -> Dataset:
    """
    Loads a delimiter-separated numeric text file.

    Reported row numbers are 1-based line numbers of the file.

    :param path: File location.
    :param has_header: Whether the first line holds the variable names.
    :param delimiter: Field separator.
    :return: Dataset with standardized=False and the file's column order.
    :raises DatasetLoadError: On missing cells, non-numeric cells, duplicate
        names, inconsistent column counts or unreadable files.
    """
    path = str(path)
    try:
        frame = pd.read_csv(
            path,
            sep=delimiter,
            header=None,
            dtype=str,
            keep_default_na=False,
            skipinitialspace=True,
        )
    except FileNotFoundError:
        raise DatasetLoadError(path, "file not found")
    except pd.errors.EmptyDataError:
        raise DatasetLoadError(path, "file is empty")
    except pd.errors.ParserError as e:
        raise DatasetLoadError(path, f"inconsistent column count ({e})")

    if has_header:
        names = [str(name).strip() for name in frame.iloc[0].tolist()]
        body = frame.iloc[1:]
        first_line = 2
    else:
        names = [f"x{index + 1}" for index in range(frame.shape[1])]
        body = frame
        first_line = 1

    seen: set[str] = set()
    for column_index, name in enumerate(names):
        if not name:
            raise DatasetLoadError(path, "empty variable name", row=1, column=str(column_index + 1))
        if name in seen:
            raise DatasetLoadError(path, "duplicate variable name", row=1, column=name)
        seen.add(name)

    if body.shape[0] == 0:
        raise DatasetLoadError(path, "no observations")

    values = np.empty(body.shape, dtype=float)
    for row_offset, row in enumerate(body.itertuples(index=False)):
        for column_index, raw in enumerate(row):
            values[row_offset, column_index] = _parse_cell(
                path, raw, first_line + row_offset, names[column_index]
            )

    logger.debug(f"Loaded dataset '{path}' with n={values.shape[0]}, d={values.shape[1]}")
    return Dataset(variable_names=tuple(names), values=values, standardized=False)


def standardize(dataset: Dataset) -> Dataset:
    """
    Transforms every column to (x - mean) / std using the population standard deviation.

    :param dataset: Input dataset.
    :return: Standardized copy.
    :raises ConstantColumnError: If a column takes a single value.
    """
    values = np.asarray(dataset.values, dtype=float)
    mean = values.mean(axis=0)
    std = values.std(axis=0)
    # A constant float column can still have a std of a few ulps.
    spread = np.ptp(values, axis=0)
    for name, column_spread, column_std in zip(dataset.variable_names, spread, std):
        if column_spread == 0.0 or column_std <= 0.0 or not np.isfinite(column_std):
            raise ConstantColumnError(name)

    standardized = (values - mean) / std
    # One more pass removes the residual floating-point drift from the first.
    standardized = (standardized - standardized.mean(axis=0)) / standardized.std(axis=0)
    return Dataset(
        variable_names=dataset.variable_names, values=standardized, standardized=True
    )
