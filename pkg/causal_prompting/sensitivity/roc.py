from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from loguru import logger

from causal_prompting.sensitivity.se_model import SeModel

DEFAULT_GRID_START = 0.032
DEFAULT_GRID_STOP = 0.108
DEFAULT_GRID_STEP = 0.001


@dataclass(slots=True, frozen=True, kw_only=True)
class RocPoint:
    """
    One operating point of the Forbidden decision: a mean probability is
    declared Forbidden when it lies below the threshold.
    """

    threshold: float
    tpr: float
    fpr: float


def inclusive_grid(
    start: float = DEFAULT_GRID_START,
    stop: float = DEFAULT_GRID_STOP,
    step: float = DEFAULT_GRID_STEP,
) -> np.ndarray:
    """
    Inclusive grid from start to stop, rounded so that decimal steps stay exact.

    :param start: First grid value.
    :param stop: Last grid value.
    :param step: Increment.
    :return: Grid values.
    """
    if step <= 0 or stop < start:
        raise ValueError(f"Invalid grid: start={start}, stop={stop}, step={step}.")
    count = int(round((stop - start) / step)) + 1
    return np.round(start + step * np.arange(count), 10)


def roc_auc_simulation(
    model: SeModel,
    alpha1: float = 0.05,
    grid: np.ndarray | None = None,
    trials: int = 1000,
    seed: int = 0,
) -> tuple[list[RocPoint], float]:
    """
    Monte Carlo ROC of the Forbidden decision.

    For every grid value g, trials true probabilities are drawn from a Gaussian
    with mean g and the model's standard error; a draw is a positive when it
    lies below alpha1. Sweeping a threshold over the grid, grid values below
    the threshold are declared Forbidden, which yields cumulative TPR/FPR from
    (0, 0) to (1, 1). The AUC is the trapezoidal area under that curve.

    :param model: Standard error model.
    :param alpha1: Forbidden threshold.
    :param grid: Mean probabilities to simulate (default 0.032..0.108 step 0.001).
    :param trials: Draws per grid value.
    :param seed: Seed of the generator.
    :return: ROC points ordered by threshold and the AUC.
    """
    if trials < 1:
        raise ValueError(f"At least one trial per grid value is needed, got {trials}.")
    grid = inclusive_grid() if grid is None else np.sort(np.asarray(grid, dtype=float))
    rng = np.random.default_rng(seed)

    positives = np.zeros(len(grid), dtype=int)
    for index, mean in enumerate(grid):
        draws = rng.normal(mean, model.predict(float(mean)), size=trials)
        positives[index] = int(np.sum(draws < alpha1))
    negatives = trials - positives

    total_positives = int(positives.sum())
    total_negatives = int(negatives.sum())
    if total_positives == 0 or total_negatives == 0:
        logger.warning(
            f"ROC simulation has {total_positives} positive and {total_negatives} negative draws; "
            "rates of the missing class are reported as 0"
        )

    cumulative_tp = np.concatenate([[0], np.cumsum(positives)])
    cumulative_fp = np.concatenate([[0], np.cumsum(negatives)])
    tpr = cumulative_tp / total_positives if total_positives else np.zeros(len(cumulative_tp))
    fpr = cumulative_fp / total_negatives if total_negatives else np.zeros(len(cumulative_fp))
    step = grid[1] - grid[0] if len(grid) > 1 else DEFAULT_GRID_STEP
    thresholds = np.concatenate([[grid[0]], grid + step])

    points = [
        RocPoint(threshold=float(round(t, 10)), tpr=float(y), fpr=float(x))
        for t, y, x in zip(thresholds, tpr, fpr)
    ]
    auc = float(np.trapezoid(tpr, fpr))
    logger.info(f"ROC simulation over {len(grid)} grid values x {trials} trials: AUC {auc:.3f}")
    return points, auc


def write_roc(path: str | Path, points: list[RocPoint]) -> None:
    """
    Writes ROC points as CSV.

    :param path: Destination file.
    :param points: ROC points.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(
        [{"threshold": p.threshold, "tpr": p.tpr, "fpr": p.fpr} for p in points],
        columns=["threshold", "tpr", "fpr"],
    ).to_csv(path, index=False)
