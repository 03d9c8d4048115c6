from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from causal_prompting.sensitivity.sensitivity_exceptions import DegenerateFitError

_QUADRATURE_TOLERANCE = 1e-10


@dataclass(slots=True, frozen=True, kw_only=True)
class SeModel:
    """
    Phenomenological model of the standard error of a mean yes-probability:
    SE(p) = a_p - b_p * (p - 0.5)^2, clamped at 0.
    """

    a_p: float
    """Standard error at p = 0.5."""
    b_p: float
    """Curvature of the parabola."""

    def predict(self, probability: float) -> float:
        """
        Predicted standard error at a mean probability.

        :param probability: Mean yes-probability.
        :return: Non-negative standard error.
        """
        return max(self.a_p - self.b_p * (probability - 0.5) ** 2, 0.0)


MEASURED_SE_MODEL = SeModel(a_p=0.0694, b_p=0.2783)
"""SE model measured on repeated GPT-4 answers; the default of the simulations."""


def fit_se_model(samples: list[tuple[float, float]]) -> SeModel:
    """
    Fits a_p and b_p by least squares on (mean probability, standard error) samples.

    :param samples: Observed (p, se) pairs.
    :return: Fitted model.
    :raises DegenerateFitError: If the design has rank < 2 (e.g. all p equal).
    """
    if len(samples) < 3:
        raise ValueError(f"Fitting the SE model needs at least 3 samples, got {len(samples)}.")
    probabilities = np.array([p for p, _ in samples], dtype=float)
    errors = np.array([se for _, se in samples], dtype=float)
    design = np.column_stack(
        [np.ones_like(probabilities), -((probabilities - 0.5) ** 2)]
    )
    solution, _, rank, _ = np.linalg.lstsq(design, errors, rcond=None)
    if rank < 2:
        raise DegenerateFitError("the SE model", "the mean probabilities do not vary")
    return SeModel(a_p=float(solution[0]), b_p=float(solution[1]))


def truncation_probability(probability: float, alpha1: float, model: SeModel) -> float:
    """
    Probability that the true yes-probability lies in [0, alpha1), assuming a
    Gaussian centered on the measured mean with the model's standard error.
    The density is integrated over [0, alpha1] without renormalizing the
    truncated tails.

    :param probability: Measured mean yes-probability, in (0, 1).
    :param alpha1: Forbidden threshold.
    :param model: Standard error model.
    :return: Integrated probability mass.
    """
    if not 0.0 < probability < 1.0:
        raise ValueError(f"Mean probability must lie in (0, 1), got {probability}.")
    standard_error = model.predict(probability)
    if standard_error <= 0:
        return 1.0 if probability < alpha1 else 0.0
    mass, _ = integrate.quad(
        stats.norm.pdf,
        0.0,
        alpha1,
        args=(probability, standard_error),
        epsabs=_QUADRATURE_TOLERANCE,
        epsrel=_QUADRATURE_TOLERANCE,
    )
    return float(mass)
