from abc import ABC, abstractmethod

from causal_prompting.core.dataset import Dataset
from causal_prompting.core.graph import CausalGraph, Method, PriorKnowledge


class CausalDiscoverer(ABC):
    """Abstract base class for constrainable causal discovery algorithms."""

    method: Method
    """Method tag the discoverer implements."""

    @abstractmethod
    def discover(
        self, dataset: Dataset, prior_knowledge: PriorKnowledge | None = None
    ) -> CausalGraph:
        """
        Estimates a causal graph from a standardized dataset.

        :param dataset: Standardized dataset.
        :param prior_knowledge: Optional constraints encoded for this method.
        :return: Estimated graph.
        """
        pass

    def _check_prior_knowledge(
        self, dataset: Dataset, prior_knowledge: PriorKnowledge | None
    ) -> None:
        if prior_knowledge is None:
            return
        if prior_knowledge.method != self.method:
            raise ValueError(
                f"Prior knowledge encoded for {prior_knowledge.method.display_name} "
                f"cannot constrain {self.method.display_name}"
            )
        if prior_knowledge.variable_names != dataset.variable_names:
            raise ValueError(
                "Prior knowledge variables do not match the dataset: "
                f"{prior_knowledge.variable_names} vs {dataset.variable_names}"
            )
