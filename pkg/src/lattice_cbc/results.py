"""Result containers shared by the construction algorithms."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .wce import GeneratingVector
from .weights import WeightScheme


@dataclass
class ConstructionResult:
    """Generating vector, chosen weights and per-dimension error data.

    ``E_history[i]**2 == e2_history[i] * M_history[i]``; the last entry is the
    root-mean-square error bound of the full rule.
    """

    gv: GeneratingVector
    scheme: WeightScheme
    e2_history: np.ndarray
    M_history: np.ndarray | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def E_history(self) -> np.ndarray | None:
        if self.M_history is None:
            return None
        return np.sqrt(self.e2_history * self.M_history)

    @property
    def e2(self) -> float:
        return float(self.e2_history[-1])

    @property
    def M(self) -> float:
        return float(self.M_history[-1])

    @property
    def E(self) -> float:
        return float(np.sqrt(self.e2 * self.M))

    @property
    def gamma(self) -> np.ndarray:
        return self.scheme.product_part()
