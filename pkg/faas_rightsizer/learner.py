"""Online cost-sensitive one-against-all (CSOAA) classifier.

One linear cost estimator per class. ``predict`` picks the class with the
lowest estimated cost, ``update`` takes one squared-loss SGD step per class
against an observed cost vector. Features are scaled to [0, 1] by a running
per-dimension maximum before every prediction and update.
"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .constants import Defaults
from .errors import DimensionMismatchError, LearnerError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CostVector:
    """Per-class costs, class ids starting at 1."""

    costs: tuple[float, ...]

    def __post_init__(self):
        if len(self.costs) < 1:
            raise LearnerError("Cost vector must have at least one class")
        if not all(np.isfinite(self.costs)):
            raise LearnerError(f"Cost vector contains non-finite values: {self.costs}")

    @classmethod
    def linear(cls, target: int, num_classes: int,
               alpha_over: float = 1.0, alpha_under: float = 2.0) -> 'CostVector':
        """Cost 1 at ``target``, growing linearly with distance on each side.

        Classes above the target (over-provisioned) grow by ``alpha_over`` per
        step, classes below it by ``alpha_under``.
        """
        if not 1 <= target <= num_classes:
            raise LearnerError(f"Target class {target} outside 1..{num_classes}")
        if alpha_over <= 0 or alpha_under <= 0:
            raise LearnerError("Cost slopes must be positive")
        classes = np.arange(1, num_classes + 1)
        distance = classes - target
        costs = np.where(distance > 0, 1.0 + alpha_over * distance, 1.0 - alpha_under * distance)
        return cls(tuple(float(c) for c in costs))

    @property
    def num_classes(self) -> int:
        return len(self.costs)

    @property
    def target(self) -> int:
        """Class with the minimum cost."""
        return int(np.argmin(self.costs)) + 1

    def cost(self, class_id: int) -> float:
        return self.costs[class_id - 1]


class CsoaaModel:
    """Linear CSOAA model with running max-scaling of its inputs."""

    def __init__(self, num_classes: int, dim: int, learning_rate: float = Defaults.LEARNING_RATE):
        if num_classes < 2:
            raise LearnerError(f"num_classes must be at least 2, got {num_classes}")
        if dim < 1:
            raise LearnerError(f"dim must be at least 1, got {dim}")
        if learning_rate < 0 or not np.isfinite(learning_rate):
            raise LearnerError(f"learning_rate must be a finite non-negative number, got {learning_rate}")

        self.num_classes = num_classes
        self.dim = dim
        self.learning_rate = float(learning_rate)
        # bias weight is the last column
        self.weights = np.zeros((num_classes, dim + 1))
        self.running_max = np.zeros(dim)
        self.updates_seen = 0

    def __repr__(self) -> str:
        return (f"CsoaaModel(num_classes={self.num_classes}, dim={self.dim}, "
                f"learning_rate={self.learning_rate}, updates_seen={self.updates_seen})")

    def _as_array(self, x: Sequence[float]) -> np.ndarray:
        arr = np.asarray(x, dtype=float)
        if arr.ndim != 1 or arr.shape[0] != self.dim:
            raise DimensionMismatchError(
                f"Expected a feature vector of dimension {self.dim}, got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise LearnerError(f"Feature vector contains non-finite values: {arr.tolist()}")
        return arr

    def normalize(self, x: Sequence[float]) -> np.ndarray:
        """Scale ``x`` into [0, 1] after folding it into the running maximum.

        Dimensions whose maximum is still zero map to 0.
        """
        arr = np.abs(self._as_array(x))
        np.maximum(self.running_max, arr, out=self.running_max)
        scaled = np.divide(arr, self.running_max,
                           out=np.zeros_like(arr), where=self.running_max > 0)
        return scaled

    def _augment(self, x: Sequence[float]) -> np.ndarray:
        return np.append(self.normalize(x), 1.0)

    def estimates(self, x: Sequence[float]) -> np.ndarray:
        """Estimated cost of every class for ``x``."""
        return self.weights @ self._augment(x)

    def predict(self, x: Sequence[float]) -> int:
        """Class id (1-based) with the lowest estimated cost; ties go to the lowest id."""
        # np.argmin returns the first minimum
        return int(np.argmin(self.estimates(x))) + 1

    def update(self, x: Sequence[float], costs: CostVector) -> None:
        """One squared-loss gradient step per class towards ``costs``."""
        if costs.num_classes != self.num_classes:
            raise DimensionMismatchError(
                f"Cost vector has {costs.num_classes} classes, model has {self.num_classes}"
            )
        x_hat = self._augment(x)
        target = np.asarray(costs.costs, dtype=float)
        residual = self.weights @ x_hat - target
        weights = self.weights - self.learning_rate * np.outer(residual, x_hat)
        if not np.all(np.isfinite(weights)):
            raise LearnerError("Weights diverged to non-finite values")
        self.weights = weights
        self.updates_seen += 1
