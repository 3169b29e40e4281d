"""
Score and Weight Value Objects
Basic-model score matrices, ensemble weights and ensemble scores
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..entities.base import ValueObject
from ..exceptions import EmptySessionError, IntelValidationError, ShapeMismatchError

SIMPLEX_TOLERANCE = 1e-6


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ScoreMatrix(ValueObject):
    """
    N x K basic-model scores of one session.
    mask[n, k] is true where basic model k proposed a genuine score for item n;
    unmasked entries hold imputed values.
    """
    values: np.ndarray
    mask: np.ndarray
    model_ids: Tuple[str, ...]

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        mask = np.asarray(self.mask, dtype=bool)
        model_ids = tuple(str(m) for m in self.model_ids)
        if values.ndim != 2:
            raise ShapeMismatchError(f"Scores must be an N x K matrix, got shape {values.shape}")
        if values.shape[0] < 1:
            raise EmptySessionError("Score matrix has no items")
        if mask.shape != values.shape:
            raise ShapeMismatchError(f"Mask shape {mask.shape} != score shape {values.shape}")
        if len(model_ids) != values.shape[1]:
            raise ShapeMismatchError(f"{len(model_ids)} model ids for {values.shape[1]} score columns")
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "mask", _frozen(mask))
        object.__setattr__(self, "model_ids", model_ids)

    @property
    def num_items(self) -> int:
        return int(self.values.shape[0])

    @property
    def num_models(self) -> int:
        return int(self.values.shape[1])

    def column(self, k: int) -> np.ndarray:
        return self.values[:, k]


@dataclass(frozen=True, eq=False)
class WeightMatrix(ValueObject):
    """N x K ensemble weights; rows lie on the K-simplex for the constrained head"""
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ShapeMismatchError(f"Weights must be an N x K matrix, got shape {values.shape}")
        object.__setattr__(self, "values", _frozen(values))

    @property
    def spread(self) -> float:
        """delta = max over n, m, k of |w_n^k - w_m^k|"""
        if self.values.shape[0] == 0:
            return 0.0
        return float(np.max(self.values.max(axis=0) - self.values.min(axis=0)))

    def on_simplex(self, tolerance: float = SIMPLEX_TOLERANCE) -> bool:
        return bool(
            np.all(self.values >= 0.0)
            and np.all(np.abs(self.values.sum(axis=1) - 1.0) <= tolerance)
        )

    def require_simplex(self, tolerance: float = SIMPLEX_TOLERANCE) -> 'WeightMatrix':
        if not self.on_simplex(tolerance):
            raise IntelValidationError("Weight rows must be non-negative and sum to 1")
        return self


@dataclass(frozen=True, eq=False)
class EnsembleScores(ValueObject):
    """Final ensemble score per item"""
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ShapeMismatchError(f"Ensemble scores must be a vector, got shape {values.shape}")
        object.__setattr__(self, "values", _frozen(values))


def ensemble_scores(weights: WeightMatrix, scores: ScoreMatrix) -> EnsembleScores:
    """S_n^ens = sum_k w_n^k * S_n^k"""
    if weights.values.shape != scores.values.shape:
        raise ShapeMismatchError(
            f"Weight shape {weights.values.shape} != score shape {scores.values.shape}"
        )
    return EnsembleScores(np.sum(weights.values * scores.values, axis=1))
