"""
Base Value Object class for Domain Layer
Equality and hashing by value, including numpy array fields
"""
from abc import ABC
from typing import Any, Dict

import numpy as np


def _same(left: Any, right: Any) -> bool:
    if isinstance(left, np.ndarray) or isinstance(right, np.ndarray):
        return (
            isinstance(left, np.ndarray) and isinstance(right, np.ndarray)
            and left.shape == right.shape and np.array_equal(left, right)
        )
    return left == right


def _hashable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.shape, value.dtype.str, value.tobytes()
    return value


class ValueObject(ABC):
    """Base class for value objects"""

    def __eq__(self, other):
        if not isinstance(other, self.__class__):
            return False
        if self.__dict__.keys() != other.__dict__.keys():
            return False
        return all(_same(value, other.__dict__[key]) for key, value in self.__dict__.items())

    def __hash__(self):
        return hash(tuple((key, _hashable(value)) for key, value in sorted(self.__dict__.items())))

    def to_dict(self) -> Dict[str, Any]:
        """Convert value object to dictionary, arrays as nested lists"""
        return {
            k: v.tolist() if isinstance(v, np.ndarray) else v
            for k, v in self.__dict__.items() if not k.startswith('_')
        }
