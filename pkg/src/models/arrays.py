"""Annotated numpy array field types for pydantic models."""

from typing import Annotated, Any, List

import numpy as np
from pydantic import BeforeValidator, ConfigDict, PlainSerializer

from ..core.linalg import readonly


def _to_float_array(value: Any) -> np.ndarray:
    return readonly(np.asarray(value, dtype=float))


def _to_bool_array(value: Any) -> np.ndarray:
    out = np.array(value, dtype=bool, copy=True)
    out.setflags(write=False)
    return out


def _dump(value: np.ndarray) -> List[Any]:
    return value.tolist()


FloatArray = Annotated[
    np.ndarray,
    BeforeValidator(_to_float_array),
    PlainSerializer(_dump, return_type=list, when_used="json"),
]

BoolArray = Annotated[
    np.ndarray,
    BeforeValidator(_to_bool_array),
    PlainSerializer(_dump, return_type=list, when_used="json"),
]

ARRAY_MODEL_CONFIG = ConfigDict(frozen=True, arbitrary_types_allowed=True)
