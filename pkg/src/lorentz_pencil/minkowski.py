"""Vector kernel for Minkowski 3-space with signature (+, +, -).

Vectors are plain length-3 float arrays. No causal tag is stored on them;
:func:`causal_class` recomputes the character whenever it is needed.
"""

from __future__ import annotations

import enum
import math

import numpy as np

__all__ = [
    "CausalClass", "NullVectorError", "vec", "inner", "lorentz_cross",
    "causal_class", "lorentz_norm", "normalize", "signature", "NULL_REL_TOL",
]

NULL_REL_TOL = 1e-10


class CausalClass(enum.Enum):
    SPACELIKE = "spacelike"
    TIMELIKE = "timelike"
    NULL = "null"


class NullVectorError(ValueError):
    """A null (lightlike) vector has no Lorentzian unit normalisation."""


def vec(x1: float, x2: float, x3: float) -> np.ndarray:
    return np.array([x1, x2, x3], dtype=float)


def inner(x, y) -> float:
    return float(x[0] * y[0] + x[1] * y[1] - x[2] * y[2])


def lorentz_cross(x, y) -> np.ndarray:
    # third component is the negated Euclidean one; <X x Y, Z> = det[X, Y, Z]
    return np.array([
        x[1] * y[2] - x[2] * y[1],
        x[2] * y[0] - x[0] * y[2],
        x[1] * y[0] - x[0] * y[1],
    ], dtype=float)


def _null_tol(x) -> float:
    e2 = float(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])
    return NULL_REL_TOL * max(1.0, e2)


def causal_class(x) -> CausalClass:
    q = inner(x, x)
    tol = _null_tol(x)
    if q > tol or not np.any(x):
        return CausalClass.SPACELIKE
    if q < -tol:
        return CausalClass.TIMELIKE
    return CausalClass.NULL


def signature(x) -> int:
    """+1 for spacelike, -1 for timelike; raises on null vectors."""
    c = causal_class(x)
    if c is CausalClass.NULL:
        raise NullVectorError(f"null vector {tuple(x)} has no signature")
    return 1 if c is CausalClass.SPACELIKE else -1


def lorentz_norm(x) -> float:
    return math.sqrt(abs(inner(x, x)))


def normalize(x) -> np.ndarray:
    if causal_class(x) is CausalClass.NULL or not np.any(x):
        raise NullVectorError(f"cannot normalise null vector {tuple(x)}")
    return np.asarray(x, dtype=float) / lorentz_norm(x)
