"""Derringer-Suich desirability transforms and their geometric mean.

All transforms accept scalars or arrays and map every real into [0, 1];
NaN inputs map to 0.
"""

from typing import Sequence, Tuple, Union

import numpy as np

from errors import InvalidArgumentError
from models import DesirabilitySpec

ArrayLike = Union[float, Sequence[float], np.ndarray]


def _result(values: np.ndarray, like) -> Union[float, np.ndarray]:
    values = np.where(np.isnan(values), 0.0, values)
    return float(values) if np.ndim(like) == 0 else values


def _require(spec: DesirabilitySpec, goal: str) -> None:
    if spec.goal != goal:
        raise InvalidArgumentError(f"spec has goal {spec.goal!r}, expected {goal!r}")


def d_max(f: ArrayLike, spec: DesirabilitySpec):
    """0 below low, ((f - low) / (high - low))^s inside, 1 above high."""
    _require(spec, "maximize")
    f = np.asarray(f, dtype=float)
    ratio = np.clip((f - spec.low) / (spec.high - spec.low), 0.0, 1.0)
    return _result(ratio ** spec.scale, f)


def d_min(f: ArrayLike, spec: DesirabilitySpec):
    _require(spec, "minimize")
    f = np.asarray(f, dtype=float)
    ratio = np.clip((f - spec.high) / (spec.low - spec.high), 0.0, 1.0)
    return _result(ratio ** spec.scale, f)


def d_target(f: ArrayLike, spec: DesirabilitySpec):
    """Rises on [low, target] with scale_left, falls on [target, high] with scale_right, 0 outside."""
    _require(spec, "target")
    f = np.asarray(f, dtype=float)
    t0 = spec.target
    left = np.clip((f - spec.low) / (t0 - spec.low), 0.0, 1.0) ** spec.scale_left
    right = np.clip((f - spec.high) / (t0 - spec.high), 0.0, 1.0) ** spec.scale_right
    inside = (f >= spec.low) & (f <= spec.high)
    values = np.where(f <= t0, left, right)
    return _result(np.where(inside, values, 0.0), f)


_TRANSFORMS = {"maximize": d_max, "minimize": d_min, "target": d_target}


def desirability(f: ArrayLike, spec: DesirabilitySpec):
    return _TRANSFORMS[spec.goal](f, spec)


def overall(d: ArrayLike):
    """Unweighted geometric mean over the last axis; one zero gives zero."""
    d = np.asarray(d, dtype=float)
    if d.ndim == 0 or d.shape[-1] == 0:
        raise InvalidArgumentError("overall desirability needs at least one component")
    if np.any(np.isnan(d)) or np.any(d < 0.0) or np.any(d > 1.0):
        raise InvalidArgumentError("individual desirabilities must lie in [0, 1]")
    result = np.prod(d, axis=-1) ** (1.0 / d.shape[-1])
    return float(result) if np.ndim(result) == 0 else result


class OverallDesirability:
    """R per-objective specs combined by the geometric mean."""

    def __init__(self, specs: Sequence[DesirabilitySpec]):
        if len(specs) < 1:
            raise InvalidArgumentError("OverallDesirability needs at least one spec")
        self.specs = list(specs)

    @property
    def R(self) -> int:
        return len(self.specs)

    def individual(self, F) -> np.ndarray:
        F = np.atleast_2d(np.asarray(F, dtype=float))
        if F.shape[1] != self.R:
            raise InvalidArgumentError(f"expected {self.R} objective columns, got {F.shape[1]}")
        return np.column_stack([desirability(F[:, r], spec) for r, spec in enumerate(self.specs)])

    def evaluate(self, F) -> Tuple[np.ndarray, np.ndarray]:
        """Individual (m x R) and overall (m,) desirabilities of an m x R objective matrix."""
        D = self.individual(F)
        return D, overall(D) if D.shape[0] else np.empty(0)

    def __call__(self, F) -> np.ndarray:
        return self.evaluate(F)[1]
