from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from errors import InvalidArgumentError, InvalidDataError

# Two points closer than this are treated as the same point.
DUPLICATE_TOL = 1e-12


def _readonly(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def default_names(prefix: str, count: int) -> Tuple[str, ...]:
    return tuple(f"{prefix}{i + 1}" for i in range(count))


# === Designs ===

@dataclass(frozen=True)
class SamplingPlan:
    """n design points in the unit cube, one row per point."""

    points: np.ndarray
    feature_names: Tuple[str, ...] = ()

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        if points.ndim != 2:
            raise InvalidArgumentError(f"a sampling plan needs a 2-D matrix, got shape {points.shape}")
        if not np.all(np.isfinite(points)):
            raise InvalidDataError("sampling plan contains non-finite values")
        if points.size and (points.min() < 0.0 or points.max() > 1.0):
            raise InvalidDataError("sampling plan values must lie in [0, 1]; normalize the data first")
        names = tuple(self.feature_names) or default_names("x", points.shape[1])
        if len(names) != points.shape[1]:
            raise InvalidArgumentError(f"{len(names)} feature names for {points.shape[1]} columns")
        if len(set(names)) != len(names):
            raise InvalidArgumentError(f"feature names must be unique: {list(names)}")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def k(self) -> int:
        return self.points.shape[1]

    def with_points(self, extra) -> "SamplingPlan":
        extra = np.atleast_2d(np.asarray(extra, dtype=float))
        return SamplingPlan(np.vstack([self.points, extra]), self.feature_names)

    def as_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.points, columns=list(self.feature_names))

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "SamplingPlan":
        return cls(frame.to_numpy(dtype=float), tuple(str(c) for c in frame.columns))


@dataclass(frozen=True)
class Bounds:
    low: np.ndarray
    high: np.ndarray

    def __post_init__(self):
        low = np.atleast_1d(np.array(self.low, dtype=float))
        high = np.atleast_1d(np.array(self.high, dtype=float))
        if low.ndim != 1 or low.shape != high.shape:
            raise InvalidArgumentError(f"bounds shapes differ: low {low.shape}, high {high.shape}")
        if not (np.all(np.isfinite(low)) and np.all(np.isfinite(high))):
            raise InvalidArgumentError("bounds must be finite")
        if np.any(low >= high):
            bad = np.flatnonzero(low >= high).tolist()
            raise InvalidArgumentError(f"low must be < high in every dimension (violations at {bad})")
        low.setflags(write=False)
        high.setflags(write=False)
        object.__setattr__(self, "low", low)
        object.__setattr__(self, "high", high)

    @property
    def k(self) -> int:
        return self.low.shape[0]

    @property
    def width(self) -> np.ndarray:
        return self.high - self.low

    @classmethod
    def unit(cls, k: int) -> "Bounds":
        return cls(np.zeros(k), np.ones(k))

    @classmethod
    def from_data(cls, raw) -> "Bounds":
        """Column-wise min/max of raw data. A constant column gets a unit-wide range."""
        raw = np.asarray(raw, dtype=float)
        if raw.ndim != 2 or raw.shape[0] == 0:
            raise InvalidDataError("cannot derive bounds from an empty matrix")
        if not np.all(np.isfinite(raw)):
            raise InvalidDataError("data contains non-finite values")
        low = raw.min(axis=0)
        high = raw.max(axis=0)
        high = np.where(high > low, high, low + 1.0)
        return cls(low, high)

    def extended(self, fraction: float) -> "Bounds":
        """Widen every interval by `fraction` of its width on both sides."""
        if fraction < 0:
            raise InvalidArgumentError("extension fraction must be >= 0")
        pad = self.width * fraction
        return Bounds(self.low - pad, self.high + pad)

    def contains(self, x, atol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.low - atol) and np.all(x <= self.high + atol))


@dataclass(frozen=True)
class SyntheticDataset:
    X: SamplingPlan
    Z: np.ndarray
    target_names: Tuple[str, ...] = ()

    def __post_init__(self):
        Z = np.array(self.Z, dtype=float)
        if Z.ndim == 1:
            Z = Z.reshape(-1, 1)
        if Z.shape[0] != self.X.n:
            raise InvalidDataError(f"{self.X.n} design rows but {Z.shape[0]} target rows")
        if not np.all(np.isfinite(Z)):
            raise InvalidDataError("targets contain non-finite values")
        names = tuple(self.target_names) or default_names("z", Z.shape[1])
        if len(names) != Z.shape[1] or len(set(names)) != len(names):
            raise InvalidArgumentError(f"need {Z.shape[1]} unique target names, got {list(names)}")
        Z.setflags(write=False)
        object.__setattr__(self, "Z", Z)
        object.__setattr__(self, "target_names", names)

    def columns(self, names: Sequence[str]) -> np.ndarray:
        missing = [name for name in names if name not in self.target_names]
        if missing:
            raise InvalidArgumentError(f"unknown target columns {missing}; available: {list(self.target_names)}")
        idx = [self.target_names.index(name) for name in names]
        return self.Z[:, idx]

    def targets_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.Z, columns=list(self.target_names))


# === Space filling ===

@dataclass(frozen=True)
class DistanceProfile:
    """Distinct pairwise distances d (ascending) with multiplicities J."""

    d: np.ndarray
    J: np.ndarray
    M: int
    q: float = 2.0
    p: float = 2.0

    def __post_init__(self):
        d = _readonly(self.d)
        J = _readonly(self.J, dtype=np.int64)
        if d.ndim != 1 or d.shape != J.shape or d.size == 0:
            raise InvalidArgumentError("d and J must be non-empty vectors of equal length")
        if np.any(J < 1) or int(J.sum()) != int(self.M):
            raise InvalidArgumentError(f"multiplicities sum to {int(J.sum())}, expected M={self.M}")
        if np.any(np.diff(d) <= 0) or d[0] <= DUPLICATE_TOL:
            raise InvalidArgumentError("distances must be strictly increasing and positive")
        if self.q <= 0 or self.p < 1:
            raise InvalidArgumentError(f"need q > 0 and p >= 1, got q={self.q}, p={self.p}")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "p", float(self.p))

    @property
    def phi_sum(self) -> float:
        """Sum of J_i * d_i^-q."""
        return float(np.sum(self.J * self.d ** (-self.q)))


@dataclass(frozen=True)
class MmResult:
    quality: float
    profile: Optional[DistanceProfile]


# === Desirability ===

class DesirabilitySpec(BaseModel):
    """Derringer-Suich transform of one objective.

    low/high are A/B, target is t0, scale is s (max/min) and
    scale_left/scale_right are s1/s2 (target).
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    goal: Literal["maximize", "minimize", "target"]
    low: float
    high: float
    target: Optional[float] = None
    scale: float = Field(1.0, gt=0)
    scale_left: float = Field(1.0, gt=0)
    scale_right: float = Field(1.0, gt=0)

    @field_validator("goal", mode="before")
    @classmethod
    def _goal_alias(cls, value):
        aliases = {"max": "maximize", "min": "minimize"}
        return aliases.get(value, value)

    @model_validator(mode="after")
    def _check_bounds(self):
        if not self.low < self.high:
            raise ValueError(f"low ({self.low}) must be < high ({self.high})")
        if self.goal == "target":
            if self.target is None or not self.low < self.target < self.high:
                raise ValueError(f"target goal needs low < target < high, got target={self.target}")
        return self


# === Surrogates ===

class ForestConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_estimators: int = Field(100, ge=1)
    max_depth: Optional[int] = Field(None, ge=1)
    min_samples_leaf: int = Field(1, ge=1)
    bootstrap: bool = True
    seed: int = 0
    n_jobs: Optional[int] = None


class GpConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    # None selects the default log-spaced grid
    length_scale: Optional[Union[float, List[float]]] = None
    signal_variance: float = Field(1.0, gt=0)
    noise_jitter: float = Field(1e-8, gt=0)

    @field_validator("length_scale")
    @classmethod
    def _positive_scales(cls, value):
        if value is None:
            return value
        scales = value if isinstance(value, list) else [value]
        if not scales or any(s <= 0 for s in scales):
            raise ValueError("length scales must be positive")
        return value


@dataclass
class EvaluationReport:
    """Hold-out metrics and predicted-vs-actual data of a train/test split."""

    metrics: pd.DataFrame
    predictions: Dict[str, pd.DataFrame]
    n_train: int
    n_test: int


@dataclass
class CvReport:
    # model -> {"NMSE": [per-target fold scores], "NMAE": [...]}
    raw: Dict[str, Dict[str, List[np.ndarray]]]
    summary: pd.DataFrame
    target_names: Tuple[str, ...]
    k_folds: int


# === Optimization ===

class TraceEntry(BaseModel):
    iteration: int
    desirability: float
    objectives: List[float]


class InfillSuggestion(BaseModel):
    objective_names: List[str]
    feature_names: List[str]
    x_best: List[float]
    y_best: List[float]
    desirability_best: float
    trace: List[TraceEntry] = Field(default_factory=list)
    evaluations: int = 0
    flat_landscape: bool = False


@dataclass(frozen=True)
class ParetoFront:
    indices: np.ndarray
    orientation: Tuple[str, ...]

    def mask(self, m: int) -> np.ndarray:
        flags = np.zeros(m, dtype=bool)
        flags[self.indices] = True
        return flags


# === Diagnostics ===

MarkerRole = Literal["with-mm", "without-mm"]


@dataclass(frozen=True)
class Marker:
    label: str
    x: np.ndarray
    role: MarkerRole = "with-mm"

    def __post_init__(self):
        if self.role not in ("with-mm", "without-mm"):
            raise InvalidArgumentError(f"unknown marker role {self.role!r}")
        object.__setattr__(self, "x", _readonly(np.ravel(self.x)))


@dataclass(frozen=True)
class BoxSummary:
    q1: float
    median: float
    q3: float
    whislo: float
    whishi: float
    fliers: Tuple[float, ...] = ()


@dataclass(frozen=True)
class HistogramSummary:
    edges: np.ndarray
    counts: np.ndarray
    n_distinct: int
    low_cardinality: bool


@dataclass
class IpPlotData:
    feature_names: Tuple[str, ...]
    markers: List[Marker]
    boxes: List[BoxSummary] = field(default_factory=list)
    histograms: List[HistogramSummary] = field(default_factory=list)


@dataclass
class PlotArtifact:
    """A rendered figure plus the table it was drawn from."""

    name: str
    svg: str
    data: pd.DataFrame
