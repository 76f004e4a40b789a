import json
import os
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

from dotenv import load_dotenv
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from errors import ConfigError
from models import DesirabilitySpec, ForestConfig, GpConfig

load_dotenv()

# === CONFIG ===
DEFAULT_OUTPUT_DIR = os.getenv("DOE_OUTPUT_DIR", "results")
LOG_LEVEL = os.getenv("DOE_LOG_LEVEL", "INFO").upper()


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SyntheticConfig(_Section):
    """Clustered stand-in dataset used when no CSV is given."""

    n: int = Field(213, ge=2)
    k: int = Field(2, ge=1)
    n_clusters: int = Field(5, ge=1)
    spread: float = Field(0.03, gt=0, lt=0.5)
    lane_fraction: float = Field(0.2, ge=0, le=1)
    noise: float = Field(0.0, ge=0)
    seed: int = 0


class DataConfig(_Section):
    features_csv: Optional[str] = None
    targets_csv: Optional[str] = None
    synthetic: SyntheticConfig = Field(default_factory=SyntheticConfig)

    @model_validator(mode="after")
    def _targets_need_features(self):
        if self.targets_csv and not self.features_csv:
            raise ValueError("data.targets_csv requires data.features_csv")
        return self


def _max_objective(name: str) -> "ObjectiveConfig":
    return ObjectiveConfig(
        name=name,
        desirability=DesirabilitySpec(goal="maximize", low=0.0, high=1.1, scale=5.0),
    )


class ObjectiveConfig(_Section):
    name: str
    desirability: DesirabilitySpec


class MmConfig(_Section):
    enabled: bool = True
    lo_frac: float = Field(0.001, gt=0)
    hi_frac: float = Field(0.025, gt=0)
    q: float = Field(2.0, gt=0)
    p: float = Field(2.0, ge=1)
    scale: float = Field(5.0, gt=0)

    @model_validator(mode="after")
    def _ordered_fractions(self):
        if not self.lo_frac < self.hi_frac:
            raise ValueError(f"mm.lo_frac ({self.lo_frac}) must be < mm.hi_frac ({self.hi_frac})")
        return self


class SurrogateConfig(_Section):
    kind: Literal["forest", "gp"] = "forest"
    forest: ForestConfig = Field(default_factory=ForestConfig)
    gp: GpConfig = Field(default_factory=GpConfig)


class OptimizerConfig(_Section):
    budget: int = Field(5000, ge=1)
    seed: int = 0
    restarts: int = Field(1, ge=1)
    # widen the search box by this fraction of each range on both sides
    extend_bounds: float = Field(0.0, ge=0, le=1)


class DiagnosticsConfig(_Section):
    feature_pair: Tuple[int, int] = (0, 1)
    bins: int = Field(20, ge=1)
    callback_overlay: bool = True


class ScalingStudyConfig(_Section):
    k: int = Field(2, ge=1)
    n_values: List[int] = Field(default_factory=lambda: [10, 25, 50, 100, 200])
    centered: bool = True
    seed: int = 0

    @field_validator("n_values")
    @classmethod
    def _at_least_two(cls, value):
        if not value or any(n < 2 for n in value):
            raise ValueError("every n must be >= 2")
        return value


class PointAdditionConfig(_Section):
    n_added: int = Field(10, ge=1)
    mode: Literal["batch", "single-injection"] = "batch"
    seed: int = 0


class NoiseSweepConfig(_Section):
    sigmas: List[float] = Field(default_factory=lambda: [0.001, 0.003, 0.01, 0.03, 0.1, 0.3])
    reps: int = Field(50, ge=1)
    uniform_reps: int = Field(5000, ge=1)
    seed: int = 0

    @field_validator("sigmas")
    @classmethod
    def _positive(cls, value):
        if not value or any(s <= 0 for s in value):
            raise ValueError("sigmas must be > 0")
        return value


class OptLhsConfig(_Section):
    n: int = Field(213, ge=2)
    k: int = Field(2, ge=1)
    iterations: int = Field(5000, ge=0)
    centered: bool = True
    seed: int = 0


class CvConfig(_Section):
    k_folds: int = Field(10, ge=2)
    test_size: float = Field(0.3, gt=0, lt=1)
    models: List[Literal["forest", "gp"]] = Field(default_factory=lambda: ["forest", "gp"])
    seed: int = 0


class StudiesConfig(_Section):
    scaling: ScalingStudyConfig = Field(default_factory=ScalingStudyConfig)
    point_addition: PointAdditionConfig = Field(default_factory=PointAdditionConfig)
    noise_sweep: NoiseSweepConfig = Field(default_factory=NoiseSweepConfig)
    opt_lhs: OptLhsConfig = Field(default_factory=OptLhsConfig)
    cv: CvConfig = Field(default_factory=CvConfig)


class RunConfig(_Section):
    """Everything one invocation needs; serialisable as a single JSON document."""

    data: DataConfig = Field(default_factory=DataConfig)
    objectives: List[ObjectiveConfig] = Field(
        default_factory=lambda: [_max_objective("z1"), _max_objective("z2")]
    )
    mm: MmConfig = Field(default_factory=MmConfig)
    surrogate: SurrogateConfig = Field(default_factory=SurrogateConfig)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    diagnostics: DiagnosticsConfig = Field(default_factory=DiagnosticsConfig)
    studies: StudiesConfig = Field(default_factory=StudiesConfig)
    output_dir: str = Field(default_factory=lambda: DEFAULT_OUTPUT_DIR)

    @field_validator("objectives")
    @classmethod
    def _unique_objectives(cls, value):
        if not value:
            raise ValueError("at least one objective is required")
        names = [obj.name for obj in value]
        if len(set(names)) != len(names):
            raise ValueError(f"objective names must be unique: {names}")
        if "mm" in names:
            raise ValueError("'mm' is reserved for the space-filling objective")
        return value

    @property
    def objective_names(self) -> List[str]:
        return [obj.name for obj in self.objectives]

    def check_targets(self, available: Sequence[str]) -> None:
        """Raise ConfigError when an objective names a target column that does not exist."""
        missing = [name for name in self.objective_names if name not in available]
        if missing:
            raise ConfigError(f"objectives reference unknown target columns {missing}; available: {list(available)}")


def parse_value(raw: str) -> Any:
    """JSON when it parses (numbers, booleans, lists), the raw string otherwise."""
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def parse_overrides(tokens: Sequence[str]) -> Dict[str, Any]:
    """Turn ``--a.b value`` / ``--a.b=value`` tokens into {"a.b": value}."""
    overrides: Dict[str, Any] = {}
    i = 0
    while i < len(tokens):
        token = tokens[i]
        if not token.startswith("--") or len(token) == 2:
            raise ConfigError(f"unexpected argument {token!r}; overrides look like --section.key value")
        key = token[2:]
        if "=" in key:
            key, raw = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(tokens):
                raise ConfigError(f"override --{key} is missing a value")
            raw = tokens[i + 1]
            i += 2
        overrides[key] = parse_value(raw)
    return overrides


def _deep_merge(base: Dict[str, Any], update: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def apply_override(doc: Dict[str, Any], path: str, value: Any) -> None:
    """Set one leaf of a nested config document; list items are addressed by index."""
    parts = path.split(".")
    node: Any = doc
    for depth, part in enumerate(parts):
        last = depth == len(parts) - 1
        if isinstance(node, list):
            if not part.isdigit() or int(part) >= len(node):
                raise ConfigError(f"unknown config path {path!r} (bad list index {part!r})")
            if last:
                node[int(part)] = value
            else:
                node = node[int(part)]
        elif isinstance(node, dict):
            if part not in node:
                raise ConfigError(f"unknown config path {path!r}")
            if last:
                node[part] = value
            else:
                node = node[part]
        else:
            raise ConfigError(f"unknown config path {path!r}")


def build_config(document: Optional[Dict[str, Any]] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    doc = _deep_merge(RunConfig().model_dump(mode="json"), document or {})
    for path, value in (overrides or {}).items():
        apply_override(doc, path, value)
    try:
        return RunConfig.model_validate(doc)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
        )
        raise ConfigError(f"invalid configuration: {problems}") from e


def load_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Read a JSON run document (optional) and apply dot-path overrides on top."""
    document: Dict[str, Any] = {}
    if path:
        try:
            with open(path, "r", encoding="utf-8") as f:
                document = json.load(f)
        except FileNotFoundError as e:
            raise ConfigError(f"config file not found: {path}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}:{e.lineno}: invalid JSON ({e.msg})") from e
        if not isinstance(document, dict):
            raise ConfigError(f"{path}: the config must be a JSON object")
        logger.debug(f"📄 Loaded config from {path}")
    return build_config(document, overrides)
