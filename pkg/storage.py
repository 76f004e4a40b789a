import json
import os
import re
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel

from designs import make_synthetic_dataset, minmax_rescale, normalize
from errors import ConfigError, CsvParseError, InvalidDataError
from models import Bounds, PlotArtifact, SamplingPlan, SyntheticDataset


def read_numeric_csv(path: str) -> pd.DataFrame:
    """Header + numeric rows, comma separated, UTF-8.

    Errors carry the 1-based line number of the file (the header is line 1).
    """
    try:
        frame = pd.read_csv(path, sep=",", encoding="utf-8", skipinitialspace=True, float_precision="round_trip")
    except FileNotFoundError as e:
        raise CsvParseError("file not found", path=path) from e
    except pd.errors.EmptyDataError as e:
        raise CsvParseError("file is empty", path=path, line=1) from e
    except pd.errors.ParserError as e:
        found = re.search(r"line (\d+)", str(e))
        raise CsvParseError(f"malformed row ({e})", path=path, line=int(found.group(1)) if found else None) from e
    except UnicodeDecodeError as e:
        raise CsvParseError("file is not valid UTF-8", path=path) from e

    if frame.shape[1] == 0 or frame.shape[0] == 0:
        raise CsvParseError("no data rows", path=path, line=2)
    mangled = [c for c in frame.columns if re.search(r"\.\d+$", str(c)) and str(c).rsplit(".", 1)[0] in frame.columns]
    if mangled:
        raise CsvParseError(f"duplicate column names {mangled}", path=path, line=1)

    numeric = frame.apply(pd.to_numeric, errors="coerce")
    bad = numeric.isna() | ~np.isfinite(numeric.to_numpy(dtype=float))
    if bad.to_numpy().any():
        row, col = np.argwhere(bad.to_numpy())[0]
        raise CsvParseError(
            f"column {frame.columns[col]!r} has a missing or non-numeric value {frame.iat[row, col]!r}",
            path=path,
            line=int(row) + 2,
        )
    numeric.columns = [str(c).strip() for c in numeric.columns]
    return numeric.astype(float)


def load_plan(path: str, bounds: Optional[Bounds] = None) -> Tuple[SamplingPlan, Bounds]:
    """Read a features CSV and normalize it (column min/max unless bounds are given)."""
    raw = read_numeric_csv(path)
    bounds = bounds or Bounds.from_data(raw.to_numpy())
    plan = normalize(raw.to_numpy(), bounds, tuple(raw.columns))
    logger.info(f"📥 Loaded {plan.n} points x {plan.k} features from {path}")
    return plan, bounds


def load_dataset(features_csv: str, targets_csv: str) -> SyntheticDataset:
    plan, _ = load_plan(features_csv)
    targets = read_numeric_csv(targets_csv)
    if targets.shape[0] != plan.n:
        raise InvalidDataError(f"{features_csv} has {plan.n} rows but {targets_csv} has {targets.shape[0]}")
    # desirability bounds are set on the unit scale
    return SyntheticDataset(plan, minmax_rescale(targets.to_numpy()), tuple(targets.columns))


def dataset_from_config(data_cfg) -> SyntheticDataset:
    """CSV data when configured, otherwise the clustered synthetic stand-in."""
    if data_cfg.features_csv and data_cfg.targets_csv:
        return load_dataset(data_cfg.features_csv, data_cfg.targets_csv)
    if data_cfg.features_csv:
        raise ConfigError("data.targets_csv is required with data.features_csv for this command")
    syn = data_cfg.synthetic
    return make_synthetic_dataset(syn.n, syn.k, syn.n_clusters, syn.spread, syn.lane_fraction, syn.noise, syn.seed)


def plan_from_config(data_cfg) -> SamplingPlan:
    if data_cfg.features_csv:
        return load_plan(data_cfg.features_csv)[0]
    return dataset_from_config(data_cfg).X


class ArtifactStore:
    """
    Writes the artifacts of one command into the output directory.
    File names follow <command>_<figure-id>.<ext>.
    """

    def __init__(self, output_dir: Union[str, Path], command: str):
        self.root = Path(output_dir)
        self.command = command
        self.written: List[Path] = []
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ConfigError(f"cannot create output directory {self.root}: {e}") from e
        if not os.access(self.root, os.W_OK):
            raise ConfigError(f"output directory {self.root} is not writable")

    def get_path(self, figure_id: str, ext: str) -> Path:
        return self.root / f"{self.command}_{figure_id}.{ext}"

    def _write(self, figure_id: str, ext: str, text: str) -> Path:
        path = self.get_path(figure_id, ext)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        self.written.append(path)
        logger.debug(f"💾 Wrote {path}")
        return path

    def add_table(self, figure_id: str, frame: pd.DataFrame) -> Path:
        return self._write(figure_id, "csv", frame.to_csv(index=False, lineterminator="\n"))

    def add_json(self, figure_id: str, payload: Union[BaseModel, Dict[str, Any]]) -> Path:
        if isinstance(payload, BaseModel):
            text = payload.model_dump_json(indent=2)
        else:
            text = json.dumps(payload, indent=2)
        return self._write(figure_id, "json", text + "\n")

    def add_svg(self, figure_id: str, svg: str) -> Path:
        return self._write(figure_id, "svg", svg)

    def add_text(self, figure_id: str, text: str) -> Path:
        return self._write(figure_id, "txt", text)

    def add_plot(self, artifact: PlotArtifact) -> Tuple[Path, Path]:
        """SVG plus the sibling CSV it was drawn from."""
        return self.add_svg(artifact.name, artifact.svg), self.add_table(artifact.name, artifact.data)

    def get_artifacts(self, ext: Optional[str] = None) -> List[Path]:
        return [p for p in self.written if ext is None or p.suffix == f".{ext}"]


def write_dataset(dataset: SyntheticDataset, store: ArtifactStore) -> Tuple[Path, Path]:
    """Features and targets as two CSVs that load_dataset reads back."""
    features = store.add_table("features", dataset.X.as_frame())
    targets = store.add_table("targets", dataset.targets_frame())
    return features, targets
