"""Sampling plans: Latin hypercubes, their maximin optimization, normalization
and a clustered stand-in for unplanned industrial data."""

from typing import Callable, Dict, Optional, Sequence, Union

import numpy as np
from loguru import logger
from scipy.spatial.distance import cdist, pdist, squareform
from scipy.stats import qmc, truncnorm

from errors import InvalidArgumentError, InvalidDataError
from models import Bounds, SamplingPlan, SyntheticDataset

SeedLike = Union[None, int, np.random.SeedSequence, np.random.Generator]


def latin_hypercube(n: int, k: int, rng: np.random.Generator, centered: bool = True) -> np.ndarray:
    """Raw n x k LHS matrix, one point per stratum and column; stratum midpoints when centered."""
    return qmc.LatinHypercube(k, scramble=not centered, seed=rng).random(n)


def generate_lhs(n: int, k: int, seed: SeedLike = None, centered: bool = True,
                 feature_names: Optional[Sequence[str]] = None) -> SamplingPlan:
    if n < 2 or k < 1:
        raise InvalidArgumentError(f"an LHS needs n >= 2 and k >= 1, got n={n}, k={k}")
    rng = np.random.default_rng(seed)
    return SamplingPlan(latin_hypercube(n, k, rng, centered), tuple(feature_names or ()))


def optimize_lhs(n: int, k: int, q: float = 2.0, p: float = 2.0, iterations: int = 1000,
                 seed: SeedLike = None, centered: bool = True,
                 feature_names: Optional[Sequence[str]] = None) -> SamplingPlan:
    """Column-swap hill climbing on the Morris-Mitchell sum.

    Starts from generate_lhs(n, k, seed, centered). Each step swaps two entries of a
    random column and keeps the swap only when sum(d^-q) strictly drops, so the LHS
    property holds after every step and the intensive criterion never increases.
    """
    if n < 2 or k < 1:
        raise InvalidArgumentError(f"an LHS needs n >= 2 and k >= 1, got n={n}, k={k}")
    if iterations < 0:
        raise InvalidArgumentError("iterations must be >= 0")
    rng = np.random.default_rng(seed)
    points = latin_hypercube(n, k, rng, centered)
    if n == 2:
        return SamplingPlan(points, tuple(feature_names or ()))

    dist = squareform(pdist(points, "minkowski", p=p))
    np.fill_diagonal(dist, np.inf)
    inv = dist ** (-q)
    total = inv.sum() / 2.0
    start = total
    accepted = 0

    for _ in range(iterations):
        col = rng.integers(k)
        i, j = rng.choice(n, size=2, replace=False)
        points[[i, j], col] = points[[j, i], col]

        rows = cdist(points[[i, j]], points, "minkowski", p=p)
        rows[0, i] = np.inf
        rows[1, j] = np.inf
        new = rows ** (-q)
        old_part = inv[i].sum() + inv[j].sum() - inv[i, j]
        new_part = new[0].sum() + new[1].sum() - new[0, j]

        if new_part < old_part:
            inv[i, :] = new[0]
            inv[:, i] = new[0]
            inv[j, :] = new[1]
            inv[:, j] = new[1]
            total += new_part - old_part
            accepted += 1
        else:
            points[[i, j], col] = points[[j, i], col]

    pairs = n * (n - 1) / 2.0
    logger.debug(
        f"🔧 optimize_lhs n={n} k={k}: phi* {(start / pairs) ** (1 / q):.6g} -> "
        f"{(total / pairs) ** (1 / q):.6g} ({accepted}/{iterations} swaps kept)"
    )
    return SamplingPlan(points, tuple(feature_names or ()))


def normalize(raw, bounds: Bounds, feature_names: Optional[Sequence[str]] = None) -> SamplingPlan:
    """Map raw rows into the unit cube, x' = (x - low) / (high - low), clipped."""
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 2 or raw.shape[1] != bounds.k:
        raise InvalidArgumentError(f"expected an (n, {bounds.k}) matrix, got shape {raw.shape}")
    if not np.all(np.isfinite(raw)):
        bad = sorted({int(r) for r in np.argwhere(~np.isfinite(raw))[:, 0]})
        raise InvalidDataError(f"non-finite values in rows {bad[:10]}")
    scaled = np.clip((raw - bounds.low) / bounds.width, 0.0, 1.0)
    return SamplingPlan(scaled, tuple(feature_names or ()))


def denormalize(plan: Union[SamplingPlan, np.ndarray], bounds: Bounds) -> np.ndarray:
    points = plan.points if isinstance(plan, SamplingPlan) else np.asarray(plan, dtype=float)
    return bounds.low + points * bounds.width


def generate_clustered_design(n: int, k: int, n_clusters: int = 5, spread: float = 0.03,
                              seed: SeedLike = None, lane_fraction: float = 0.2,
                              feature_names: Optional[Sequence[str]] = None) -> SamplingPlan:
    """Clusters plus axis-aligned "lanes", the typical look of data that was never planned.

    Cluster points follow normals around random centres, truncated to [0, 1] per
    coordinate. A `lane_fraction` share of the points sits on segments of length
    min(0.5, 10 * spread) through a centre, jittered by spread / 4 across the lane.
    """
    if n < 2 or k < 1 or n_clusters < 1:
        raise InvalidArgumentError(f"need n >= 2, k >= 1, n_clusters >= 1; got {n}, {k}, {n_clusters}")
    if not 0 < spread < 0.5:
        raise InvalidArgumentError(f"spread must lie in (0, 0.5), got {spread}")
    if not 0 <= lane_fraction <= 1:
        raise InvalidArgumentError(f"lane_fraction must lie in [0, 1], got {lane_fraction}")

    rng = np.random.default_rng(seed)
    centers = rng.uniform(0.1, 0.9, size=(n_clusters, k))
    n_lane = int(round(lane_fraction * n))
    n_blob = n - n_lane

    loc = centers[rng.integers(n_clusters, size=n_blob)]
    blob = np.empty((0, k))
    if n_blob:
        a = (0.0 - loc) / spread
        b = (1.0 - loc) / spread
        blob = truncnorm.rvs(a, b, loc=loc, scale=spread, size=loc.shape, random_state=rng)

    length = min(0.5, 10.0 * spread)
    lane_loc = centers[rng.integers(n_clusters, size=n_lane)]
    axis = rng.integers(k, size=n_lane)
    offset = rng.uniform(-length / 2, length / 2, size=n_lane)
    lanes = lane_loc + rng.normal(0.0, spread / 4, size=lane_loc.shape)
    lanes[np.arange(n_lane), axis] = lane_loc[np.arange(n_lane), axis] + offset

    points = np.clip(np.vstack([blob, lanes]), 0.0, 1.0)
    points = points[rng.permutation(n)]
    return SamplingPlan(points, tuple(feature_names or ()))


# Fixed test functions with conflicting optima near 0.3 and 0.7 in every coordinate.
def target_z1(x: np.ndarray) -> np.ndarray:
    k = x.shape[1]
    return np.exp(-6.0 * np.sum((x - 0.3) ** 2, axis=1) / k) + 0.3 * np.mean(np.sin(3 * np.pi * x), axis=1)


def target_z2(x: np.ndarray) -> np.ndarray:
    k = x.shape[1]
    return np.exp(-6.0 * np.sum((x - 0.7) ** 2, axis=1) / k) + 0.3 * np.mean(np.cos(2 * np.pi * x), axis=1)


SYNTHETIC_TARGETS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "z1": target_z1,
    "z2": target_z2,
}


def minmax_rescale(values: np.ndarray) -> np.ndarray:
    """Column-wise min-max to [0, 1]; constant columns become zeros."""
    values = np.asarray(values, dtype=float)
    low = values.min(axis=0)
    span = values.max(axis=0) - low
    out = np.zeros_like(values)
    np.divide(values - low, span, out=out, where=span > 0)
    return out


def generate_synthetic_targets(X: SamplingPlan, seed: SeedLike = None, noise: float = 0.0) -> SyntheticDataset:
    if noise < 0:
        raise InvalidArgumentError("noise must be >= 0")
    Z = np.column_stack([fn(X.points) for fn in SYNTHETIC_TARGETS.values()])
    if noise > 0:
        rng = np.random.default_rng(seed)
        Z = Z + rng.normal(0.0, noise, size=Z.shape)
    return SyntheticDataset(X, minmax_rescale(Z), tuple(SYNTHETIC_TARGETS))


def make_synthetic_dataset(n: int = 213, k: int = 2, n_clusters: int = 5, spread: float = 0.03,
                           lane_fraction: float = 0.2, noise: float = 0.0,
                           seed: SeedLike = None) -> SyntheticDataset:
    """Clustered design plus synthetic targets, both driven by one seed."""
    design_seed, target_seed = np.random.SeedSequence(seed).spawn(2)
    X = generate_clustered_design(n, k, n_clusters, spread, design_seed, lane_fraction)
    dataset = generate_synthetic_targets(X, target_seed, noise)
    logger.info(f"🧪 Synthetic dataset: n={n}, k={k}, {n_clusters} clusters, spread={spread}")
    return dataset
