"""Morris-Mitchell space-filling criteria.

Phi_q  = (sum_i J_i d_i^-q)^(1/q)
Phi*_q = (sum_i J_i d_i^-q / M)^(1/q),  M = n(n-1)/2

Smaller is better for both. Phi* divides by the pair count so designs of
different sizes stay comparable, and it can be updated for one added point by
computing only the n new distances.
"""

from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd
from loguru import logger
from scipy.spatial.distance import cdist, pdist, squareform

from designs import SeedLike, generate_lhs
from errors import DuplicatePointError, InvalidArgumentError
from models import DUPLICATE_TOL, DistanceProfile, MmResult, SamplingPlan

# Distances within this relative tolerance of a group's smallest member share one (d, J) entry.
GROUP_RTOL = 1e-9

PlanLike = Union[SamplingPlan, np.ndarray]


def _points(X: PlanLike) -> np.ndarray:
    points = X.points if isinstance(X, SamplingPlan) else np.asarray(X, dtype=float)
    if points.ndim != 2:
        raise InvalidArgumentError(f"expected an (n, k) matrix, got shape {points.shape}")
    return points


def group_distances(values: np.ndarray, weights: Optional[np.ndarray] = None):
    """Sort and merge near-equal distances; returns (d, J)."""
    values = np.asarray(values, dtype=float)
    weights = np.ones(values.shape, dtype=np.int64) if weights is None else np.asarray(weights, dtype=np.int64)
    order = np.argsort(values, kind="stable")
    v = values[order]
    w = weights[order]

    # consecutive gaps give the candidate groups; only chains that drift past
    # the tolerance of their first member need a sequential split
    breaks = np.flatnonzero(v[1:] > v[:-1] * (1 + GROUP_RTOL)) + 1
    chain_starts = np.concatenate([[0], breaks])
    chain_ends = np.concatenate([breaks, [v.size]])
    starts = list(chain_starts)
    drifting = np.flatnonzero(v[chain_ends - 1] > v[chain_starts] * (1 + GROUP_RTOL))
    for c in drifting:
        anchor = v[chain_starts[c]]
        for i in range(chain_starts[c] + 1, chain_ends[c]):
            if v[i] > anchor * (1 + GROUP_RTOL):
                starts.append(i)
                anchor = v[i]
    starts = np.unique(np.asarray(starts, dtype=np.int64))
    return v[starts], np.add.reduceat(w, starts)


def _duplicate_pairs(dists: np.ndarray, n: int):
    hits = np.flatnonzero(dists <= DUPLICATE_TOL)
    if hits.size == 0:
        return []
    rows, cols = np.triu_indices(n, 1)
    return list(zip(rows[hits], cols[hits]))


def pairwise_distances(X: PlanLike, p: float = 2.0, q: float = 2.0) -> DistanceProfile:
    """Distinct pairwise p-norm distances with multiplicities.

    Raises DuplicatePointError when two rows are closer than the duplicate tolerance.
    """
    points = _points(X)
    n = points.shape[0]
    if n < 2:
        raise InvalidArgumentError(f"distance-based criteria need n >= 2 points, got {n}")
    dists = pdist(points, "minkowski", p=p)
    pairs = _duplicate_pairs(dists, n)
    if pairs:
        raise DuplicatePointError(pairs)
    d, J = group_distances(dists)
    return DistanceProfile(d, J, n * (n - 1) // 2, q, p)


def phi_quality(profile: DistanceProfile) -> float:
    return profile.phi_sum ** (1.0 / profile.q)


def intensive_quality(profile: DistanceProfile) -> float:
    return (profile.phi_sum / profile.M) ** (1.0 / profile.q)


def mmphi(X: PlanLike, q: float = 2.0, p: float = 2.0, strict: bool = True) -> MmResult:
    try:
        profile = pairwise_distances(X, p, q)
    except DuplicatePointError:
        if strict:
            raise
        return MmResult(np.inf, None)
    return MmResult(phi_quality(profile), profile)


def mmphi_intensive(X: PlanLike, q: float = 2.0, p: float = 2.0, strict: bool = True) -> MmResult:
    try:
        profile = pairwise_distances(X, p, q)
    except DuplicatePointError:
        if strict:
            raise
        return MmResult(np.inf, None)
    return MmResult(intensive_quality(profile), profile)


def _check_profile(points: np.ndarray, profile: DistanceProfile) -> None:
    n = points.shape[0]
    if profile.M != n * (n - 1) // 2:
        raise InvalidArgumentError(f"profile has M={profile.M} pairs but the plan has {n} points")


def mmphi_intensive_update(X: PlanLike, new_point, profile: DistanceProfile, strict: bool = True) -> MmResult:
    """Phi* of X plus one point, computing only the n distances to the new point."""
    points = _points(X)
    _check_profile(points, profile)
    x = np.asarray(new_point, dtype=float).ravel()
    if x.size != points.shape[1]:
        raise InvalidArgumentError(f"new point has {x.size} coordinates, the plan has {points.shape[1]}")
    new = cdist(x[None, :], points, "minkowski", p=profile.p)[0]
    dup = np.flatnonzero(new <= DUPLICATE_TOL)
    if dup.size:
        if strict:
            raise DuplicatePointError([(i, points.shape[0]) for i in dup])
        return MmResult(np.inf, None)
    d, J = group_distances(np.concatenate([profile.d, new]),
                           np.concatenate([profile.J, np.ones(new.size, dtype=np.int64)]))
    updated = DistanceProfile(d, J, profile.M + points.shape[0], profile.q, profile.p)
    return MmResult(intensive_quality(updated), updated)


def mm_improvement(X: PlanLike, x, profile: Optional[DistanceProfile] = None,
                   q: float = 2.0, p: float = 2.0, strict: bool = True) -> float:
    """Phi*(X) - Phi*(X + x). Positive means x fills space; -inf for a lenient duplicate."""
    if profile is None:
        profile = pairwise_distances(X, p, q)
    result = mmphi_intensive_update(X, x, profile, strict=strict)
    if not np.isfinite(result.quality):
        return -np.inf
    return intensive_quality(profile) - result.quality


def mm_improvement_batch(profile: DistanceProfile, X: PlanLike, candidates) -> np.ndarray:
    """Vectorised mm_improvement of many candidates against one base profile.

    Values agree with mm_improvement up to the grouping tolerance. Candidates that
    duplicate a design point get -inf.
    """
    points = _points(X)
    _check_profile(points, profile)
    C = np.atleast_2d(np.asarray(candidates, dtype=float))
    if C.shape[1] != points.shape[1]:
        raise InvalidArgumentError(f"candidates have {C.shape[1]} coordinates, the plan has {points.shape[1]}")
    if C.shape[0] == 0:
        return np.empty(0)
    new = cdist(C, points, "minkowski", p=profile.p)
    dup = np.any(new <= DUPLICATE_TOL, axis=1)
    with np.errstate(divide="ignore"):
        added = np.sum(new ** (-profile.q), axis=1)
    m_new = profile.M + points.shape[0]
    updated = ((profile.phi_sum + added) / m_new) ** (1.0 / profile.q)
    improvement = intensive_quality(profile) - updated
    improvement[dup] = -np.inf
    return improvement


def leave_one_out_improvement(X: PlanLike, q: float = 2.0, p: float = 2.0) -> np.ndarray:
    """Phi*(X without row i) - Phi*(X) for every row: what each point contributes to coverage."""
    points = _points(X)
    n = points.shape[0]
    if n < 3:
        raise InvalidArgumentError("leave-one-out improvement needs n >= 3")
    dists = pdist(points, "minkowski", p=p)
    pairs = _duplicate_pairs(dists, n)
    if pairs:
        raise DuplicatePointError(pairs)
    inv = squareform(dists ** (-q))
    total = inv.sum() / 2.0
    m_full = n * (n - 1) / 2.0
    m_less = (n - 1) * (n - 2) / 2.0
    without = ((total - inv.sum(axis=1)) / m_less) ** (1.0 / q)
    return without - (total / m_full) ** (1.0 / q)


# === Studies ===

def mmphi_vs_n_study(k: int = 2, n_values: Sequence[int] = (10, 25, 50, 100, 200), q: float = 2.0,
                     p: float = 2.0, seed: SeedLike = None, centered: bool = True) -> pd.DataFrame:
    """Both criteria for one LHS per n; columns n, phi, phi_intensive, M."""
    if any(n < 2 for n in n_values):
        raise InvalidArgumentError(f"every n must be >= 2, got {list(n_values)}")
    seeds = np.random.SeedSequence(seed).spawn(len(n_values))
    rows = []
    for n, child in zip(n_values, seeds):
        profile = pairwise_distances(generate_lhs(n, k, child, centered), p, q)
        rows.append({
            "n": int(n),
            "phi": phi_quality(profile),
            "phi_intensive": intensive_quality(profile),
            "M": profile.M,
        })
        logger.debug(f"📏 n={n}: phi={rows[-1]['phi']:.6g} phi*={rows[-1]['phi_intensive']:.6g}")
    return pd.DataFrame(rows, columns=["n", "phi", "phi_intensive", "M"])


def point_addition_study(X: PlanLike, n_added: int = 10, mode: str = "batch", q: float = 2.0,
                         p: float = 2.0, seed: SeedLike = None) -> pd.DataFrame:
    """Add uniform random points to X.

    batch: points accumulate; columns step, phi_intensive with step 0 the base design.
    single-injection: each point is added to the original X on its own;
    columns step, phi_intensive, improvement.
    """
    if n_added < 1:
        raise InvalidArgumentError("n_added must be >= 1")
    if mode not in ("batch", "single-injection"):
        raise InvalidArgumentError(f"unknown mode {mode!r}; use 'batch' or 'single-injection'")
    points = _points(X)
    rng = np.random.default_rng(seed)
    candidates = rng.random((n_added, points.shape[1]))
    base = pairwise_distances(points, p, q)
    base_quality = intensive_quality(base)

    if mode == "batch":
        rows = [{"step": 0, "phi_intensive": base_quality}]
        profile, current = base, points
        for step, x in enumerate(candidates, start=1):
            result = mmphi_intensive_update(current, x, profile, strict=False)
            if result.profile is None:
                logger.warning(f"⚠️ Added point {step} duplicates a design point; skipped")
                continue
            profile = result.profile
            current = np.vstack([current, x])
            rows.append({"step": step, "phi_intensive": result.quality})
        frame = pd.DataFrame(rows, columns=["step", "phi_intensive"])
    else:
        rows = []
        for step, x in enumerate(candidates, start=1):
            result = mmphi_intensive_update(points, x, base, strict=False)
            rows.append({"step": step, "phi_intensive": result.quality,
                         "improvement": base_quality - result.quality})
        frame = pd.DataFrame(rows, columns=["step", "phi_intensive", "improvement"])
    frame.attrs["base_phi_intensive"] = base_quality
    return frame


def noise_sigma_sweep(X: PlanLike, sigmas: Sequence[float], reps: int = 50, q: float = 2.0,
                      p: float = 2.0, seed: SeedLike = None, uniform_reps: int = 5000) -> pd.DataFrame:
    """MM improvement of noisy copies of existing points, per noise level.

    The same rows and noise directions are reused for every sigma, so rows of the
    result differ only in the noise scale. The mean improvement of `uniform_reps`
    uniform random candidates, drawn from a separate stream, is stored in
    attrs["uniform_mean_improvement"].
    """
    if not len(sigmas) or any(s <= 0 for s in sigmas):
        raise InvalidArgumentError("sigmas must be a non-empty list of positive values")
    if reps < 1 or uniform_reps < 1:
        raise InvalidArgumentError("reps and uniform_reps must be >= 1")
    points = _points(X)
    n, k = points.shape
    rng = np.random.default_rng(seed)
    reference_rng = rng.spawn(1)[0]
    chosen = rng.integers(n, size=reps)
    directions = rng.standard_normal((reps, k))
    uniform = reference_rng.random((uniform_reps, k))
    profile = pairwise_distances(points, p, q)

    rows = []
    for sigma in sigmas:
        candidates = np.clip(points[chosen] + sigma * directions, 0.0, 1.0)
        imp = mm_improvement_batch(profile, points, candidates)
        finite = imp[np.isfinite(imp)]
        rows.append({
            "sigma": float(sigma),
            "mean_improvement": float(finite.mean()) if finite.size else -np.inf,
            "std_improvement": float(finite.std()) if finite.size else np.nan,
            "n_duplicates": int(imp.size - finite.size),
        })
    frame = pd.DataFrame(rows, columns=["sigma", "mean_improvement", "std_improvement", "n_duplicates"])
    reference = mm_improvement_batch(profile, points, uniform)
    frame.attrs["uniform_mean_improvement"] = float(np.mean(reference[np.isfinite(reference)]))
    frame.attrs["base_phi_intensive"] = intensive_quality(profile)
    return frame
