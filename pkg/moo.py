"""Desirability-based infill search over surrogate predictions, optionally with
the Morris-Mitchell improvement as an extra objective."""

from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from config import RunConfig
from desirability import OverallDesirability
from errors import InvalidArgumentError
from models import (
    Bounds,
    DesirabilitySpec,
    DistanceProfile,
    InfillSuggestion,
    Marker,
    ParetoFront,
    PlotArtifact,
    SamplingPlan,
    SyntheticDataset,
    TraceEntry,
    default_names,
)
from optimizer import DifferentialEvolution
from plotting import pareto_figure
from spacefill import intensive_quality, leave_one_out_improvement, mm_improvement_batch, pairwise_distances
from surrogate import TrainedSurrogate, fit_ground_truth, fit_gp

MM_NAME = "mm"


def mm_desirability_bounds(phi_base: float, lo_frac: float = 0.001, hi_frac: float = 0.025) -> Tuple[float, float]:
    """(A, B) of the improvement objective: a 0.1 % to 2.5 % relative reduction of phi_base."""
    if not np.isfinite(phi_base) or phi_base <= 0:
        raise InvalidArgumentError(f"phi_base must be a positive finite number, got {phi_base}")
    if not 0 < lo_frac < hi_frac:
        raise InvalidArgumentError(f"need 0 < lo_frac < hi_frac, got {lo_frac}, {hi_frac}")
    return lo_frac * phi_base, hi_frac * phi_base


@dataclass(frozen=True)
class MmContext:
    plan: SamplingPlan
    profile: DistanceProfile
    phi_base: float

    @classmethod
    def from_plan(cls, plan: SamplingPlan, q: float = 2.0, p: float = 2.0) -> "MmContext":
        profile = pairwise_distances(plan, p, q)
        return cls(plan, profile, intensive_quality(profile))


class ObjectiveAssembly:
    """Surrogate objectives (plus MM improvement) turned into one overall desirability."""

    def __init__(self, surrogates: Sequence[TrainedSurrogate], specs: Sequence[DesirabilitySpec], bounds: Bounds,
                 mm_context: Optional[MmContext] = None, objective_names: Optional[Sequence[str]] = None):
        self.surrogates = list(surrogates)
        self.bounds = bounds
        self.mm_context = mm_context
        if not self.surrogates:
            raise InvalidArgumentError("at least one surrogate is required")
        for sur in self.surrogates:
            if sur.n_features != bounds.k:
                raise InvalidArgumentError(f"surrogate expects {sur.n_features} inputs, bounds have {bounds.k}")
        p = sum(sur.n_outputs for sur in self.surrogates)
        expected = p + (1 if self.mm_enabled else 0)
        if len(specs) != expected:
            raise InvalidArgumentError(f"{len(specs)} desirability specs for {expected} objectives")
        if mm_context is not None:
            if mm_context.plan.k != bounds.k:
                raise InvalidArgumentError("MM base plan dimension differs from the bounds")
            if not np.isclose(mm_context.phi_base, intensive_quality(mm_context.profile), rtol=1e-12, atol=0.0):
                raise InvalidArgumentError("mm_context.phi_base does not match its profile")
        self.desirability = OverallDesirability(specs)

        names = list(objective_names) if objective_names else [n for s in self.surrogates for n in s.target_names]
        if len(names) != p:
            raise InvalidArgumentError(f"{len(names)} objective names for {p} surrogate outputs")
        self.objective_names = names + ([MM_NAME] if self.mm_enabled else [])

    @property
    def mm_enabled(self) -> bool:
        return self.mm_context is not None

    @property
    def specs(self) -> List[DesirabilitySpec]:
        return self.desirability.specs

    def objectives(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        columns = [sur.predict(X) for sur in self.surrogates]
        if self.mm_enabled:
            ctx = self.mm_context
            columns.append(mm_improvement_batch(ctx.profile, ctx.plan, X).reshape(-1, 1))
        return np.hstack(columns)

    def evaluate_batch(self, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(overall desirability (m,), objective matrix (m, R))."""
        F = self.objectives(X)
        _, D = self.desirability.evaluate(F)
        return D, F


def evaluate_objective(assembly: ObjectiveAssembly, x) -> Tuple[np.ndarray, float]:
    x = np.asarray(x, dtype=float).ravel()
    if x.size != assembly.bounds.k:
        raise InvalidArgumentError(f"x has {x.size} coordinates, expected {assembly.bounds.k}")
    if not assembly.bounds.contains(x, atol=1e-12):
        raise InvalidArgumentError(f"x={x.tolist()} lies outside the search bounds")
    D, F = assembly.evaluate_batch(x[None, :])
    return F[0], float(D[0])


def optimize(assembly: ObjectiveAssembly, budget: int = 5000, seed: Optional[int] = None, restarts: int = 1,
             pop_size: Optional[int] = None, feature_names: Optional[Sequence[str]] = None) -> InfillSuggestion:
    """Maximise the overall desirability with differential evolution."""
    de = DifferentialEvolution(assembly.evaluate_batch, assembly.bounds, budget, pop_size=pop_size, seed=seed,
                               restarts=restarts)
    result = de.run()
    y_best, d_best = evaluate_objective(assembly, result.x_best)
    flat = d_best == 0.0
    if flat:
        logger.warning(f"⚠️ Desirability is 0 at every evaluated point ({result.evaluations} evaluations); "
                       f"check the desirability bounds")
    trace = [TraceEntry(iteration=it, desirability=score, objectives=[float(v) for v in payload])
             for it, score, payload in result.trace]
    logger.info(f"🎯 Best desirability ({', '.join(assembly.objective_names)}): {d_best:.4f}")
    return InfillSuggestion(
        objective_names=assembly.objective_names,
        feature_names=list(feature_names or default_names("x", assembly.bounds.k)),
        x_best=[float(v) for v in result.x_best],
        y_best=[float(v) for v in y_best],
        desirability_best=d_best,
        trace=trace,
        evaluations=result.evaluations,
        flat_landscape=flat,
    )


def pareto_front(Y, orientation: Sequence[str]) -> ParetoFront:
    """Non-dominated rows of Y; orientation is "maximize"/"minimize" (or "max"/"min") per column."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    m, R = Y.shape
    if m < 1:
        raise InvalidArgumentError("pareto_front needs at least one point")
    aliases = {"max": "maximize", "min": "minimize"}
    orient = tuple(aliases.get(o, o) for o in orientation)
    if len(orient) != R or any(o not in ("maximize", "minimize") for o in orient):
        raise InvalidArgumentError(f"need one of maximize/minimize per column ({R}), got {list(orientation)}")
    # everything minimised from here on
    S = Y * np.where(np.array(orient) == "maximize", -1.0, 1.0)
    dominated = np.zeros(m, dtype=bool)
    for i in range(m):
        dominated[i] = np.any(np.all(S <= S[i], axis=1) & np.any(S < S[i], axis=1))
    return ParetoFront(np.flatnonzero(~dominated), orient)


def pareto_view(F: np.ndarray, specs: Sequence[DesirabilitySpec]) -> Tuple[np.ndarray, List[str]]:
    """Objective values as used for dominance: target goals become |f - t0|, minimised."""
    F = np.atleast_2d(np.asarray(F, dtype=float)).copy()
    orientation = []
    for r, spec in enumerate(specs):
        if spec.goal == "target":
            F[:, r] = np.abs(F[:, r] - spec.target)
            orientation.append("minimize")
        else:
            orientation.append(spec.goal)
    return F, orientation


@dataclass
class CaseStudyResult:
    without_mm: InfillSuggestion
    with_mm: Optional[InfillSuggestion]
    phi_base: Optional[float]
    mm_bounds: Optional[Tuple[float, float]]
    # MM improvement each suggestion brings to the existing design
    mm_improvement: Dict[str, float] = field(default_factory=dict)
    figures: List[PlotArtifact] = field(default_factory=list)

    @property
    def markers(self) -> List[Marker]:
        found = [Marker("without MM", np.array(self.without_mm.x_best), "without-mm")]
        if self.with_mm is not None:
            found.append(Marker("with MM", np.array(self.with_mm.x_best), "with-mm"))
        return found


def fit_simulators(dataset: SyntheticDataset, config: RunConfig) -> TrainedSurrogate:
    """Ground-truth simulator for the configured objective columns."""
    names = config.objective_names
    Z = dataset.columns(names)
    if config.surrogate.kind == "gp":
        return fit_gp(dataset.X, Z, config.surrogate.gp, target_names=names)
    return fit_ground_truth(dataset.X, Z, config.surrogate.forest, target_names=names)


def _trace_points(suggestion: InfillSuggestion, cols: Tuple[int, int]) -> np.ndarray:
    if not suggestion.trace:
        return np.empty((0, 2))
    pts = np.array([entry.objectives for entry in suggestion.trace], dtype=float)[:, list(cols)]
    return pts[np.all(np.isfinite(pts), axis=1)]


def run_case_study(dataset: SyntheticDataset, config: RunConfig, render: bool = True) -> CaseStudyResult:
    """Suggest an infill point without MM, then with MM, using the same seed and simulators."""
    config.check_targets(dataset.target_names)
    names = config.objective_names
    if len(names) < 2:
        raise InvalidArgumentError("the case study needs at least two objectives")
    plan = dataset.X
    simulator = fit_simulators(dataset, config)
    bounds = Bounds.unit(plan.k)
    if config.optimizer.extend_bounds > 0:
        bounds = bounds.extended(config.optimizer.extend_bounds)
    specs = [obj.desirability for obj in config.objectives]
    opt = config.optimizer

    logger.info(f"🚀 Optimizing {' + '.join(names)} without MM")
    without = ObjectiveAssembly([simulator], specs, bounds, objective_names=names)
    s_without = optimize(without, opt.budget, opt.seed, opt.restarts, feature_names=plan.feature_names)

    ctx, s_with, mm_bounds, improvement = None, None, None, {}
    if config.mm.enabled:
        ctx = MmContext.from_plan(plan, config.mm.q, config.mm.p)
        improvement["without-mm"] = float(mm_improvement_batch(ctx.profile, plan, [s_without.x_best])[0])
        mm_bounds = mm_desirability_bounds(ctx.phi_base, config.mm.lo_frac, config.mm.hi_frac)
        logger.info(f"📐 mmphi_base: {ctx.phi_base!r}, mmphi_min: {mm_bounds[0]!r}, mmphi_max: {mm_bounds[1]!r}")
        mm_spec = DesirabilitySpec(goal="maximize", low=mm_bounds[0], high=mm_bounds[1], scale=config.mm.scale)
        with_mm = ObjectiveAssembly([simulator], specs + [mm_spec], bounds, mm_context=ctx, objective_names=names)
        logger.info(f"🚀 Optimizing {' + '.join(names)} + MM")
        s_with = optimize(with_mm, opt.budget, opt.seed, opt.restarts, feature_names=plan.feature_names)
        improvement["with-mm"] = float(mm_improvement_batch(ctx.profile, plan, [s_with.x_best])[0])

    result = CaseStudyResult(s_without, s_with, ctx.phi_base if ctx else None, mm_bounds, improvement)
    if render:
        result.figures = case_study_figures(dataset, config, ctx, result)
    return result


def case_study_figures(dataset: SyntheticDataset, config: RunConfig, ctx: Optional[MmContext],
                       result: CaseStudyResult) -> List[PlotArtifact]:
    """Pareto plots of the existing data with the best points on top."""
    names = config.objective_names
    specs = [obj.desirability for obj in config.objectives]
    Z = dataset.columns(names)
    overlay = config.diagnostics.callback_overlay
    figures = []

    for a, b in combinations(range(len(names)), 2):
        view, orient = pareto_view(Z[:, [a, b]], [specs[a], specs[b]])
        front = pareto_front(view, orient)
        runs = [("without_mm", result.without_mm, "without-mm")]
        if result.with_mm is not None:
            runs.append(("with_mm", result.with_mm, "with-mm"))
        for tag, suggestion, role in runs:
            figures.append(pareto_figure(
                f"pareto_{names[a]}_{names[b]}_{tag}", Z[:, [a, b]], front.indices, (names[a], names[b]),
                best=np.array(suggestion.y_best)[[a, b]], best_role=role,
                trace=_trace_points(suggestion, (a, b)) if overlay else None,
                title=f"{names[a]} vs. {names[b]} ({tag.replace('_', ' ')})",
            ))

    if result.with_mm is not None:
        loo = leave_one_out_improvement(ctx.plan, ctx.profile.q, ctx.profile.p)
        mm_col = len(names)
        for a in range(len(names)):
            pts = np.column_stack([Z[:, a], loo])
            view, orient = pareto_view(pts[:, :1], [specs[a]])
            front = pareto_front(np.column_stack([view, loo]), orient + ["maximize"])
            figures.append(pareto_figure(
                f"pareto_{names[a]}_{MM_NAME}", pts, front.indices, (names[a], MM_NAME),
                best=np.array(result.with_mm.y_best)[[a, mm_col]], best_role="with-mm",
                trace=_trace_points(result.with_mm, (a, mm_col)) if overlay else None,
            ))
    return figures
