# main.py
import argparse
import sys
from typing import Callable, Dict, List, Optional

import numpy as np
import pandas as pd
from colorama import Fore, Style, just_fix_windows_console
from loguru import logger
from scipy.stats import spearmanr

from config import LOG_LEVEL, RunConfig, load_config, parse_overrides
from designs import generate_lhs, make_synthetic_dataset, optimize_lhs
from diagnostics import ip_boxplots, ip_histograms, updated_design_scatter
from errors import DoeError
from models import DesirabilitySpec
from moo import MM_NAME, MmContext, mm_desirability_bounds, pareto_front, pareto_view, run_case_study
from plotting import (
    cv_figure,
    design_pair_figure,
    desirability_figure,
    front_comparison_figure,
    noise_sweep_figure,
    point_addition_figure,
    predictions_figure,
    scaling_figure,
    target_histogram_figure,
)
from report import render_cv_table, render_design_summary, render_suggestion, render_table
from spacefill import (
    intensive_quality,
    mmphi,
    mmphi_intensive,
    mmphi_vs_n_study,
    noise_sigma_sweep,
    pairwise_distances,
    phi_quality,
    point_addition_study,
)
from storage import ArtifactStore, dataset_from_config, load_plan, plan_from_config, read_numeric_csv, write_dataset
from surrogate import cross_validate, train_test_evaluate


def setup_logging(level: str = LOG_LEVEL) -> None:
    logger.remove()
    logger.add(sys.stderr, level=level.upper(),
               format="<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | {message}")


def header(text: str) -> None:
    print(f"{Fore.CYAN}{text}{Style.RESET_ALL}")


def done(store: ArtifactStore) -> None:
    print(f"{Fore.GREEN}✅ {len(store.written)} artifacts written to {store.root}{Style.RESET_ALL}")


# === Commands ===

def cmd_eval_design(args: argparse.Namespace, config: RunConfig) -> int:
    """Both Morris-Mitchell criteria of a design CSV."""
    if args.normalize:
        points = load_plan(args.features_csv)[0].points
    else:
        points = read_numeric_csv(args.features_csv).to_numpy()
    profile = pairwise_distances(points, args.p, args.q)
    phi, phi_star = phi_quality(profile), intensive_quality(profile)

    store = ArtifactStore(config.output_dir, "eval-design")
    header(f"📏 Design {args.features_csv}")
    text = render_design_summary(points.shape[0], points.shape[1], profile, phi, phi_star)
    print(text, end="")
    store.add_json("summary", {
        "features_csv": args.features_csv,
        "n": int(points.shape[0]),
        "k": int(points.shape[1]),
        "q": profile.q,
        "p": profile.p,
        "M": profile.M,
        "phi": phi,
        "phi_intensive": phi_star,
        "d": profile.d.tolist(),
        "J": profile.J.tolist(),
    })
    done(store)
    return 0


def cmd_suggest(args: argparse.Namespace, config: RunConfig) -> int:
    """Infill suggestion with and without the MM objective, plus diagnostics."""
    dataset = dataset_from_config(config.data)
    store = ArtifactStore(config.output_dir, "suggest")
    result = run_case_study(dataset, config)

    store.add_json("without_mm", result.without_mm)
    if result.with_mm is not None:
        store.add_json("with_mm", result.with_mm)
    for artifact in result.figures:
        store.add_plot(artifact)

    markers = result.markers
    store.add_plot(ip_boxplots(dataset.X, markers)[1])
    store.add_plot(ip_histograms(dataset.X, markers, config.diagnostics.bins)[1])
    if dataset.X.k >= 2:
        store.add_plot(updated_design_scatter(dataset.X, config.diagnostics.feature_pair, markers))
    else:
        logger.warning("⚠️ One-dimensional design: skipping the updated-design scatter")

    blocks = [render_suggestion(result.without_mm, result.mm_improvement.get("without-mm"))]
    if result.with_mm is not None:
        blocks.append(render_suggestion(result.with_mm, result.mm_improvement.get("with-mm")))
    text = "\n".join(blocks)
    header("🎯 Infill suggestion")
    print(text, end="")
    store.add_text("summary", text)
    done(store)
    return 0


def cmd_scaling(args: argparse.Namespace, config: RunConfig) -> int:
    study = config.studies.scaling
    frame = mmphi_vs_n_study(study.k, study.n_values, config.mm.q, config.mm.p, study.seed, study.centered)
    store = ArtifactStore(config.output_dir, "scaling")
    store.add_plot(scaling_figure(frame))
    header("📈 Phi and Phi* vs. n (LHS)")
    print(render_table(frame))
    done(store)
    return 0


def cmd_point_addition(args: argparse.Namespace, config: RunConfig) -> int:
    study = config.studies.point_addition
    plan = plan_from_config(config.data)
    frame = point_addition_study(plan, study.n_added, study.mode, config.mm.q, config.mm.p, study.seed)
    store = ArtifactStore(config.output_dir, "point-addition")
    store.add_plot(point_addition_figure(frame, study.mode))
    header(f"➕ Random point addition ({study.mode}), base Phi* {frame.attrs['base_phi_intensive']!r}")
    print(render_table(frame))
    done(store)
    return 0


def cmd_noise_sweep(args: argparse.Namespace, config: RunConfig) -> int:
    study = config.studies.noise_sweep
    plan = plan_from_config(config.data)
    frame = noise_sigma_sweep(plan, study.sigmas, study.reps, config.mm.q, config.mm.p, study.seed,
                              study.uniform_reps)
    store = ArtifactStore(config.output_dir, "noise-sweep")
    store.add_plot(noise_sweep_figure(frame))
    header("🔊 Effect of noise (sigma) on MM improvement")
    print(render_table(frame))
    print(f"uniform random point improvement: {frame.attrs['uniform_mean_improvement']!r}")
    if len(frame) > 2:
        rho = spearmanr(frame["sigma"], frame["mean_improvement"]).statistic
        print(f"Spearman rho(sigma, mean improvement): {rho:.4f}")
    done(store)
    return 0


def cmd_opt_lhs(args: argparse.Namespace, config: RunConfig) -> int:
    study = config.studies.opt_lhs
    q, p = config.mm.q, config.mm.p
    start = generate_lhs(study.n, study.k, study.seed, study.centered)
    best = optimize_lhs(study.n, study.k, q, p, study.iterations, study.seed, study.centered)
    frame = pd.DataFrame([
        {"design": name, "phi": mmphi(plan, q, p).quality, "phi_intensive": mmphi_intensive(plan, q, p).quality}
        for name, plan in (("start", start), ("optimized", best))
    ])
    store = ArtifactStore(config.output_dir, "opt-lhs")
    store.add_table("criteria", frame)
    store.add_table("design", best.as_frame())
    if study.k >= 2:
        store.add_plot(design_pair_figure("designs", {"start": start.points, "optimized": best.points},
                                          {"start": "random LHS", "optimized": "optimized LHS"}))
    header(f"🔧 Optimized LHS (n={study.n}, k={study.k}, {study.iterations} iterations)")
    print(render_table(frame))
    done(store)
    return 0


def cmd_fit_cv(args: argparse.Namespace, config: RunConfig) -> int:
    """Cross-validated surrogate comparison plus a hold-out predicted-vs-actual check."""
    cv = config.studies.cv
    dataset = dataset_from_config(config.data)
    names = config.objective_names
    config.check_targets(dataset.target_names)
    Z = dataset.columns(names)
    store = ArtifactStore(config.output_dir, "fit-cv")

    cv_report = cross_validate(dataset.X, Z, cv.k_folds, cv.models, cv.seed, config.surrogate.forest,
                               config.surrogate.gp, names)
    table = render_cv_table(cv_report)
    store.add_text("cv_table", table)
    store.add_table("cv_summary", cv_report.summary)
    store.add_table("cv_raw", pd.DataFrame([
        {"model": model, "metric": metric, "target": names[j], "fold": f, "score": float(score)}
        for model, metrics in cv_report.raw.items()
        for metric, per_target in metrics.items()
        for j, scores in enumerate(per_target)
        for f, score in enumerate(scores)
    ]))
    store.add_plot(cv_figure(cv_report.summary))

    holdout = train_test_evaluate(dataset.X, Z, cv.test_size, cv.models, cv.seed, config.surrogate.forest,
                                  config.surrogate.gp, names)
    store.add_table("holdout_metrics", holdout.metrics)
    store.add_plot(predictions_figure(holdout))
    if len(names) >= 2:
        specs = [obj.desirability for obj in config.objectives[:2]]
        for model, frame in holdout.predictions.items():
            actual = np.column_stack([frame.loc[frame["target"] == t, "actual"].to_numpy() for t in names[:2]])
            predicted = np.column_stack([frame.loc[frame["target"] == t, "predicted"].to_numpy() for t in names[:2]])
            view_a, orient = pareto_view(actual, specs)
            view_p, _ = pareto_view(predicted, specs)
            store.add_plot(front_comparison_figure(
                f"pareto_{model}", actual, predicted, pareto_front(view_a, orient).indices,
                pareto_front(view_p, orient).indices, (names[0], names[1]),
            ))

    header(f"🔁 {cv.k_folds}-fold cross-validation")
    print(table, end="")
    header(f"🧪 Hold-out evaluation ({holdout.n_train} train / {holdout.n_test} test rows)")
    print(render_table(holdout.metrics))
    done(store)
    return 0


def cmd_generate(args: argparse.Namespace, config: RunConfig) -> int:
    syn = config.data.synthetic
    dataset = make_synthetic_dataset(syn.n, syn.k, syn.n_clusters, syn.spread, syn.lane_fraction, syn.noise,
                                     syn.seed)
    store = ArtifactStore(config.output_dir, "generate")
    features, targets = write_dataset(dataset, store)
    header("🧪 Synthetic dataset")
    print(f"features: {features}\ntargets:  {targets}")
    done(store)
    return 0


def cmd_desirability(args: argparse.Namespace, config: RunConfig) -> int:
    """Desirability curves and target histograms with the configured bounds."""
    dataset = dataset_from_config(config.data)
    config.check_targets(dataset.target_names)
    names = config.objective_names
    specs: List[DesirabilitySpec] = [obj.desirability for obj in config.objectives]
    store = ArtifactStore(config.output_dir, "desirability")
    store.add_plot(target_histogram_figure(dataset.columns(names), names, specs))

    header("🎚️ Desirability settings")
    curve_names, curve_specs = list(names), list(specs)
    if config.mm.enabled:
        ctx = MmContext.from_plan(dataset.X, config.mm.q, config.mm.p)
        low, high = mm_desirability_bounds(ctx.phi_base, config.mm.lo_frac, config.mm.hi_frac)
        print(f"mmphi_base: {ctx.phi_base!r}")
        print(f"mmphi_min: {low!r}, mmphi_max: {high!r}")
        curve_names.append(MM_NAME)
        curve_specs.append(DesirabilitySpec(goal="maximize", low=low, high=high, scale=config.mm.scale))
    for name, spec in zip(curve_names, curve_specs):
        target = f", target: {spec.target!r}" if spec.goal == "target" else ""
        print(f"target {name}: min: {spec.low!r}, max: {spec.high!r}{target}, scale: {spec.scale!r}")
    store.add_plot(desirability_figure(curve_names, curve_specs))
    done(store)
    return 0


COMMANDS: Dict[str, Callable[[argparse.Namespace, RunConfig], int]] = {
    "eval-design": cmd_eval_design,
    "suggest": cmd_suggest,
    "scaling": cmd_scaling,
    "point-addition": cmd_point_addition,
    "noise-sweep": cmd_noise_sweep,
    "opt-lhs": cmd_opt_lhs,
    "fit-cv": cmd_fit_cv,
    "generate": cmd_generate,
    "desirability": cmd_desirability,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="doe-infill",
        description="Space-filling evaluation and desirability-based infill suggestions for existing designs.",
        epilog="Any config leaf can be overridden with a dot path, e.g. --optimizer.budget 500.",
        allow_abbrev=False,
    )
    parser.add_argument("--log-level", default=LOG_LEVEL, help="loguru level (default from DOE_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "eval-design": "Phi and Phi* of a features CSV",
        "suggest": "suggest the next infill point (with and without MM)",
        "scaling": "Phi / Phi* vs. number of LHS samples",
        "point-addition": "Phi* when random points are added",
        "noise-sweep": "MM improvement of noisy copies of existing points",
        "opt-lhs": "maximin-optimized Latin hypercube",
        "fit-cv": "cross-validated surrogate comparison",
        "generate": "write a synthetic clustered dataset",
        "desirability": "desirability curves and target histograms",
    }
    for name in COMMANDS:
        cmd = sub.add_parser(name, help=helps[name], allow_abbrev=False)
        cmd.add_argument("--config", help="JSON run configuration")
        cmd.add_argument("--output-dir", help="overrides output_dir")
        if name == "eval-design":
            cmd.add_argument("features_csv")
            cmd.add_argument("--q", type=float, default=2.0)
            cmd.add_argument("--p", type=float, default=2.0)
            cmd.add_argument("--normalize", action="store_true",
                             help="rescale each column to [0, 1] by its min and max before evaluating")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    just_fix_windows_console()
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    setup_logging(args.log_level)
    try:
        config = load_config(args.config, parse_overrides(extra))
        if args.output_dir:
            config = config.model_copy(update={"output_dir": args.output_dir})
        return COMMANDS[args.command](args, config)
    except DoeError as e:
        print(f"{Fore.RED}❌ {type(e).__name__}: {e.message}{Style.RESET_ALL}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.exception(f"💥 Unexpected failure in {args.command}: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
