"""SVG figures. Equal inputs render byte-identical SVG: fixed hash salt, text kept
as text, no date metadata."""

import io
from contextlib import contextmanager
from typing import Dict, List, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from desirability import desirability  # noqa: E402
from models import DesirabilitySpec, EvaluationReport, PlotArtifact  # noqa: E402

SVG_RC = {
    "svg.hashsalt": "doe-infill",
    "svg.fonttype": "none",
    "font.family": "DejaVu Sans",
    "axes.grid": True,
    "grid.alpha": 0.3,
}

NEUTRAL = "#7f7f7f"
WITH_MM = "#d62728"
WITHOUT_MM = "#1f77b4"
FRONT = "#2ca02c"
TRACE = "#ff7f0e"
ROLE_COLORS = {"with-mm": WITH_MM, "without-mm": WITHOUT_MM}


@contextmanager
def figure(nrows: int = 1, ncols: int = 1, figsize: Tuple[float, float] = (6.4, 4.8)):
    with plt.rc_context(SVG_RC):
        fig, axes = plt.subplots(nrows, ncols, figsize=figsize, squeeze=False)
        try:
            yield fig, axes
        finally:
            plt.close(fig)


def to_svg(fig) -> str:
    buf = io.StringIO()
    with plt.rc_context(SVG_RC):
        fig.savefig(buf, format="svg", metadata={"Date": None})
    return buf.getvalue()


def line_figure(name: str, frame: pd.DataFrame, x: str, panels: Sequence[Tuple[str, str]],
                title: str, logx: bool = False) -> PlotArtifact:
    """One panel per (column, y-label); panels keep their own y scale."""
    with figure(1, len(panels), figsize=(5.0 * len(panels), 4.0)) as (fig, axes):
        for ax, (column, ylabel) in zip(axes[0], panels):
            ax.plot(frame[x], frame[column], marker="o", color=WITHOUT_MM)
            ax.set_xlabel(x)
            ax.set_ylabel(ylabel)
            if logx:
                ax.set_xscale("log")
        fig.suptitle(title)
        fig.tight_layout()
        svg = to_svg(fig)
    return PlotArtifact(name, svg, frame)


def scaling_figure(frame: pd.DataFrame) -> PlotArtifact:
    return line_figure("mm_vs_n", frame, "n", [("phi", "Phi_q"), ("phi_intensive", "Phi*_q")],
                       "Morris-Mitchell criteria vs. number of samples")


def point_addition_figure(frame: pd.DataFrame, mode: str) -> PlotArtifact:
    with figure() as (fig, axes):
        ax = axes[0, 0]
        base = frame.attrs.get("base_phi_intensive")
        if mode == "batch":
            ax.plot(frame["step"], frame["phi_intensive"], marker="o", color=WITHOUT_MM)
            ax.set_ylabel("Phi* after cumulative additions")
        else:
            ax.plot(frame["step"], frame["improvement"], marker="o", linestyle="none", color=WITHOUT_MM)
            ax.set_ylabel("MM improvement of the single point")
        if base is not None and mode == "batch":
            ax.axhline(base, color=NEUTRAL, linestyle="--", label="base design")
            ax.legend()
        ax.set_xlabel("added point")
        ax.set_title(f"Random point addition ({mode})")
        svg = to_svg(fig)
    return PlotArtifact(f"point_addition_{mode.replace('-', '_')}", svg, frame)


def noise_sweep_figure(frame: pd.DataFrame) -> PlotArtifact:
    with figure() as (fig, axes):
        ax = axes[0, 0]
        ax.errorbar(frame["sigma"], frame["mean_improvement"], yerr=frame["std_improvement"],
                    marker="o", color=WITHOUT_MM, capsize=3)
        reference = frame.attrs.get("uniform_mean_improvement")
        if reference is not None:
            ax.axhline(reference, color=WITH_MM, linestyle="--", label="uniform random point")
            ax.legend()
        ax.set_xscale("log")
        ax.set_xlabel("sigma")
        ax.set_ylabel("mean MM improvement")
        ax.set_title("Effect of noise (sigma) on Morris-Mitchell improvement")
        svg = to_svg(fig)
    return PlotArtifact("sigma_noise", svg, frame)


def design_pair_figure(name: str, designs: Dict[str, np.ndarray], titles: Dict[str, str]) -> PlotArtifact:
    """Side-by-side 2-D scatter of several designs (first two columns)."""
    labels = list(designs)
    with figure(1, len(labels), figsize=(4.5 * len(labels), 4.5)) as (fig, axes):
        for ax, label in zip(axes[0], labels):
            pts = designs[label]
            ax.plot(pts[:, 0], pts[:, 1], linestyle="none", marker="o", markersize=3, color=NEUTRAL)
            ax.set_xlim(0, 1)
            ax.set_ylim(0, 1)
            ax.set_aspect("equal")
            ax.set_title(titles.get(label, label))
        fig.tight_layout()
        svg = to_svg(fig)
    frame = pd.concat(
        [pd.DataFrame({"design": label, "x1": designs[label][:, 0], "x2": designs[label][:, 1]}) for label in labels],
        ignore_index=True,
    )
    return PlotArtifact(name, svg, frame)


def cv_figure(summary: pd.DataFrame) -> PlotArtifact:
    """Grouped bars of mean CV score with std error bars, one panel per metric."""
    metrics = list(dict.fromkeys(summary["Metric"]))
    with figure(1, len(metrics), figsize=(5.5 * len(metrics), 4.0)) as (fig, axes):
        for ax, metric in zip(axes[0], metrics):
            part = summary[summary["Metric"] == metric]
            targets = list(dict.fromkeys(part["Target"]))
            models = list(dict.fromkeys(part["Model"]))
            width = 0.8 / max(len(models), 1)
            for m, model in enumerate(models):
                rows = part[part["Model"] == model].set_index("Target").loc[targets]
                xs = np.arange(len(targets)) + m * width
                ax.bar(xs, rows["Mean"], width=width, yerr=rows["Std"], capsize=3, label=model)
            ax.set_xticks(np.arange(len(targets)) + width * (len(models) - 1) / 2)
            ax.set_xticklabels(targets)
            ax.set_ylabel(metric)
            ax.set_title(f"CV scores mean ({metric})")
            ax.legend()
        fig.tight_layout()
        svg = to_svg(fig)
    return PlotArtifact("cv_scores", svg, summary)


def predictions_figure(report: EvaluationReport) -> PlotArtifact:
    """Predicted vs. actual per model and target, with the identity line."""
    models = list(report.predictions)
    targets = list(dict.fromkeys(report.predictions[models[0]]["target"])) if models else []
    with figure(max(len(models), 1), max(len(targets), 1),
                figsize=(4.0 * max(len(targets), 1), 4.0 * max(len(models), 1))) as (fig, axes):
        for r, model in enumerate(models):
            frame = report.predictions[model]
            for c, target in enumerate(targets):
                ax = axes[r, c]
                part = frame[frame["target"] == target]
                ax.plot(part["actual"], part["predicted"], linestyle="none", marker="o", markersize=3,
                        color=WITHOUT_MM)
                lo = float(min(part["actual"].min(), part["predicted"].min()))
                hi = float(max(part["actual"].max(), part["predicted"].max()))
                ax.plot([lo, hi], [lo, hi], color=NEUTRAL, linestyle="--")
                ax.set_xlabel(f"actual {target}")
                ax.set_ylabel(f"predicted {target}")
                ax.set_title(model)
        fig.tight_layout()
        svg = to_svg(fig)
    data = pd.concat(
        [frame.assign(model=model) for model, frame in report.predictions.items()], ignore_index=True
    ) if models else pd.DataFrame(columns=["target", "actual", "predicted", "model"])
    return PlotArtifact("predictions", svg, data)


def pareto_figure(name: str, points: np.ndarray, front: np.ndarray, labels: Tuple[str, str],
                  best: Optional[np.ndarray] = None, best_role: str = "without-mm",
                  trace: Optional[np.ndarray] = None, title: str = "") -> PlotArtifact:
    """Existing objective values with their front; best point and optimizer trace on top.

    Trace points are drawn only; they never enter the front.
    """
    front_mask = np.zeros(points.shape[0], dtype=bool)
    front_mask[front] = True
    order = np.argsort(points[front_mask, 0], kind="stable")
    with figure() as (fig, axes):
        ax = axes[0, 0]
        ax.plot(points[~front_mask, 0], points[~front_mask, 1], linestyle="none", marker="o",
                markersize=3, color=NEUTRAL, label="design", gid="design-points")
        ax.plot(points[front_mask, 0][order], points[front_mask, 1][order], marker="o", markersize=4,
                color=FRONT, label="Pareto front", gid="pareto-front")
        if trace is not None and len(trace):
            ax.plot(trace[:, 0], trace[:, 1], linestyle="none", marker="x", markersize=4, color=TRACE,
                    label="optimizer trace", gid="trace")
        if best is not None:
            ax.plot([best[0]], [best[1]], linestyle="none", marker="*", markersize=14,
                    color=ROLE_COLORS[best_role], label="best point", gid="best-point")
        ax.set_xlabel(labels[0])
        ax.set_ylabel(labels[1])
        ax.set_title(title or f"Pareto front {labels[0]} vs. {labels[1]}")
        ax.legend()
        svg = to_svg(fig)

    frame = pd.DataFrame({labels[0]: points[:, 0], labels[1]: points[:, 1], "on_front": front_mask,
                          "kind": "design"})
    extra = []
    if trace is not None and len(trace):
        extra.append(pd.DataFrame({labels[0]: trace[:, 0], labels[1]: trace[:, 1], "on_front": False,
                                   "kind": "trace"}))
    if best is not None:
        extra.append(pd.DataFrame({labels[0]: [best[0]], labels[1]: [best[1]], "on_front": False,
                                   "kind": "best"}))
    if extra:
        frame = pd.concat([frame] + extra, ignore_index=True)
    return PlotArtifact(name, svg, frame)


def desirability_figure(names: Sequence[str], specs: Sequence[DesirabilitySpec]) -> PlotArtifact:
    """Desirability curve of every objective over its support padded by 10 %."""
    rows: List[pd.DataFrame] = []
    with figure(1, len(specs), figsize=(4.0 * len(specs), 3.5)) as (fig, axes):
        for ax, name, spec in zip(axes[0], names, specs):
            pad = 0.1 * (spec.high - spec.low)
            f = np.linspace(spec.low - pad, spec.high + pad, 201)
            d = desirability(f, spec)
            ax.plot(f, d, color=WITHOUT_MM)
            ax.set_xlabel(name)
            ax.set_ylabel("desirability")
            ax.set_ylim(-0.05, 1.05)
            ax.set_title(f"{name}: {spec.goal}")
            rows.append(pd.DataFrame({"objective": name, "f": f, "desirability": d}))
        fig.tight_layout()
        svg = to_svg(fig)
    return PlotArtifact("desirability_curves", svg, pd.concat(rows, ignore_index=True))


def target_histogram_figure(Z: np.ndarray, names: Sequence[str], specs: Sequence[DesirabilitySpec],
                            bins: int = 20) -> PlotArtifact:
    """Histogram of each target with its desirability bounds as vertical lines."""
    rows: List[pd.DataFrame] = []
    with figure(1, len(names), figsize=(4.0 * len(names), 3.5)) as (fig, axes):
        for j, (ax, name, spec) in enumerate(zip(axes[0], names, specs)):
            counts, edges = np.histogram(Z[:, j], bins=bins)
            ax.bar(edges[:-1], counts, width=np.diff(edges), align="edge", color=NEUTRAL, edgecolor="white")
            ax.axvline(spec.low, color=WITHOUT_MM, linestyle="--", label="low")
            ax.axvline(spec.high, color=WITH_MM, linestyle="--", label="high")
            if spec.target is not None:
                ax.axvline(spec.target, color=FRONT, linestyle=":", label="target")
            ax.set_xlabel(name)
            ax.set_ylabel("count")
            ax.legend()
            rows.append(pd.DataFrame({"target": name, "bin_left": edges[:-1], "bin_right": edges[1:],
                                      "count": counts}))
        fig.tight_layout()
        svg = to_svg(fig)
    return PlotArtifact("target_histograms", svg, pd.concat(rows, ignore_index=True))


def front_comparison_figure(name: str, actual: np.ndarray, predicted: np.ndarray, actual_front: np.ndarray,
                            predicted_front: np.ndarray, labels: Tuple[str, str]) -> PlotArtifact:
    """Hold-out rows in actual and in predicted objective space, each with its own front."""
    with figure(1, 2, figsize=(10.0, 4.5)) as (fig, axes):
        for ax, points, front, title in ((axes[0, 0], actual, actual_front, "actual"),
                                         (axes[0, 1], predicted, predicted_front, "predicted")):
            order = front[np.argsort(points[front, 0], kind="stable")]
            ax.plot(points[:, 0], points[:, 1], linestyle="none", marker="o", markersize=3, color=NEUTRAL,
                    gid="design-points")
            ax.plot(points[order, 0], points[order, 1], marker="o", markersize=4, color=FRONT, gid="pareto-front")
            ax.set_xlabel(labels[0])
            ax.set_ylabel(labels[1])
            ax.set_title(f"{title} ({len(front)} on front)")
        fig.tight_layout()
        svg = to_svg(fig)
    data = pd.DataFrame({
        f"{labels[0]}_actual": actual[:, 0], f"{labels[1]}_actual": actual[:, 1],
        f"{labels[0]}_predicted": predicted[:, 0], f"{labels[1]}_predicted": predicted[:, 1],
        "actual_front": np.isin(np.arange(len(actual)), actual_front),
        "predicted_front": np.isin(np.arange(len(predicted)), predicted_front),
    })
    return PlotArtifact(name, svg, data)
