"""Infill-point diagnostics: where do suggested points sit relative to the existing design?"""

import math
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd

from errors import InvalidArgumentError
from models import BoxSummary, HistogramSummary, IpPlotData, Marker, PlotArtifact, SamplingPlan
from plotting import NEUTRAL, ROLE_COLORS, WITH_MM, figure, to_svg

# Features with fewer distinct values than this are flagged and drawn in red.
LOW_CARDINALITY = 10


def _check_markers(plan: SamplingPlan, markers: Sequence[Marker]) -> None:
    for marker in markers:
        if marker.x.size != plan.k:
            raise InvalidArgumentError(f"marker {marker.label!r} has {marker.x.size} coordinates, design has {plan.k}")


def box_summary(values) -> BoxSummary:
    """Quartiles by linear interpolation between order statistics; Tukey whiskers at 1.5 IQR."""
    values = np.asarray(values, dtype=float)
    q1, median, q3 = np.quantile(values, [0.25, 0.5, 0.75])
    iqr = q3 - q1
    inside = values[(values >= q1 - 1.5 * iqr) & (values <= q3 + 1.5 * iqr)]
    fliers = np.sort(values[(values < q1 - 1.5 * iqr) | (values > q3 + 1.5 * iqr)])
    return BoxSummary(float(q1), float(median), float(q3), float(inside.min()), float(inside.max()),
                      tuple(float(v) for v in fliers))


def histogram_summary(values, bins: int = 20) -> HistogramSummary:
    values = np.asarray(values, dtype=float)
    counts, edges = np.histogram(values, bins=bins, range=(0.0, 1.0))
    n_distinct = int(np.unique(values).size)
    return HistogramSummary(edges, counts, n_distinct, n_distinct < LOW_CARDINALITY)


def _marker_columns(frame: pd.DataFrame, markers: Sequence[Marker]) -> pd.DataFrame:
    for marker in markers:
        frame[f"{marker.label} ({marker.role})"] = np.clip(marker.x, 0.0, 1.0)
    return frame


def ip_boxplots(plan: SamplingPlan, markers: Sequence[Marker]) -> Tuple[IpPlotData, PlotArtifact]:
    _check_markers(plan, markers)
    boxes = [box_summary(plan.points[:, j]) for j in range(plan.k)]
    positions = np.arange(1, plan.k + 1)
    stats = [
        {"label": name, "q1": b.q1, "med": b.median, "q3": b.q3, "whislo": b.whislo, "whishi": b.whishi,
         "fliers": list(b.fliers)}
        for name, b in zip(plan.feature_names, boxes)
    ]
    with figure(figsize=(max(4.0, 1.2 * plan.k + 2.0), 4.5)) as (fig, axes):
        ax = axes[0, 0]
        ax.bxp(stats, positions=positions, showfliers=True, patch_artist=False)
        for i, marker in enumerate(markers):
            ax.plot(positions, np.clip(marker.x, 0.0, 1.0), linestyle="none", marker="D", markersize=7,
                    color=ROLE_COLORS[marker.role], label=marker.label, gid=f"marker-{i}")
        ax.set_ylim(-0.02, 1.02)
        ax.set_ylabel("normalized value")
        ax.set_title("Infill point vs. existing design")
        if markers:
            ax.legend()
        svg = to_svg(fig)

    frame = pd.DataFrame({
        "feature": list(plan.feature_names),
        "q1": [b.q1 for b in boxes],
        "median": [b.median for b in boxes],
        "q3": [b.q3 for b in boxes],
        "whislo": [b.whislo for b in boxes],
        "whishi": [b.whishi for b in boxes],
        "n_fliers": [len(b.fliers) for b in boxes],
    })
    data = IpPlotData(plan.feature_names, list(markers), boxes=boxes)
    return data, PlotArtifact("ip_boxplots", svg, _marker_columns(frame, markers))


def ip_histograms(plan: SamplingPlan, markers: Sequence[Marker], bins: int = 20) -> Tuple[IpPlotData, PlotArtifact]:
    """Per-feature histograms on [0, 1]; low-cardinality features drawn in red, markers as lines."""
    if bins < 1:
        raise InvalidArgumentError("bins must be >= 1")
    _check_markers(plan, markers)
    hists = [histogram_summary(plan.points[:, j], bins) for j in range(plan.k)]
    ncols = min(plan.k, 4)
    nrows = math.ceil(plan.k / ncols)

    with figure(nrows, ncols, figsize=(3.5 * ncols, 3.0 * nrows)) as (fig, axes):
        for j, (name, hist) in enumerate(zip(plan.feature_names, hists)):
            ax = axes[j // ncols, j % ncols]
            color = WITH_MM if hist.low_cardinality else NEUTRAL
            ax.bar(hist.edges[:-1], hist.counts, width=np.diff(hist.edges), align="edge", color=color,
                   edgecolor="white")
            for marker in markers:
                ax.axvline(float(np.clip(marker.x[j], 0.0, 1.0)), color=ROLE_COLORS[marker.role], linewidth=2)
            ax.set_xlim(0, 1)
            ax.set_title(name)
        for j in range(plan.k, nrows * ncols):
            axes[j // ncols, j % ncols].set_visible(False)
        fig.tight_layout()
        svg = to_svg(fig)

    rows: List[pd.DataFrame] = []
    for name, hist in zip(plan.feature_names, hists):
        rows.append(pd.DataFrame({
            "feature": name,
            "bin_left": hist.edges[:-1],
            "bin_right": hist.edges[1:],
            "count": hist.counts,
            "low_cardinality": hist.low_cardinality,
        }))
    data = IpPlotData(plan.feature_names, list(markers), histograms=hists)
    return data, PlotArtifact("ip_histograms", svg, pd.concat(rows, ignore_index=True))


def updated_design_scatter(plan: SamplingPlan, feature_pair: Tuple[int, int],
                           markers: Sequence[Marker]) -> PlotArtifact:
    """Existing points in grey, each suggestion in its role colour with its coordinates annotated."""
    i, j = (int(v) for v in feature_pair)
    if i == j or not (0 <= i < plan.k and 0 <= j < plan.k):
        raise InvalidArgumentError(f"feature_pair must name two different columns below {plan.k}, got {feature_pair}")
    _check_markers(plan, markers)
    xi, xj = plan.feature_names[i], plan.feature_names[j]

    with figure(figsize=(5.5, 5.5)) as (fig, axes):
        ax = axes[0, 0]
        ax.plot(plan.points[:, i], plan.points[:, j], linestyle="none", marker="o", markersize=3,
                color=NEUTRAL, label="design", gid="design-points")
        for m, marker in enumerate(markers):
            x, y = float(marker.x[i]), float(marker.x[j])
            ax.plot([x], [y], linestyle="none", marker="*", markersize=14, color=ROLE_COLORS[marker.role],
                    label=marker.label, gid=f"marker-{m}")
            ax.annotate(f"{marker.label} ({x:.6f}, {y:.6f})", (x, y), textcoords="offset points",
                        xytext=(6, 6), fontsize=8, color=ROLE_COLORS[marker.role])
        ax.set_xlabel(xi)
        ax.set_ylabel(xj)
        ax.set_title("Updated design")
        if markers:
            ax.legend(loc="lower right")
        svg = to_svg(fig)

    frame = pd.DataFrame({"label": "design", "role": "design", "x": plan.points[:, i], "y": plan.points[:, j]})
    if markers:
        frame = pd.concat([frame, pd.DataFrame({
            "label": [mk.label for mk in markers],
            "role": [mk.role for mk in markers],
            "x": [float(mk.x[i]) for mk in markers],
            "y": [float(mk.x[j]) for mk in markers],
        })], ignore_index=True)
    frame.attrs["axes"] = (xi, xj)
    return PlotArtifact("updated_design_scatter", svg, frame)
