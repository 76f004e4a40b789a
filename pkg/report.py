"""Plain-text renderings: suggestion blocks, the CV pipe table, design summaries."""

from typing import Optional

import numpy as np
import pandas as pd
from jinja2 import Environment, StrictUndefined

from models import CvReport, DistanceProfile, InfillSuggestion

_env = Environment(undefined=StrictUndefined, trim_blocks=True, lstrip_blocks=True, keep_trailing_newline=True)
_env.filters["r4"] = lambda v: f"{v:.4f}"
_env.filters["full"] = lambda v: repr(float(v))
_env.filters["vec"] = lambda values: "[" + " ".join(repr(float(v)) for v in values) + "]"

SUGGESTION_TEMPLATE = _env.from_string(
    """\
{% set label = suggestion.objective_names | join(' + ') %}
Input values of the best point ({{ label }}): {{ suggestion.x_best | vec }}
Best desirability ({{ label }}): {{ suggestion.desirability_best | r4 }}
Target values of the best point ({{ label }}): [{{ suggestion.y_best | vec }}]
{% if mm_improvement is not none %}
MM improvement of the best point: {{ mm_improvement | full }}
{% endif %}
{% if suggestion.flat_landscape %}
WARNING: desirability is 0 everywhere the optimizer looked ({{ suggestion.evaluations }} evaluations)
{% endif %}
"""
)

CV_TABLE_TEMPLATE = _env.from_string(
    """\
| Target | Model | Metric | Mean | Std | Min | Max |
|--------|-------|--------|------|-----|-----|-----|
{% for row in rows %}
| {{ row.Target }} | {{ row.Model }} | {{ row.Metric }} | {{ row.Mean | r4 }} | {{ row.Std | r4 }} | {{ row.Min | r4 }} | {{ row.Max | r4 }} |
{% endfor %}
"""
)

DESIGN_TEMPLATE = _env.from_string(
    """\
Design: n={{ n }}, k={{ k }}, q={{ q }}, p={{ p }}, M={{ M }}
Phi_q: {{ phi | full }}
Quality (Phi_q_intensive): {{ phi_intensive | full }}
Distinct Distances (d): {{ d }}
Multiplicities (J): {{ J }}
"""
)


def render_suggestion(suggestion: InfillSuggestion, mm_improvement: Optional[float] = None) -> str:
    return SUGGESTION_TEMPLATE.render(suggestion=suggestion, mm_improvement=mm_improvement)


def render_cv_table(report_or_summary) -> str:
    """Pipe table with columns Target | Model | Metric | Mean | Std | Min | Max, 4 decimals."""
    summary = report_or_summary.summary if isinstance(report_or_summary, CvReport) else report_or_summary
    return CV_TABLE_TEMPLATE.render(rows=summary.to_dict(orient="records"))


def _short_vector(values: np.ndarray, limit: int = 8) -> str:
    shown = np.array2string(np.asarray(values)[:limit], precision=8, separator=" ")
    return shown if len(values) <= limit else f"{shown[:-1]} ...] ({len(values)} values)"


def render_design_summary(n: int, k: int, profile: DistanceProfile, phi: float, phi_intensive: float) -> str:
    return DESIGN_TEMPLATE.render(
        n=n, k=k, q=profile.q, p=profile.p, M=profile.M, phi=phi, phi_intensive=phi_intensive,
        d=_short_vector(profile.d), J=_short_vector(profile.J),
    )


def render_table(frame: pd.DataFrame) -> str:
    """Compact console rendering of a study table."""
    return frame.to_string(index=False, float_format=lambda v: f"{v:.6g}")
