"""Sphere inspection and the d-dimensional cow-path problem.

A path from the origin views a point ``q`` of the unit sphere when some
point ``p`` on it has ``<p, q> >= 1``. This package decides and measures
that, checks the supporting inequalities numerically, certifies length
lower bounds for covering paths, and builds classic search strategies.
"""

__version__ = "0.1.0"

from .geometry import (  # noqa: E402
    Direction,
    DomainError,
    Hyperplane,
    Polyline,
    dual_hyperplane,
    first_hit,
    point_at,
    project,
    project_path,
    sees,
)
from .coverage import (  # noqa: E402
    CoverageReport,
    RatioReport,
    cap_bound,
    cap_fraction_exact,
    covers,
    sample_directions,
    support_margin,
    visible_fraction_from_point,
    worst_case_ratio,
)
from .auditor import AuditReport, CorollaryVerdict, audit, corollary_check, tau, theorem_bound  # noqa: E402

__all__ = [
    "Direction",
    "DomainError",
    "Hyperplane",
    "Polyline",
    "dual_hyperplane",
    "first_hit",
    "point_at",
    "project",
    "project_path",
    "sees",
    "CoverageReport",
    "RatioReport",
    "cap_bound",
    "cap_fraction_exact",
    "covers",
    "sample_directions",
    "support_margin",
    "visible_fraction_from_point",
    "worst_case_ratio",
    "AuditReport",
    "CorollaryVerdict",
    "audit",
    "corollary_check",
    "tau",
    "theorem_bound",
]
