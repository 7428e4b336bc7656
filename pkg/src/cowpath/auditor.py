"""Projection-cascade lower-bound certificates for covering paths.

Stage ``i`` finds the first arc time ``t_i`` at which the current working
path reaches norm ``tau``, records the direction ``u_i`` of that point and
projects the working path onto the orthocomplement of ``u_i``. Between
consecutive milestones the original path travels at least ``tau``, so
``m * tau`` never exceeds its length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coverage import SAMPLED, covers
from .geometry import Direction, DomainError, Polyline, max_norm, project_path


def tau(d: int) -> float:
    """Milestone radius ``sqrt((d/2) / (16 ln(d/2)))``; natural log."""
    if d < 4:
        raise DomainError(f"tau(d) = sqrt((d/2) / (16 ln(d/2))) needs d >= 4, got d={d}")
    h = d / 2.0
    return math.sqrt(h / (16.0 * math.log(h)))


def theorem_bound(d: int) -> float:
    return (d // 2) * tau(d)


def corollary_radius(d: int) -> float:
    if d < 3:
        raise DomainError(f"sqrt(d / (16 ln d)) needs d >= 3, got d={d}")
    return math.sqrt(d / (16.0 * math.log(d)))


@dataclass
class Milestone:
    index: int
    arc_time: float
    direction: Direction
    attained_norm: float

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "arc_time": self.arc_time,
            "direction": self.direction.unit.tolist(),
            "attained_norm": self.attained_norm,
        }


@dataclass
class AuditReport:
    d: int
    tau: float
    milestones: list[Milestone]
    measured_length: float
    log_base: str = "e"

    @property
    def m(self) -> int:
        return len(self.milestones)

    @property
    def certified_lower_bound(self) -> float:
        return self.m * self.tau if self.m else 0.0

    @property
    def monotone_ok(self) -> bool:
        t = [ms.arc_time for ms in self.milestones]
        return all(a <= b for a, b in zip(t, t[1:]))

    def max_cross_inner(self) -> float:
        """Largest ``|<u_i, u_j>|`` over distinct milestone directions."""
        if self.m < 2:
            return 0.0
        u = np.array([ms.direction.unit for ms in self.milestones])
        g = np.abs(u @ u.T)
        np.fill_diagonal(g, 0.0)
        return float(g.max())

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "tau": self.tau,
            "log_base": self.log_base,
            "milestones": [ms.to_dict() for ms in self.milestones],
            "m": self.m,
            "certified_lower_bound": self.certified_lower_bound,
            "measured_length": self.measured_length,
            "monotone_ok": self.monotone_ok,
            "max_cross_inner": self.max_cross_inner(),
        }


def _first_crossing(v: np.ndarray, radius: float) -> tuple[int, float] | None:
    """First ``(segment, lam)`` where ``|v_k + lam (v_{k+1} - v_k)| = radius``."""
    norms2 = np.einsum("ij,ij->i", v, v)
    r2 = radius * radius
    idx = np.flatnonzero(norms2 >= r2)
    if idx.size == 0:
        return None
    j = int(idx[0])
    if j == 0:
        return 0, 0.0
    k = j - 1
    a, e = v[k], v[j] - v[k]
    # |a + lam e|^2 = r^2 with |a| < r <= |a + e|: the larger root lies in (0, 1]
    A, B, C = e @ e, 2.0 * (a @ e), a @ a - r2
    disc = max(B * B - 4.0 * A * C, 0.0)
    sq = math.sqrt(disc)
    # stable form of (-B + sq) / 2A
    lam = (-B + sq) / (2.0 * A) if B <= 0 else (-2.0 * C) / (B + sq)
    return k, min(max(lam, 0.0), 1.0)


def audit(path: Polyline, tau_override: float | None = None) -> AuditReport:
    d = path.dimension
    t_radius = tau(d) if tau_override is None else float(tau_override)
    if not t_radius > 0:
        raise DomainError("tau must be positive")
    cum = path.cum_length
    work = path
    milestones: list[Milestone] = []
    if path.length > 0 and math.isfinite(t_radius):
        for i in range(1, d + 1):
            hit = _first_crossing(work.vertices, t_radius)
            if hit is None:
                break
            k, lam = hit
            v = work.vertices
            x = v[k] + lam * (v[k + 1] - v[k]) if k + 1 < len(v) else v[k]
            nx = float(np.linalg.norm(x))
            if nx == 0.0:
                break
            u = Direction(x)
            t = float(cum[k] + lam * (cum[k + 1] - cum[k])) if k + 1 < len(cum) else float(cum[k])
            milestones.append(Milestone(i, t, u, nx))
            work = project_path(work, u)
            # re-project onto every earlier direction to keep the cascade orthogonal
            for ms in milestones[:-1]:
                work = project_path(work, ms.direction)
    return AuditReport(d, t_radius, milestones, path.length)


@dataclass
class CorollaryVerdict:
    branch: str
    threshold_radius: float
    length_threshold: float
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "branch": self.branch,
            "threshold_radius": self.threshold_radius,
            "length_threshold": self.length_threshold,
            "details": self.details,
        }


def corollary_check(path: Polyline, n_samples: int = 20_000, seed: int = 0) -> CorollaryVerdict:
    """Which side of the reach-or-be-long dichotomy a path falls on.

    A path that does neither cannot view all of U; a sampled uncovered
    direction is attached as evidence.
    """
    d = path.dimension
    radius = corollary_radius(d)
    length_threshold = float(d * d - 1)
    reach = max_norm(path)
    details = {"max_norm": reach, "length": path.length, "log_base": "e"}
    if reach >= radius:
        return CorollaryVerdict("reached-radius", radius, length_threshold, details)
    if path.length >= length_threshold:
        return CorollaryVerdict("long-path", radius, length_threshold, details)
    rep = covers(path, SAMPLED, n_samples, seed)
    details["coverage"] = rep.to_dict()
    return CorollaryVerdict("non-covering-certificate", radius, length_threshold, details)
