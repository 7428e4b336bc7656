"""Search strategies and synthetic test paths."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coverage import _MASK64
from .geometry import DomainError, Polyline

KINDS = ("doubling-1d", "log-spiral-2d", "cross-polytope-tour", "confined-random")

SPIRAL_START_RADIUS = 0.01


@dataclass(frozen=True)
class StrategySpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown strategy kind {self.kind!r}; expected one of {KINDS}")

    def build(self) -> Polyline:
        p = dict(self.params)
        if self.kind == "doubling-1d":
            return doubling_1d(int(p.get("k_max", 10)))
        if self.kind == "log-spiral-2d":
            return log_spiral_2d(
                float(p.get("growth_b", 0.21)),
                p.get("theta_max"),
                int(p.get("points_per_turn", 256)),
            )
        if self.kind == "cross-polytope-tour":
            return cross_polytope_tour(int(p["d"]), p.get("scale"))
        return confined_random_path(
            int(p["d"]),
            float(p.get("radius", 2.0)),
            float(p["target_length"]),
            int(p.get("steps", 600)),
            int(p.get("seed", 0)),
        )


def doubling_1d(k_max: int) -> Polyline:
    """Turn at 1, -2, 4, -8, ... up to ``(-2)**k_max``."""
    if k_max < 1:
        raise DomainError("k_max must be >= 1")
    turns = [float((-2) ** k) for k in range(k_max + 1)]
    return Polyline(np.array([0.0] + turns).reshape(-1, 1))


def spiral_arc_length(growth_b: float, r_start: float, r_end: float) -> float:
    """Arc length of ``r = exp(b theta)`` between two radii."""
    return math.sqrt(1.0 + 1.0 / growth_b**2) * (r_end - r_start)


def log_spiral_2d(growth_b: float, theta_max: float | None = None, points_per_turn: int = 256) -> Polyline:
    """Polyline through the logarithmic spiral ``r = exp(b theta)``.

    The spiral starts at radius 0.01 (with an origin vertex prepended) and
    ends at ``theta_max``, which defaults to radius 100.
    """
    if not growth_b > 0:
        raise DomainError("growth_b must be positive")
    if points_per_turn < 64:
        raise DomainError("points_per_turn must be >= 64")
    theta_min = math.log(SPIRAL_START_RADIUS) / growth_b
    if theta_max is None:
        theta_max = math.log(100.0) / growth_b
    theta_max = float(theta_max)
    if math.exp(growth_b * theta_max) < 2.0:
        raise DomainError("theta_max too small: the spiral must end at radius >= 2")
    step = 2 * math.pi / points_per_turn
    n = int(math.floor((theta_max - theta_min) / step + 1e-9))
    theta = theta_min + step * np.arange(n + 1)
    if theta[-1] < theta_max:
        theta = np.append(theta, theta_max)
    r = np.exp(growth_b * theta)
    pts = r[:, None] * np.column_stack([np.cos(theta), np.sin(theta)])
    return Polyline(pts, prepend_origin=True)


def cross_polytope_tour(d: int, scale: float | None = None) -> Polyline:
    """Visit ``scale*e_1 .. scale*e_d`` then ``-scale*e_1 .. -scale*e_d``.

    At ``scale >= sqrt(d)`` the hull contains the unit ball.
    """
    if d < 2:
        raise DomainError("cross_polytope_tour needs d >= 2")
    scale = math.sqrt(d) if scale is None else float(scale)
    if not scale > 0:
        raise DomainError("scale must be positive")
    eye = scale * np.eye(d)
    return Polyline(np.vstack([np.zeros((1, d)), eye, -eye]))


def cross_polytope_length(d: int, scale: float) -> float:
    return scale + (2 * d - 1) * scale * math.sqrt(2.0)


def confined_random_path(
    d: int, radius: float, target_length: float, steps: int = 600, seed: int = 0
) -> Polyline:
    """Seeded random walk of equal steps that never leaves the ball of ``radius``.

    A step that would leave the ball is reflected off the sphere, which keeps
    the step's length.
    """
    if steps < 1:
        raise DomainError("steps must be >= 1")
    if target_length < 0:
        raise DomainError("target_length must be >= 0")
    if target_length > 0 and radius <= 0:
        raise DomainError("a positive length needs a positive radius")
    h = target_length / steps
    if h > radius:
        raise DomainError("step length exceeds the confining radius; raise steps")
    rng = np.random.Generator(np.random.Philox(key=seed & _MASK64))
    out = [np.zeros(d)]
    for _ in range(steps):
        g = rng.standard_normal(d)
        out.extend(_reflect_step(out[-1], g / np.linalg.norm(g), h, radius))
    return Polyline(np.array(out))


def _reflect_step(x: np.ndarray, u: np.ndarray, h: float, radius: float) -> list[np.ndarray]:
    """Points reached by moving ``h`` from ``x`` along ``u``, bouncing off the sphere."""
    pts = []
    remaining = h
    while remaining > 0:
        b = x @ u
        c = x @ x - radius * radius
        t_exit = -b + math.sqrt(max(b * b - c, 0.0))
        if t_exit >= remaining:
            pts.append(x + remaining * u)
            break
        y = x + t_exit * u
        n = y / np.linalg.norm(y)
        y = n * radius
        u = u - 2.0 * (u @ n) * n
        pts.append(y)
        x, remaining = y, remaining - t_exit
    return pts
