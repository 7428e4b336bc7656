"""Executable checks for the cap, point-visibility, ball-containment and
confined-path lemmas.

Each ``check_*`` function returns a :class:`LemmaVerdict`. Sampled checks
use the same counter-based sphere sampler as :mod:`cowpath.coverage`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betainc, betaincinv

from .coverage import (
    _MASK64,
    SAMPLED,
    cap_bound,
    cap_fraction_exact,
    covers,
    sample_sphere,
    visible_fraction_from_point,
)
from .geometry import ATOL, DomainError, Polyline, point_at

LEMMA_IDS = ("cap", "point-visibility", "ball-containment", "confined-path")


@dataclass
class LemmaVerdict:
    lemma_id: str
    trials: int
    violations: int
    worst_margin: float
    params: dict = field(default_factory=dict)
    seed: int = 0

    @property
    def passed(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return {
            "lemma_id": self.lemma_id,
            "trials": self.trials,
            "violations": self.violations,
            "worst_margin": self.worst_margin,
            "params": self.params,
            "seed": self.seed,
        }


def _sigma3(p: float, n: int) -> float:
    return 3.0 * math.sqrt(max(p * (1.0 - p), 0.0) / n)


def check_cap_bound(d_grid, eps_grid) -> LemmaVerdict:
    d_grid, eps_grid = list(d_grid), list(eps_grid)
    if not d_grid or not eps_grid:
        raise DomainError("grids must be non-empty")
    worst, violations, where = math.inf, 0, None
    for d in d_grid:
        for e in eps_grid:
            m = cap_bound(d, e) - cap_fraction_exact(d, e)
            if m < 0:
                violations += 1
            if m < worst:
                worst, where = m, (d, e)
    return LemmaVerdict(
        "cap",
        len(d_grid) * len(eps_grid),
        violations,
        worst,
        {"d_grid": d_grid, "eps_grid": eps_grid, "worst_at": list(where)},
    )


def check_point_visibility(d: int, p_norm_grid, n_samples: int = 100_000, seed: int = 0) -> LemmaVerdict:
    """Exact and sampled visible fractions from ``p = |p| e_1`` against ``exp(-d / 2|p|^2)``.

    The sampled fraction passes when it is within a 3-sigma binomial band of
    the bound.
    """
    norms = [float(x) for x in p_norm_grid]
    if any(x < 1.0 for x in norms):
        raise DomainError("point norms must be >= 1")
    q = sample_sphere(d, n_samples, seed)
    rows, violations, worst = [], 0, math.inf
    for r in norms:
        p = np.zeros(d)
        p[0] = r
        bound = math.exp(-d / (2.0 * r * r))
        exact = visible_fraction_from_point(p)
        empirical = float(np.mean(q @ p >= 1.0))
        band = _sigma3(bound, n_samples)
        margins = (bound - exact, bound + band - empirical)
        violations += sum(m < 0 for m in margins)
        worst = min(worst, *margins)
        rows.append({"p_norm": r, "exact": exact, "empirical": empirical, "bound": bound, "band": band})
    return LemmaVerdict(
        "point-visibility",
        2 * len(norms),
        violations,
        worst,
        {"d": d, "n_samples": n_samples, "rows": rows},
        seed,
    )


def _sample_visible_cap(r: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One uniform point of ``{q in U : <r, q> >= 1}`` per row of ``r``.

    Every row must have norm > 1. Uses the marginal law of ``t = <q, r_hat>``
    (``1 - t^2`` is Beta((d-1)/2, 1/2)), conditioned on ``t >= 1/|r|``.
    """
    n, d = r.shape
    rn = np.linalg.norm(r, axis=1)
    rhat = r / rn[:, None]
    if d == 1:
        return np.sign(r)
    a = (d - 1) / 2.0
    x_max = 1.0 - 1.0 / rn**2  # largest admissible 1 - t^2
    u = rng.uniform(size=n) * betainc(a, 0.5, x_max)
    t = np.sqrt(np.clip(1.0 - betaincinv(a, 0.5, u), 0.0, 1.0))
    t = np.maximum(t, 1.0 / rn)
    g = rng.standard_normal((n, d))
    g -= np.einsum("ij,ij->i", g, rhat)[:, None] * rhat
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return t[:, None] * rhat + np.sqrt(1.0 - t * t)[:, None] * g


def ball_containment_triples(d: int, trials: int, seed: int = 0):
    """Sample ``(p, r, q)`` with ``|p|`` in [1, 4], ``|r - p| <= 1/2`` and ``q`` viewed from ``r``.

    Returns the three arrays and a mask of trials where ``r`` views nothing
    (``|r| <= 1``); those rows of ``q`` are meaningless.
    """
    rng = np.random.Generator(np.random.Philox(key=seed & _MASK64, counter=d << 192))
    p = sample_sphere(d, trials, seed ^ 0x5EED) * rng.uniform(1.0, 4.0, size=(trials, 1))
    w = sample_sphere(d, trials, seed ^ 0xBA11) * (0.5 * rng.uniform(size=(trials, 1)) ** (1.0 / d))
    r = p + w
    blind = np.linalg.norm(r, axis=1) <= 1.0
    q = np.zeros_like(r)
    if (~blind).any():
        q[~blind] = _sample_visible_cap(r[~blind], rng)
    return p, r, q, blind


def check_ball_containment(d: int, trials: int, seed: int = 0) -> LemmaVerdict:
    """Every q viewed from a point of the radius-1/2 ball about p is viewed from 2p."""
    if trials < 1:
        raise DomainError("trials must be >= 1")
    worst, violations, skipped, rounded, done = math.inf, 0, 0, 0, 0
    for start in range(0, trials, 100_000):
        n = min(100_000, trials - start)
        p, r, q, blind = ball_containment_triples(d, n, seed + start)
        keep = ~blind
        skipped += int(blind.sum())
        # exact predicate on both sides, no tolerance: a q that rounding left
        # just outside r's cap is not a premise of the lemma and is dropped
        valid = np.einsum("ij,ij->i", r[keep], q[keep]) >= 1.0
        slack = 2.0 * np.einsum("ij,ij->i", p[keep][valid], q[keep][valid]) - 1.0
        violations += int(np.sum(slack < 0.0))
        if slack.size:
            worst = min(worst, float(slack.min()))
        rounded += int((~valid).sum())
        done += int(valid.sum())
    return LemmaVerdict(
        "ball-containment",
        done,
        violations,
        worst,
        {"d": d, "requested": trials, "skipped_blind": skipped, "skipped_rounding": rounded, "p_norm_range": [1.0, 4.0], "ball_radius": 0.5},
        seed,
    )


def ball_containment_probes() -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Deterministic ``(p, r, q)`` cases: collinear and boundary-equality."""
    e1 = np.array([1.0, 0.0])
    boundary_q = np.array([0.5, math.sqrt(3.0) / 2.0])
    return [
        (e1, 1.5 * e1, e1),
        # <q, p> = 1/2 exactly and r sits on the rim of the ball
        (e1, e1 + 0.5 * boundary_q, boundary_q),
    ]


# --------------------------------------------------------------------------
# confined paths


@dataclass
class Decomposition:
    piece_count: int
    midpoints: list[np.ndarray]
    piece_lengths: list[float]
    breaks: list[float]

    def piece_bounds(self, i: int) -> tuple[float, float]:
        return self.breaks[i], self.breaks[i + 1]


def decompose_unit(path: Polyline) -> Decomposition:
    """Cut the path at arc lengths 1, 2, ...; midpoints are arc-length midpoints."""
    total = path.length
    if total <= 0:
        raise DomainError("cannot decompose a zero-length path")
    count = max(1, math.ceil(total - 1e-9))
    breaks = [float(min(i, total)) for i in range(count)] + [total]
    mids = [point_at(path, 0.5 * (a + b)) for a, b in zip(breaks[:-1], breaks[1:])]
    lengths = [b - a for a, b in zip(breaks[:-1], breaks[1:])]
    return Decomposition(count, mids, lengths, breaks)


def coverage_upper_bound(path: Polyline) -> float:
    """Upper bound on the fraction of U the path views.

    Each unit piece views no more than the point twice its midpoint does.
    A value below 1 certifies that the path does not view all of U.
    """
    dec = decompose_unit(path)
    total = sum(visible_fraction_from_point(2.0 * m) for m in dec.midpoints)
    return min(max(total, 0.0), 1.0)


def confined_bound(d: int, r: float) -> float:
    """Minimum length of a path inside radius ``r`` that views all of U.

    Any ``r > 0`` is accepted: the argument never needs ``r >= 1``, and the
    corollary radius is below 1 until d is about 70.
    """
    if not r > 0:
        raise DomainError(f"r must be > 0, got {r}")
    return math.exp(d / (8.0 * r * r)) - 1.0


def decomposition_slack(path: Polyline, per_piece: int = 100) -> float:
    """Largest ``|P(s) - midpoint| - 1/2`` over sampled points of every piece."""
    dec = decompose_unit(path)
    worst = -math.inf
    for i, m in enumerate(dec.midpoints):
        a, b = dec.piece_bounds(i)
        for s in np.linspace(a, b, per_piece):
            worst = max(worst, float(np.linalg.norm(point_at(path, s) - m)) - 0.5)
    return worst


def check_confined_paths(paths, radius: float, n_samples: int = 20_000, seed: int = 0) -> LemmaVerdict:
    """Contrapositive of the confined-path bound plus the soundness chain.

    For each path (confined to ``radius`` and shorter than the bound):
    the union-cap upper bound must be < 1, the sampled coverage must fail,
    and the sampled fraction may exceed the upper bound by at most 3 sigma.
    """
    violations, worst, rows = 0, math.inf, []
    for i, path in enumerate(paths):
        d = path.dimension
        ub = coverage_upper_bound(path)
        rep = covers(path, SAMPLED, n_samples, seed + i)
        short = path.length < confined_bound(d, radius)
        band = _sigma3(max(ub, 1.0 / n_samples), n_samples)
        margins = [ub + band - rep.fraction_visible, -decomposition_slack(path, 20)]
        violations += sum(m < -ATOL for m in margins)
        if short:
            margins.append(1.0 - ub)
            violations += int(ub >= 1.0) + int(rep.verdict)
        worst = min(worst, *margins)
        rows.append(
            {"length": path.length, "upper_bound": ub, "fraction_visible": rep.fraction_visible, "covers": rep.verdict}
        )
    return LemmaVerdict(
        "confined-path",
        len(rows),
        violations,
        worst,
        {"radius": radius, "n_samples": n_samples, "rows": rows},
        seed,
    )
