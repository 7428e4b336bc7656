"""How much of the unit sphere a point or a path views.

Sphere samples come from a counter-based generator (Philox) keyed by the
seed, with the block index in the high counter word. Sample ``i`` lives in
block ``i // BLOCK`` so the output is fixed by ``(d, n, seed)`` no matter how
blocks are spread over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betainc

from .geometry import ATOL, Direction, DomainError, Hyperplane, Polyline, as_vec

BLOCK = 4096
MAX_WITNESSES = 16
_MASK64 = (1 << 64) - 1

SAMPLED = "sampled"
EXACT = "exact-low-d"


class UnsupportedModeError(DomainError):
    pass


# --------------------------------------------------------------------------
# sampling


def _block_gaussians(d: int, seed: int, block: int, count: int) -> np.ndarray:
    bitgen = np.random.Philox(key=seed & _MASK64, counter=block << 192)
    return np.random.Generator(bitgen).standard_normal((count, d))


def _block_slices(n: int):
    return [(b, min(BLOCK, n - b * BLOCK)) for b in range((n + BLOCK - 1) // BLOCK)]


def _map_blocks(fn, n: int, workers: int):
    blocks = _block_slices(n)
    if workers <= 1 or len(blocks) == 1:
        return [fn(b, c) for b, c in blocks]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(lambda bc: fn(*bc), blocks))


def sample_sphere(d: int, n: int, seed: int = 0, workers: int = 1) -> np.ndarray:
    """``n`` uniform points on S^{d-1} as an ``(n, d)`` array."""
    if d < 1 or n < 1:
        raise DomainError("need d >= 1 and n >= 1")

    def one(block, count):
        g = _block_gaussians(d, seed, block, count)
        return g / np.linalg.norm(g, axis=1, keepdims=True)

    return np.vstack(_map_blocks(one, n, workers))


def sample_directions(d: int, n: int, seed: int = 0, workers: int = 1) -> list[Direction]:
    return [Direction(row) for row in sample_sphere(d, n, seed, workers)]


def _reduce_blocks(d, n, seed, workers, fn):
    """Apply ``fn`` to each block of sphere samples; results in block order."""

    def one(block, count):
        g = _block_gaussians(d, seed, block, count)
        return fn(g / np.linalg.norm(g, axis=1, keepdims=True))

    return _map_blocks(one, n, workers)


# --------------------------------------------------------------------------
# caps


def _check_eps(epsilon: float) -> float:
    epsilon = float(epsilon)
    if not 0.0 <= epsilon <= 1.0:
        raise DomainError(f"epsilon must lie in [0, 1], got {epsilon}")
    return epsilon


def cap_bound(d: int, epsilon: float) -> float:
    epsilon = _check_eps(epsilon)
    return math.exp(-d * epsilon * epsilon / 2.0)


def cap_fraction_exact(d: int, epsilon: float) -> float:
    """Normalized measure of ``{u in S^{d-1} : <u, v> >= epsilon}``.

    Uses ``I_{1-eps^2}((d-1)/2, 1/2) / 2`` with ``I`` the regularized
    incomplete beta function.
    """
    epsilon = _check_eps(epsilon)
    if d < 2:
        raise DomainError("cap_fraction_exact needs d >= 2")
    if epsilon == 0.0:
        return 0.5
    if epsilon == 1.0:
        return 0.0
    return 0.5 * float(betainc((d - 1) / 2.0, 0.5, 1.0 - epsilon * epsilon))


def visible_fraction_from_point(p) -> float:
    p = as_vec(p)
    r = float(np.linalg.norm(p))
    if r <= 1.0:
        return 0.0
    if p.size == 1:
        # the 0-sphere {-1, +1}: one of two points
        return 0.5
    return cap_fraction_exact(p.size, 1.0 / r)


# --------------------------------------------------------------------------
# coverage


@dataclass
class CoverageReport:
    mode: str
    n_samples: int
    seed: int
    fraction_visible: float
    min_support_margin: float
    uncovered_witnesses: list[Direction] = field(default_factory=list)
    verdict: bool = False

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "fraction_visible": self.fraction_visible,
            "min_support_margin": self.min_support_margin,
            "uncovered_witnesses": [w.unit.tolist() for w in self.uncovered_witnesses],
            "verdict": self.verdict,
        }


def support_margin(path: Polyline, q) -> float:
    """``max_v <v, q> - 1`` over the path's vertices."""
    u = q.unit if isinstance(q, Direction) else Direction(q).unit
    if u.size != path.dimension:
        raise DomainError("dimension mismatch")
    return float(np.max(path.vertices @ u)) - 1.0


def _candidate_vertices(path: Polyline) -> np.ndarray:
    return np.unique(path.vertices, axis=0)


def covers(
    path: Polyline,
    mode: str = SAMPLED,
    n_samples: int = 100_000,
    seed: int = 0,
    workers: int = 1,
    tol: float = ATOL,
) -> CoverageReport:
    """Decide whether ``path`` views every point of the unit sphere.

    ``sampled`` tests ``n_samples`` seeded directions against the vertices
    (a segment's largest inner product is at an endpoint). ``exact-low-d``
    decides d <= 3 exactly; its ``fraction_visible`` is exact in 2-D and a
    sampled estimate in 3-D when the path does not cover.
    """
    if mode == SAMPLED:
        return _covers_sampled(path, n_samples, seed, workers, tol)
    if mode == EXACT:
        d = path.dimension
        if d > 3:
            raise UnsupportedModeError(f"exact coverage is only available for d <= 3 (got d={d})")
        return {1: _covers_exact_1d, 2: _covers_exact_2d, 3: _covers_exact_3d}[d](path, seed, tol)
    raise UnsupportedModeError(f"unknown coverage mode {mode!r}")


def _covers_sampled(path: Polyline, n: int, seed: int, workers: int, tol: float = ATOL) -> CoverageReport:
    if n < 1:
        raise DomainError("n_samples must be >= 1")
    verts = _candidate_vertices(path)

    def block(q):
        margins = (q @ verts.T).max(axis=1) - 1.0
        bad = np.flatnonzero(margins < -tol)
        order = bad[np.argsort(margins[bad], kind="stable")][:MAX_WITNESSES]
        return (
            int((margins >= -tol).sum()),
            float(margins.min()),
            q[order],
            margins[order],
        )

    parts = _reduce_blocks(path.dimension, n, seed, workers, block)
    visible = sum(p[0] for p in parts)
    min_margin = min(p[1] for p in parts)
    wq = np.vstack([p[2] for p in parts])
    wm = np.concatenate([p[3] for p in parts])
    keep = np.argsort(wm, kind="stable")[:MAX_WITNESSES]
    witnesses = [Direction(row) for row in wq[keep]]
    return CoverageReport(
        mode=SAMPLED,
        n_samples=n,
        seed=seed,
        fraction_visible=visible / n,
        min_support_margin=min_margin,
        uncovered_witnesses=witnesses,
        verdict=not witnesses,
    )


def _exact_report(margin, witnesses, fraction, seed, tol) -> CoverageReport:
    witnesses = witnesses[:MAX_WITNESSES]
    verdict = margin >= -tol and not witnesses
    return CoverageReport(
        mode=EXACT,
        n_samples=0,
        seed=seed,
        fraction_visible=1.0 if verdict else fraction,
        min_support_margin=margin,
        uncovered_witnesses=[] if verdict else witnesses,
        verdict=verdict,
    )


def _covers_exact_1d(path: Polyline, seed: int, tol: float) -> CoverageReport:
    x = path.vertices[:, 0]
    hi, lo = float(x.max()), float(x.min())
    margins = {1.0: hi - 1.0, -1.0: -lo - 1.0}
    witnesses = [Direction([s]) for s, m in margins.items() if m < -tol]
    fraction = sum(m >= -tol for m in margins.values()) / 2.0
    return _exact_report(min(margins.values()), witnesses, fraction, seed, tol)


def _hull_2d(points: np.ndarray) -> np.ndarray:
    """Counter-clockwise convex hull (monotone chain), collinear points dropped."""
    pts = sorted(set(map(tuple, points)))
    if len(pts) <= 2:
        return np.array(pts, dtype=float)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1], dtype=float)


def _min_support_2d(verts: np.ndarray) -> tuple[float, np.ndarray | None]:
    """Minimum over unit q of ``max_v <v, q>`` and a minimizing q."""
    hull = _hull_2d(verts)
    if len(hull) < 3:
        return 0.0, None
    a, b = hull, np.roll(hull, -1, axis=0)
    e = b - a
    normals = np.column_stack([e[:, 1], -e[:, 0]])  # outward for ccw order
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    dist = np.einsum("ij,ij->i", normals, a)
    i = int(np.argmin(dist))
    return float(dist[i]), normals[i]


def _covers_exact_2d(path: Polyline, seed: int, tol: float) -> CoverageReport:
    verts = _candidate_vertices(path)
    norms = np.linalg.norm(verts, axis=1)
    far = norms > 1.0
    centers = np.arctan2(verts[far, 1], verts[far, 0])
    half = np.arccos(1.0 / norms[far])
    two_pi = 2 * np.pi
    start = np.mod(centers - half, two_pi)
    end = start + 2 * half
    # split arcs that run past 2*pi, then sweep [0, 2*pi] left to right
    wraps = end > two_pi
    lo = np.concatenate([start, np.zeros(int(wraps.sum()))])
    hi = np.concatenate([np.minimum(end, two_pi), end[wraps] - two_pi])
    order = np.argsort(lo, kind="stable")
    gaps = []
    reach = 0.0
    for s_, e_ in zip(lo[order], hi[order]):
        if s_ > reach + tol:
            gaps.append((reach, s_))
        reach = max(reach, e_)
    if two_pi > reach + tol:
        gaps.append((reach, two_pi))
    # a gap touching 0 and one touching 2*pi are the same gap
    if len(gaps) >= 2 and gaps[0][0] == 0.0 and gaps[-1][1] == two_pi:
        first = gaps.pop(0)
        last = gaps.pop()
        gaps.append((last[0], first[1] + two_pi))

    covered = 2 * np.pi - sum(b - a for a, b in gaps)
    fraction = min(max(covered / (2 * np.pi), 0.0), 1.0)
    h_min, q_min = _min_support_2d(verts)
    margin = h_min - 1.0
    witnesses = []
    if gaps:
        gaps.sort(key=lambda g: g[0] - g[1])
        for a, b in gaps:
            mid = 0.5 * (a + b)
            witnesses.append(Direction([math.cos(mid), math.sin(mid)]))
    elif margin < -tol:
        witnesses.append(Direction(q_min))
    return _exact_report(margin, witnesses, fraction, seed, tol)


def _supporting_facets_3d(verts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unit outward normals and origin distances of supporting planes.

    Every vertex triple spanning a plane is tested; the plane is kept when
    all vertices lie on one side of it.
    """
    n = len(verts)
    if n < 3:
        return np.empty((0, 3)), np.empty(0)
    i, j, k = np.array(
        [(a, b, c) for a in range(n) for b in range(a + 1, n) for c in range(b + 1, n)]
    ).T
    nrm = np.cross(verts[j] - verts[i], verts[k] - verts[i])
    length = np.linalg.norm(nrm, axis=1)
    scale = np.maximum(1.0, np.abs(verts).max()) ** 2
    ok = length > 1e-12 * scale
    nrm = nrm[ok] / length[ok, None]
    off = np.einsum("ij,ij->i", nrm, verts[i[ok]])
    normals, dists = [], []
    for start in range(0, len(nrm), 2048):
        nb, ob = nrm[start : start + 2048], off[start : start + 2048]
        side = verts @ nb.T - ob  # (n_verts, batch)
        tol = ATOL * max(1.0, float(np.abs(verts).max()))
        below = np.all(side <= tol, axis=0)
        above = np.all(side >= -tol, axis=0)
        normals.append(np.where(below[:, None], nb, -nb)[below | above])
        dists.append(np.where(below, ob, -ob)[below | above])
    normals = np.vstack(normals) if normals else np.empty((0, 3))
    dists = np.concatenate(dists) if dists else np.empty(0)
    return normals, dists


def _covers_exact_3d(path: Polyline, seed: int, tol: float) -> CoverageReport:
    verts = _candidate_vertices(path)
    normals, dists = _supporting_facets_3d(verts)
    # the origin is a vertex, so facet distances are >= 0; a planar or
    # lower-dimensional hull has no facets and leaves directions with h(q) = 0
    full_dim = normals.shape[0] > 0 and np.linalg.matrix_rank(verts, tol=1e-9) == 3
    witnesses: list[Direction] = []
    if full_dim:
        margin = float(dists.min()) - 1.0
        bad = np.flatnonzero(dists - 1.0 < -tol)
        # worst facets first; ties broken by descending normal coordinates
        keys = [tuple(-np.round(normals[i], 9)) for i in bad]
        bad = [i for _, _, i in sorted(zip(np.round(dists[bad], 12), keys, bad))]
        seen = set()
        for b in bad:
            key = tuple(np.round(normals[b], 9))
            if key not in seen:
                seen.add(key)
                witnesses.append(Direction(normals[b]))
    else:
        margin = -1.0
        witnesses = _degenerate_witnesses(verts)
    fraction = 1.0
    if witnesses:
        # measure of the viewed set is not closed-form here; estimate it
        fraction = _covers_sampled(Polyline(np.vstack([np.zeros(3), verts])), 20_000, seed, 1, tol).fraction_visible
    return _exact_report(margin, witnesses, fraction, seed, tol)


def _degenerate_witnesses(verts: np.ndarray) -> list[Direction]:
    """Directions with zero support for a hull of dimension < 3."""
    d = verts.shape[1]
    out = []
    centroid = verts.mean(axis=0)
    if np.linalg.norm(centroid) > 0:
        c = -centroid / np.linalg.norm(centroid)
        if np.max(verts @ c) <= ATOL:
            out.append(Direction(c))
    _, s, vt = np.linalg.svd(verts, full_matrices=True)
    rank = int(np.sum(s > 1e-9 * max(1.0, s.max() if s.size else 1.0)))
    for row in vt[rank:d]:
        out.extend([Direction(row), Direction(-row)])
    return out


# --------------------------------------------------------------------------
# competitive ratio


@dataclass
class RatioReport:
    sup_ratio: float | None
    unbounded: bool
    argmax_hyperplane: Hyperplane | None
    grid: dict
    seed: int

    def to_dict(self) -> dict:
        return {
            "sup_ratio": self.sup_ratio,
            "unbounded": self.unbounded,
            "argmax_hyperplane": None if self.argmax_hyperplane is None else self.argmax_hyperplane.to_dict(),
            "grid": self.grid,
            "seed": self.seed,
        }


def _direction_ratios(path: Polyline, u: np.ndarray, offsets: np.ndarray):
    """First-hit arc length divided by offset, for hyperplanes ``(u, r)``.

    Returns an array with ``inf`` where the hyperplane is never reached.
    """
    a = path.vertices @ u
    run = np.maximum.accumulate(a)
    j = np.searchsorted(run, offsets - ATOL, side="left")
    out = np.full(offsets.shape, np.inf)
    hit = j < a.size
    jh = j[hit]
    k = np.maximum(jh - 1, 0)
    denom = a[jh] - a[k]
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.where(denom > 0, (offsets[hit] - a[k]) / denom, 0.0)
    lam = np.clip(lam, 0.0, 1.0)
    cum = path.cum_length
    s = cum[k] + lam * (cum[jh] - cum[k])
    out[hit] = s / offsets[hit]
    return out


def _record_offsets(path: Polyline, u: np.ndarray, r_max: float) -> np.ndarray:
    """Offsets just past each running-maximum value of ``<v, u>``.

    The ratio jumps up right after the path turns back from a record, so the
    supremum over offsets is approached from these points.
    """
    a = path.vertices @ u
    run = np.maximum.accumulate(a)
    rec = np.unique(run[(run >= 1.0) & (run < r_max)])
    return rec * (1.0 + 1e-12) + 1e-12


def worst_case_ratio(
    path: Polyline,
    n_directions: int = 256,
    offsets_per_direction: int = 64,
    seed: int = 0,
    *,
    r_max: float | None = None,
    directions=None,
    refine: bool = True,
    workers: int = 1,
) -> RatioReport:
    """Largest sampled ``first_hit / r`` over hyperplanes ``(u, r)``.

    Offsets are log-uniform in ``[1, r_max]`` plus, with ``refine``, the
    points just past every record of ``<P(t), u>``. By default ``r_max`` is
    the smallest support value over the sampled directions, the largest
    radius at which every sampled hyperplane can still be reached.
    """
    d = path.dimension
    if directions is None:
        if d == 1:
            dirs = np.array([[1.0], [-1.0]])
        else:
            dirs = sample_sphere(d, n_directions, seed, workers)
    else:
        dirs = np.array([(q.unit if isinstance(q, Direction) else Direction(q).unit) for q in directions])
    support = (dirs @ path.vertices.T).max(axis=1)
    r_hi = float(support.min()) if r_max is None else float(r_max)
    grid = {
        "n_directions": int(len(dirs)),
        "offsets_per_direction": int(offsets_per_direction),
        "offset_law": "log-uniform",
        "r_min": 1.0,
        "r_max": r_hi,
        "refine": refine,
    }
    if r_hi < 1.0:
        i = int(np.argmin(support))
        return RatioReport(None, True, Hyperplane(Direction(dirs[i]), 1.0), grid, seed)

    rng = np.random.Generator(np.random.Philox(key=(seed + 1) & _MASK64, counter=1 << 255))
    base = np.exp(rng.uniform(0.0, math.log(r_hi), size=(len(dirs), offsets_per_direction)))
    best, best_h = -np.inf, None
    for i, u in enumerate(dirs):
        offs = np.concatenate([[1.0, r_hi], base[i]])
        if refine:
            offs = np.concatenate([offs, _record_offsets(path, u, r_hi)])
        offs = offs[offs <= r_hi]
        ratios = _direction_ratios(path, u, offs)
        k = int(np.argmax(ratios))
        if ratios[k] > best:
            best, best_h = float(ratios[k]), Hyperplane(Direction(u), float(offs[k]))
        if math.isinf(best):
            return RatioReport(None, True, best_h, grid, seed)
    return RatioReport(best, False, best_h, grid, seed)
