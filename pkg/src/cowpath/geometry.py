"""Vectors, directions, polylines and hyperplanes.

Points are plain 1-D numpy arrays. A point ``p`` views a sphere point ``q``
when ``<p, q> >= 1``; everything else in the package is built on that test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# absolute slack at predicate boundaries
ATOL = 1e-9
# normalization slack for unit vectors
UNIT_ATOL = 1e-12


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


def as_vec(x, dim: int | None = None) -> np.ndarray:
    v = np.array(x, dtype=float).reshape(-1)
    if v.size == 0:
        raise DomainError("vector must have at least one coordinate")
    if not np.all(np.isfinite(v)):
        raise DomainError("vector coordinates must be finite")
    if dim is not None and v.size != dim:
        raise DomainError(f"dimension mismatch: expected {dim}, got {v.size}")
    return v


class Direction:
    """A unit vector on the sphere S^{d-1}."""

    __slots__ = ("unit",)

    def __init__(self, x):
        v = as_vec(x)
        n = float(np.linalg.norm(v))
        if n == 0.0:
            raise DomainError("cannot normalize the zero vector")
        v = v / n
        v.setflags(write=False)
        self.unit = v

    @classmethod
    def axis(cls, d: int, i: int, sign: float = 1.0) -> "Direction":
        e = np.zeros(d)
        e[i] = sign
        return cls(e)

    @property
    def dim(self) -> int:
        return self.unit.size

    def __neg__(self) -> "Direction":
        return Direction(-self.unit)

    def __eq__(self, other) -> bool:
        return isinstance(other, Direction) and np.array_equal(self.unit, other.unit)

    def __hash__(self) -> int:
        return hash(self.unit.tobytes())

    def __repr__(self) -> str:
        return f"Direction({self.unit.tolist()})"


def _unit(q) -> np.ndarray:
    return q.unit if isinstance(q, Direction) else Direction(q).unit


@dataclass(frozen=True)
class Hyperplane:
    """The hyperplane ``{x : <x, normal> = offset}`` at distance ``offset >= 1``."""

    normal: Direction
    offset: float = 1.0

    def __post_init__(self):
        if not isinstance(self.normal, Direction):
            object.__setattr__(self, "normal", Direction(self.normal))
        if not self.offset >= 1.0:
            raise DomainError(f"hyperplane offset must be >= 1, got {self.offset}")

    def to_dict(self) -> dict:
        return {"normal": self.normal.unit.tolist(), "offset": float(self.offset)}


class Polyline:
    """A path from the origin through an ordered list of vertices.

    Cumulative arc lengths are always recomputed from the vertices.
    Repeated consecutive vertices are allowed.
    """

    __slots__ = ("vertices", "cum_length")

    def __init__(self, vertices, *, prepend_origin: bool = False):
        v = np.array(vertices, dtype=float)
        if v.ndim == 1:
            v = v.reshape(-1, 1)
        if v.ndim != 2 or v.shape[0] == 0 or v.shape[1] == 0:
            raise DomainError("vertices must be a non-empty (n, d) array")
        if not np.all(np.isfinite(v)):
            raise DomainError("vertex coordinates must be finite")
        if prepend_origin:
            v = np.vstack([np.zeros((1, v.shape[1])), v])
        elif np.any(v[0] != 0.0):
            raise DomainError("a path must start at the origin")
        seg = np.linalg.norm(np.diff(v, axis=0), axis=1)
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        v.setflags(write=False)
        cum.setflags(write=False)
        self.vertices = v
        self.cum_length = cum

    @property
    def dimension(self) -> int:
        return self.vertices.shape[1]

    @property
    def length(self) -> float:
        return float(self.cum_length[-1])

    @property
    def segment_lengths(self) -> np.ndarray:
        return np.diff(self.cum_length)

    def __len__(self) -> int:
        return self.vertices.shape[0]

    def __repr__(self) -> str:
        return f"Polyline(d={self.dimension}, n={len(self)}, length={self.length:.6g})"


def _check_dim(path: Polyline, x: np.ndarray) -> None:
    if x.shape[-1] != path.dimension:
        raise DomainError(
            f"dimension mismatch: path is {path.dimension}-d, argument is {x.shape[-1]}-d"
        )


def locate(path: Polyline, s: float) -> tuple[int, float]:
    """Return ``(k, lam)`` so that arc length ``s`` lies on segment ``k`` at fraction ``lam``.

    Zero-length segments are never returned for ``s > 0``.
    """
    total = path.length
    if not (0.0 <= s <= total + ATOL * max(1.0, total)):
        raise DomainError(f"arc length {s} outside [0, {total}]")
    cum = path.cum_length
    if len(path) == 1 or s <= 0.0:
        return 0, 0.0
    s = min(s, total)
    # first vertex whose cumulative length reaches s
    j = int(np.searchsorted(cum, s, side="left"))
    j = max(j, 1)
    k = j - 1
    seg = cum[j] - cum[k]
    lam = 1.0 if seg == 0.0 else (s - cum[k]) / seg
    return k, min(max(lam, 0.0), 1.0)


def point_at(path: Polyline, s: float) -> np.ndarray:
    """Point at arc length ``s`` along ``path``, linearly interpolated."""
    k, lam = locate(path, s)
    v = path.vertices
    if len(path) == 1:
        return v[0].copy()
    return v[k] + lam * (v[k + 1] - v[k])


def sees(p, q) -> bool:
    p = as_vec(p)
    u = _unit(q)
    if p.size != u.size:
        raise DomainError(f"dimension mismatch: {p.size} vs {u.size}")
    return bool(p @ u >= 1.0 - ATOL)


def first_hit(path: Polyline, h: Hyperplane) -> float | None:
    """Smallest arc length at which ``path`` reaches ``h``, or ``None``."""
    u = h.normal.unit
    _check_dim(path, u)
    a = path.vertices @ u
    r = h.offset
    idx = np.flatnonzero(a >= r - ATOL)
    if idx.size == 0:
        return None
    j = int(idx[0])
    if j == 0:
        return 0.0
    k = j - 1
    lam = (r - a[k]) / (a[j] - a[k])
    lam = min(max(lam, 0.0), 1.0)
    return float(path.cum_length[k] + lam * (path.cum_length[j] - path.cum_length[k]))


def dual_hyperplane(q) -> Hyperplane:
    return Hyperplane(q if isinstance(q, Direction) else Direction(q), 1.0)


def project(x, u) -> np.ndarray:
    """Component of ``x`` orthogonal to ``u`` (ambient coordinates kept)."""
    x = np.asarray(x, dtype=float)
    w = _unit(u)
    if x.shape[-1] != w.size:
        raise DomainError(f"dimension mismatch: {x.shape[-1]} vs {w.size}")
    return x - np.multiply.outer(x @ w, w) if x.ndim > 1 else x - (x @ w) * w


def project_path(path: Polyline, u) -> Polyline:
    w = _unit(u)
    _check_dim(path, w)
    v = project(path.vertices, w)
    # the origin stays at the origin; kill rounding residue
    v[0] = 0.0
    return Polyline(v)


def max_norm(path: Polyline) -> float:
    """Largest distance from the origin reached anywhere along the path."""
    return float(np.max(np.linalg.norm(path.vertices, axis=1)))
