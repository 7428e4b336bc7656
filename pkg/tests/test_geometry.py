import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cowpath.geometry import (
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


def e(d, i):
    v = np.zeros(d)
    v[i] = 1.0
    return v


def random_path(rng, d, n):
    return Polyline(np.vstack([np.zeros(d), rng.normal(size=(n, d))]))


# -- construction -----------------------------------------------------------


def test_direction_is_normalized():
    q = Direction([3.0, 4.0])
    assert abs(np.linalg.norm(q.unit) - 1) <= 1e-12
    np.testing.assert_allclose(q.unit, [0.6, 0.8])


@pytest.mark.parametrize("bad", [[0.0, 0.0], [np.nan, 1.0], [np.inf, 0.0], []])
def test_direction_rejects_degenerate(bad):
    with pytest.raises(DomainError):
        Direction(bad)


def test_polyline_must_start_at_origin():
    with pytest.raises(DomainError):
        Polyline([[1.0, 0.0], [2.0, 0.0]])
    p = Polyline([[1.0, 0.0]], prepend_origin=True)
    assert p.vertices[0].tolist() == [0.0, 0.0]


def test_polyline_cumulative_lengths():
    p = Polyline([[0, 0], [3, 4], [3, 4], [3, 0]])
    assert p.cum_length.tolist() == [0.0, 5.0, 5.0, 9.0]
    assert p.length == 9.0
    assert p.dimension == 2


def test_polyline_is_immutable():
    p = Polyline([[0, 0], [1, 0]])
    with pytest.raises(ValueError):
        p.vertices[1, 0] = 5.0


def test_hyperplane_offset_at_least_one():
    with pytest.raises(DomainError):
        Hyperplane(Direction([1, 0]), 0.5)
    assert Hyperplane([2.0, 0.0], 1.0).normal == Direction([1, 0])


# -- point_at ---------------------------------------------------------------


def test_point_at_origin():
    p = Polyline([[0, 0], [3, 0], [3, 3]])
    assert point_at(p, 0).tolist() == [0.0, 0.0]


def test_point_at_interpolates():
    assert point_at(Polyline([[0, 0], [3, 0]]), 1).tolist() == [1.0, 0.0]
    assert point_at(Polyline([[0, 0], [1, 0], [1, 2]]), 2).tolist() == [1.0, 1.0]


def test_point_at_skips_zero_length_segments():
    p = Polyline([[0, 0], [1, 0], [1, 0], [1, 1]])
    np.testing.assert_allclose(point_at(p, 1.5), [1.0, 0.5])
    np.testing.assert_allclose(point_at(p, 1.0), [1.0, 0.0])


def test_point_at_out_of_range():
    p = Polyline([[0, 0], [1, 0]])
    with pytest.raises(DomainError):
        point_at(p, 1.5)
    with pytest.raises(DomainError):
        point_at(p, -0.1)


def test_point_at_single_vertex_path():
    p = Polyline([[0.0, 0.0, 0.0]])
    assert point_at(p, 0).tolist() == [0.0, 0.0, 0.0]


# -- sees ---------------------------------------------------------------------


def test_sees_examples():
    assert sees(2 * e(2, 0), Direction(e(2, 0)))
    assert not sees(2 * e(2, 0), Direction(e(2, 1)))
    assert sees(e(2, 0), Direction(e(2, 0)))  # boundary counts


def test_sees_dimension_mismatch():
    with pytest.raises(DomainError):
        sees([1.0, 0.0, 0.0], Direction([1.0, 0.0]))


# -- first_hit ------------------------------------------------------------------


def test_first_hit_examples():
    h = Hyperplane(Direction([1, 0]), 1.0)
    assert first_hit(Polyline([[0, 0], [3, 0]]), h) == pytest.approx(1.0)
    assert first_hit(Polyline([[0, 0], [0, 3]]), h) is None
    back = Hyperplane(Direction([-1, 0]), 1.0)
    assert first_hit(Polyline([[0, 0], [2, 0], [-4, 0]]), back) == pytest.approx(5.0)


def test_first_hit_matches_dense_scan():
    rng = np.random.default_rng(3)
    for _ in range(50):
        path = random_path(rng, 3, 6)
        u = Direction(rng.normal(size=3))
        r = float(rng.uniform(1.0, 2.0))
        got = first_hit(path, Hyperplane(u, r))
        s = np.linspace(0, path.length, 20001)
        vals = np.array([point_at(path, x) @ u.unit for x in s])
        idx = np.flatnonzero(vals >= r)
        if idx.size == 0:
            assert got is None
        else:
            assert got is not None
            assert s[idx[0]] - path.length / 20000 - 1e-9 <= got <= s[idx[0]] + 1e-9


# -- duality ------------------------------------------------------------------


def test_dual_hyperplane():
    h = dual_hyperplane(Direction([1, 0]))
    assert h.offset == 1.0 and h.normal == Direction([1, 0])


def test_duality_examples():
    q = Direction([1, 0])
    p = Polyline([[0, 0], [2, 0]])
    assert first_hit(p, dual_hyperplane(q)) == pytest.approx(1.0)
    assert sees(point_at(p, 1.0), q)
    short = Polyline([[0, 0], [0.5, 0]])
    assert first_hit(short, dual_hyperplane(q)) is None
    assert not any(sees(point_at(short, s), q) for s in np.linspace(0, 0.5, 11))


def test_duality_consistency_random():
    rng = np.random.default_rng(11)
    for _ in range(500):
        d = int(rng.integers(2, 6))
        path = random_path(rng, d, 4)
        q = Direction(rng.normal(size=d))
        hit = first_hit(path, dual_hyperplane(q)) is not None
        assert hit == bool(np.any(path.vertices @ q.unit >= 1.0 - 1e-9))


def test_segment_max_is_at_endpoint():
    rng = np.random.default_rng(5)
    for _ in range(200):
        a, b = rng.normal(size=(2, 4))
        q = Direction(rng.normal(size=4)).unit
        lam = np.linspace(0, 1, 101)
        inner = (a + lam[:, None] * (b - a)) @ q
        assert inner.max() <= max(a @ q, b @ q) + 1e-12


# -- projection -----------------------------------------------------------------


def test_project_examples():
    u = Direction([1, 0])
    assert project([1.0, 0.0], u).tolist() == [0.0, 0.0]
    assert project([0.0, 1.0], u).tolist() == [0.0, 1.0]
    assert project([1.0, 1.0], u).tolist() == [0.0, 1.0]


def test_project_path_examples():
    u = Direction([1, 0])
    flat = project_path(Polyline([[0, 0], [3, 0]]), u)
    assert flat.length == 0.0
    assert np.all(flat.vertices == 0)
    p = project_path(Polyline([[0, 0], [1, 1]]), u)
    assert p.vertices.tolist() == [[0.0, 0.0], [0.0, 1.0]]
    assert p.length == 1.0 <= math.sqrt(2)


@settings(max_examples=200, deadline=None)
@given(
    x=st.lists(st.floats(-100, 100), min_size=3, max_size=3),
    u=st.lists(st.floats(-1, 1), min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 1e-3),
)
def test_project_never_lengthens(x, u):
    x = np.array(x)
    y = project(x, Direction(u))
    assert np.linalg.norm(y) <= np.linalg.norm(x) + 1e-9
    assert abs(y @ Direction(u).unit) <= 1e-9 * max(1.0, np.linalg.norm(x))


def test_project_norm_equality_iff_orthogonal():
    x = np.array([0.0, 2.0, -1.0])
    assert np.linalg.norm(project(x, Direction([1, 0, 0]))) == pytest.approx(np.linalg.norm(x))
    assert np.linalg.norm(project(x, Direction([0, 1, 0]))) < np.linalg.norm(x)


@pytest.mark.parametrize("d", [2, 8, 32])
def test_project_path_is_1_lipschitz(d):
    rng = np.random.default_rng(d)
    for _ in range(1000 // 3 + 1):
        path = random_path(rng, d, int(rng.integers(1, 8)))
        u = Direction(rng.normal(size=d))
        proj = project_path(path, u)
        assert proj.length <= path.length + 1e-9
        assert np.all(proj.vertices[0] == 0)
        np.testing.assert_allclose(proj.vertices @ u.unit, 0.0, atol=1e-9)
