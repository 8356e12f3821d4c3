import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from voroscape.errors import DegenerateInputError, UnboundedCellError
from voroscape.geometry import (Frame, PolytopeCell, Simplex, affine_basis,
                                circumsphere, clip_polygon_halfspace,
                                frame_projection_volume, orthonormalize,
                                polygon_area, polygon_disk_area,
                                polytope_volume, simplex_volume)
from voroscape.moments import sample_stiefel


def rand_rotation(d, rng):
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


# ---------------- simplex volume ----------------

def test_segment_length():
    s = Simplex(np.array([[0.0, 0.0], [3.0, 0.0]]))
    assert simplex_volume(s) == pytest.approx(3.0, rel=1e-14)


def test_unit_corner_simplex():
    v = np.vstack([np.zeros(3), np.eye(3)])
    assert abs(simplex_volume(Simplex(v)) - 1.0 / 6.0) < 1e-15


def test_right_triangle_area():
    s = Simplex(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    assert abs(simplex_volume(s) - 0.5) < 1e-15


def test_degenerate_simplex_zero_volume():
    s = Simplex(np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]))
    assert s.degenerate
    assert simplex_volume(s) == 0.0


def test_volume_permutation_and_rigid_motion_invariant():
    rng = np.random.default_rng(0)
    for _ in range(20):
        k, d = rng.integers(1, 4), 4
        v = rng.standard_normal((k + 1, d))
        base = simplex_volume(Simplex(v))
        perm = rng.permutation(k + 1)
        assert abs(simplex_volume(Simplex(v[perm])) - base) < 1e-9 * base
        q = rand_rotation(d, rng)
        t = rng.standard_normal(d)
        moved = v @ q.T + t
        assert abs(simplex_volume(Simplex(moved)) - base) < 1e-9 * base


# ---------------- circumsphere ----------------

def test_circumsphere_hand_triangle():
    s = Simplex(np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 2.0]]))
    c, r = circumsphere(s)
    assert np.allclose(c, [1.0, 0.75], atol=1e-12)
    assert abs(r - 1.25) < 1e-12


def test_circumsphere_right_triangle():
    s = Simplex(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    c, r = circumsphere(s)
    assert np.allclose(c, [0.5, 0.5], atol=1e-12)
    assert abs(r - np.sqrt(2) / 2) < 1e-12


def test_circumsphere_segment_midpoint():
    c, r = circumsphere(Simplex(np.array([[0.0, 0.0], [2.0, 0.0]])))
    assert np.allclose(c, [1.0, 0.0]) and abs(r - 1.0) < 1e-15


def test_circumsphere_degenerate_raises():
    s = Simplex(np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]))
    with pytest.raises(DegenerateInputError, match="degenerate simplex"):
        circumsphere(s)


def test_circumsphere_equidistance_random():
    # center must sit in the affine hull and be equidistant from vertices
    rng = np.random.default_rng(1)
    for _ in range(50):
        k = int(rng.integers(1, 5))
        d = int(rng.integers(k, 6))
        v = rng.standard_normal((k + 1, d))
        if Simplex(v).degenerate:
            continue
        c, r = circumsphere(Simplex(v))
        dist = np.linalg.norm(v - c, axis=1)
        assert np.all(np.abs(dist - r) < 1e-9 * max(r, 1.0))
        b = affine_basis(v).rows
        rel = c - v[0]
        assert np.linalg.norm(rel - (rel @ b.T) @ b) < 1e-8


# ---------------- frame projection volume ----------------

def test_projection_identity():
    f = Frame(np.eye(3)[:2])
    assert frame_projection_volume(f, f) == pytest.approx(1.0)


def test_projection_orthogonal_lines():
    f = Frame(np.array([[1.0, 0.0]]))
    g = Frame(np.array([[0.0, 1.0]]))
    assert frame_projection_volume(f, g) == pytest.approx(0.0, abs=1e-15)


def test_projection_line_angle():
    for t in np.linspace(0, 2 * np.pi, 17):
        f = Frame(np.array([[np.cos(t), np.sin(t)]]))
        g = Frame(np.array([[1.0, 0.0]]))
        assert frame_projection_volume(f, g) == pytest.approx(abs(np.cos(t)), abs=1e-12)


def test_projection_symmetry_random():
    rng = np.random.default_rng(2)
    for _ in range(50):
        p = int(rng.integers(1, 4))
        d = int(rng.integers(p, 7))
        f = sample_stiefel(p, d, rng)
        g = sample_stiefel(p, d, rng)
        a = frame_projection_volume(f, g)
        b = frame_projection_volume(g, f)
        assert abs(a - b) < 1e-12
        assert -1e-12 <= a <= 1.0 + 1e-12


def test_projection_dimension_mismatch():
    f = Frame(np.eye(2))
    g = Frame(np.eye(3)[:2])
    with pytest.raises(ValueError):
        frame_projection_volume(f, g)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 8), st.integers(0, 10**9))
def test_cauchy_binet(d, seed):
    # sum of squared p-minors over all coordinate p-subsets is 1
    rng = np.random.default_rng(seed)
    p = int(rng.integers(1, d + 1))
    f = sample_stiefel(p, d, rng).rows
    total = 0.0
    for cols in itertools.combinations(range(d), p):
        total += np.linalg.det(f[:, cols]) ** 2
    assert abs(total - 1.0) < 1e-9


# ---------------- polytope volume ----------------

def test_square_in_plane_z1():
    v = np.array([[0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1]], dtype=float)
    cell = PolytopeCell(v, Frame(np.eye(3)[:2]))
    assert polytope_volume(cell) == pytest.approx(1.0, rel=1e-12)


def test_segment_in_r4():
    v = np.zeros((2, 4))
    v[1] = [3.0, 0.0, 4.0, 0.0]
    cell = PolytopeCell(v, Frame((v[1] / 5.0)[None, :]))
    assert polytope_volume(cell) == pytest.approx(5.0, rel=1e-12)


def test_regular_hexagon():
    t = np.arange(6) * np.pi / 3.0
    v = np.column_stack([np.cos(t), np.sin(t)])
    cell = PolytopeCell(v, Frame(np.eye(2)))
    assert polytope_volume(cell) == pytest.approx(3 * np.sqrt(3) / 2, rel=1e-12)


def test_unbounded_cell_raises():
    v = np.array([[0.0, 0.0], [1.0, 0.0]])
    cell = PolytopeCell(v, Frame(np.eye(2)), bounded=False,
                        rays=np.array([[0.0, 1.0]]))
    with pytest.raises(UnboundedCellError, match="unbounded"):
        polytope_volume(cell)


# ---------------- orthonormalize ----------------

def test_orthonormalize_axis_scaled():
    f = orthonormalize(np.array([[2.0, 0.0], [0.0, 3.0]]))
    assert np.allclose(f.rows, np.eye(2), atol=1e-15)


def test_orthonormalize_diagonal():
    f = orthonormalize(np.array([[1.0, 1.0, 0.0]]))
    assert np.allclose(f.rows, [[1 / np.sqrt(2), 1 / np.sqrt(2), 0.0]])


def test_orthonormalize_gram_schmidt():
    f = orthonormalize(np.array([[1.0, 0.0], [1.0, 1.0]]))
    assert np.allclose(np.abs(f.rows), np.eye(2), atol=1e-12)
    assert np.allclose(f.rows[0], [1.0, 0.0])


def test_orthonormalize_rank_deficient():
    with pytest.raises(ValueError, match="rank deficient"):
        orthonormalize(np.array([[1.0, 1.0], [2.0, 2.0]]))


def test_orthonormalize_spans_same_subspace():
    rng = np.random.default_rng(3)
    for _ in range(20):
        p, d = 2, 5
        v = rng.standard_normal((p, d))
        f = orthonormalize(v)
        # each input vector reconstructs from the frame
        coef = v @ f.rows.T
        assert np.linalg.norm(coef @ f.rows - v) < 1e-9


# ---------------- polygon helpers ----------------

def test_clip_polygon_halfspace_square():
    sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    half = clip_polygon_halfspace(sq, np.array([1.0, 0.0]), 0.5)
    assert polygon_area(half) == pytest.approx(0.5)


def test_polygon_disk_area_exact():
    # big square clipped to unit disk: area pi; tiny square: own area
    big = np.array([[-2, -2], [2, -2], [2, 2], [-2, 2]], dtype=float)
    assert polygon_disk_area(big, np.zeros(2), 1.0) == pytest.approx(np.pi, rel=1e-12)
    small = 0.1 * big
    assert polygon_disk_area(small, np.zeros(2), 1.0) == pytest.approx(
        polygon_area(small), rel=1e-12)


def test_polygon_disk_area_half_plane_limit():
    # square [0,2]x[-2,2] against unit disk centered origin: half disk
    sq = np.array([[0, -2], [2, -2], [2, 2], [0, 2]], dtype=float)
    assert polygon_disk_area(sq, np.zeros(2), 1.0) == pytest.approx(np.pi / 2, rel=1e-12)


def test_polygon_disk_area_orientation_free():
    sq = np.array([[0, -2], [2, -2], [2, 2], [0, 2]], dtype=float)
    a1 = polygon_disk_area(sq, np.zeros(2), 1.0)
    a2 = polygon_disk_area(sq[::-1], np.zeros(2), 1.0)
    assert a1 == pytest.approx(a2, rel=1e-14)


def test_polygon_disk_area_montecarlo_crosscheck():
    rng = np.random.default_rng(4)
    for _ in range(5):
        v = rng.uniform(-1, 1, size=(3, 2)) * 1.5
        if polygon_area(v) < 0.1:
            continue
        exact = polygon_disk_area(v, np.zeros(2), 1.0)
        pts = rng.uniform(-1.5, 1.5, size=(200000, 2))
        signed = np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1])
        sv = v if signed > 0 else v[::-1]
        inside = np.ones(len(pts), dtype=bool)
        for i in range(3):
            e = sv[(i + 1) % 3] - sv[i]
            inside &= (pts - sv[i])[:, 0] * e[1] - (pts - sv[i])[:, 1] * e[0] <= 0
        inside &= np.einsum("ij,ij->i", pts, pts) <= 1.0
        mc = inside.mean() * 9.0
        assert abs(mc - exact) < 5 * 9.0 * np.sqrt(max(inside.mean(), 1e-9) / 200000) + 1e-3
