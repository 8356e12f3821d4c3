import json

import numpy as np
import pytest

from voroscape.delaunay import (Mosaic, build_mosaic, circumradius_stats,
                                clipped_voronoi_volumes, export_mosaic_json,
                                nearest_site, pivot_point,
                                validate_empty_sphere, voronoi_dual)
from voroscape.errors import DegenerateInputError
from voroscape.geometry import circumsphere
from voroscape.pointproc import (Window, poisson, sample, unit_box_window,
                                 window_volume)

TRIANGLE = np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 2.0]])


def poisson_mosaic(d, rho, seed):
    pts = sample(poisson(rho), unit_box_window(d), seed)
    return build_mosaic(pts), pts


# ---------------- construction ----------------

def test_triangle_counts():
    m = build_mosaic(TRIANGLE)
    assert m.n_cells(0) == 3 and m.n_cells(1) == 3 and m.n_cells(2) == 1


def test_square_jitter_two_triangles():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    pts = pts + 1e-4 * np.array([[0.3, 0.1], [-0.2, 0.4], [0.1, -0.3], [0.2, 0.2]])
    m = build_mosaic(pts)
    assert m.n_cells(2) == 2
    assert len(set(m.cells[2][0]) & set(m.cells[2][1])) == 2  # shared diagonal


def test_random_instance_empty_sphere():
    m, _ = poisson_mosaic(2, 50, 0)
    assert validate_empty_sphere(m)


def test_collinear_rejected():
    pts = np.column_stack([np.arange(5.0), np.zeros(5)])
    with pytest.raises(DegenerateInputError, match="degenerate configuration"):
        build_mosaic(pts)


def test_too_few_points_rejected():
    with pytest.raises(ValueError):
        build_mosaic(np.array([[0.0, 0.0], [1.0, 0.0]]))


def test_high_dim_rejected():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        build_mosaic(rng.uniform(size=(20, 5)))


def test_matches_scipy_reference():
    from scipy.spatial import Delaunay
    pts = sample(poisson(200), unit_box_window(2), 3)
    m = build_mosaic(pts)
    ref = {tuple(sorted(s)) for s in Delaunay(pts).simplices.tolist()}
    got = {tuple(r) for r in m.cells[2].tolist()}
    assert got == ref


def test_cells_lexicographic_and_sorted_rows():
    m, _ = poisson_mosaic(2, 100, 1)
    for k, rows in m.cells.items():
        assert np.all(rows[:, :-1] < rows[:, 1:])  # each row sorted
        order = np.lexsort(rows.T[::-1])
        assert np.array_equal(order, np.arange(len(rows)))


def test_incidences_both_directions():
    m, _ = poisson_mosaic(2, 80, 2)
    tops = m.cells[2]
    for k in (0, 1):
        for idx in range(m.n_cells(k)):
            face = set(m.cells[k][idx].tolist())
            cof = m.cofaces_of(k, idx)
            for t in cof:
                assert face <= set(tops[t].tolist())
        # reverse: every top containing the face is listed
        for t, row in enumerate(tops):
            row = set(row.tolist())
            for idx in range(m.n_cells(k)):
                if set(m.cells[k][idx].tolist()) <= row:
                    assert t in m.cofaces_of(k, idx)


def test_every_low_cell_has_a_top_coface():
    for seed in range(3):
        m, _ = poisson_mosaic(2, 60, seed)
        for k in range(m.d):
            for idx in range(m.n_cells(k)):
                assert len(m.cofaces_of(k, idx)) >= 1


# ---------------- circumsphere data ----------------

def test_triangle_circumdata():
    m = build_mosaic(TRIANGLE)
    assert np.allclose(m.top_circumcenters[0], [1.0, 0.75], atol=1e-12)
    assert m.top_circumradii[0] == pytest.approx(1.25, rel=1e-12)


def test_circumradius_stats_equilateral():
    v = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])
    m = build_mosaic(v)
    mx, mean = circumradius_stats(m)
    assert mx == pytest.approx(1 / np.sqrt(3), rel=1e-12)
    assert mean == pytest.approx(1 / np.sqrt(3), rel=1e-12)


def test_circumradius_stats_two_cells():
    m, _ = poisson_mosaic(2, 30, 4)
    m.top_circumradii = np.array([1.0, 3.0])  # stats read this field only
    assert circumradius_stats(m) == (3.0, 2.0)


def test_flipped_diagonal_fails_validation():
    # strictly convex, non-cocircular quad: the anti-Delaunay diagonal must
    # be rejected by the brute-force empty-sphere check
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.1, 1.3], [-0.2, 1.0]])
    m = build_mosaic(pts)
    assert validate_empty_sphere(m)
    good = {tuple(r) for r in m.cells[2].tolist()}
    other = {(0, 1, 2), (0, 2, 3)} if good != {(0, 1, 2), (0, 2, 3)} \
        else {(0, 1, 3), (1, 2, 3)}
    flipped = np.array(sorted(other))
    centers, radii = [], []
    for tri in flipped:
        c, r = circumsphere(pts[tri])
        centers.append(c)
        radii.append(r)
    m.cells = dict(m.cells)
    m.cells[2] = flipped
    m.top_circumcenters = np.array(centers)
    m.top_circumradii = np.array(radii)
    assert not validate_empty_sphere(m)


def test_empty_sphere_single_cell_vacuous():
    m = build_mosaic(TRIANGLE)
    assert validate_empty_sphere(m)


# ---------------- duality ----------------

def test_dual_of_hull_edge_is_ray():
    m = build_mosaic(TRIANGLE)
    idx = m.cell_index(1, (0, 1))
    dual = voronoi_dual(m, 1, idx)
    assert not dual.bounded
    assert dual.vertices.shape == (1, 2)
    assert np.allclose(dual.vertices[0], [1.0, 0.75], atol=1e-12)
    assert dual.rays.shape == (1, 2)
    ray = dual.rays[0] / np.linalg.norm(dual.rays[0])
    assert np.allclose(ray, [0.0, -1.0], atol=1e-12)


def test_dual_of_top_cell_is_point():
    m = build_mosaic(TRIANGLE)
    dual = voronoi_dual(m, 2, 0)
    assert dual.bounded and dual.dim == 0
    assert np.allclose(dual.vertices[0], [1.0, 0.75])


def test_dual_of_interior_vertex_is_polygon():
    # center site of a 5-point configuration has a bounded Voronoi polygon
    pts = np.array([[0.5, 0.5], [0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    m = build_mosaic(pts)
    dual = voronoi_dual(m, 0, 0)
    assert dual.bounded and dual.dim == 2
    assert len(dual.vertices) >= 3


def test_duality_dimension_orthogonality_pivot():
    """dim + dim = d; aff(cell) perpendicular to aff(dual); pivot agrees from
    both sides. Checked on every cell of several mosaics in d=2,3."""
    for d, rho, seed in ((2, 120, 0), (2, 120, 1), (3, 250, 0)):
        m, pts = poisson_mosaic(d, rho, seed)
        for k in range(d + 1):
            for idx in range(m.n_cells(k)):
                dual = voronoi_dual(m, k, idx)
                if dual.bounded:
                    assert dual.dim == d - k
                basis = dual.direction_basis().rows
                cell_dirs = pts[m.cells[k][idx]]
                cell_basis = (cell_dirs[1:] - cell_dirs[0])
                if len(cell_basis) and len(basis):
                    inner = cell_basis @ basis.T
                    assert np.max(np.abs(inner)) < 1e-8 * max(
                        1.0, np.abs(cell_basis).max())
                z0 = pivot_point(m, k, idx, dual=dual, check=True)  # 1e-7 gate
                assert z0.shape == (d,)


def test_pivot_of_vertex_is_site():
    m, pts = poisson_mosaic(2, 40, 5)
    for i in range(m.n_cells(0)):
        z0 = pivot_point(m, 0, i)
        assert np.allclose(z0, pts[m.cells[0][i][0]])


# ---------------- nearest site ----------------

def test_nearest_site_basic():
    m = build_mosaic(np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 2.0]]))
    assert nearest_site(m, np.array([0.4, 0.0])) == 0


def test_nearest_site_tie_lowest_index():
    m = build_mosaic(np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 2.0]]))
    assert nearest_site(m, np.array([1.0, 0.0])) == 0


def test_nearest_site_matches_linear_scan():
    m, pts = poisson_mosaic(2, 300, 6)
    rng = np.random.default_rng(7)
    qs = rng.uniform(0, 1, size=(1000, 2))
    for q in qs:
        i = nearest_site(m, q)
        j = int(np.argmin(np.linalg.norm(pts - q, axis=1)))
        assert i == j


def test_nearest_site_warm_start_irrelevant():
    m, pts = poisson_mosaic(2, 200, 8)
    rng = np.random.default_rng(9)
    for q in rng.uniform(0.2, 0.8, size=(50, 2)):
        base = nearest_site(m, q)
        for start in (0, len(pts) // 2, len(pts) - 1):
            assert nearest_site(m, q, start=start) == base


# ---------------- clipped partition ----------------

def test_voronoi_partition_box_2d():
    m, _ = poisson_mosaic(2, 400, 10)
    w = Window("box", np.full(2, 0.5), 0.3)
    vols = clipped_voronoi_volumes(m, w)
    assert abs(vols.sum() - window_volume(w)) < 1e-6 * window_volume(w)


def test_voronoi_partition_ball_2d():
    m, _ = poisson_mosaic(2, 400, 11)
    w = Window("ball", np.full(2, 0.5), 0.3)
    vols = clipped_voronoi_volumes(m, w)
    assert abs(vols.sum() - window_volume(w)) < 1e-9 * window_volume(w)


def test_voronoi_partition_box_3d():
    m, _ = poisson_mosaic(3, 500, 12)
    w = Window("box", np.full(3, 0.5), 0.25)
    vols = clipped_voronoi_volumes(m, w)
    assert abs(vols.sum() - window_volume(w)) < 1e-6 * window_volume(w)


# ---------------- containment and export ----------------

def test_contains():
    m = build_mosaic(TRIANGLE)
    assert m.contains(np.array([1.0, 0.5]))
    assert not m.contains(np.array([-1.0, -1.0]))


def test_export_schema_and_determinism(tmp_path):
    m, pts = poisson_mosaic(2, 60, 13)
    doc = json.loads(export_mosaic_json(m))
    assert doc["d"] == 2
    assert len(doc["sites"]) == len(pts)
    assert set(doc["cells"]) == {"0", "1", "2"}
    assert len(doc["circumcenters"]) == m.n_cells(2)
    rows = doc["cells"]["1"]
    assert rows == sorted(rows)  # lexicographic by sorted vertex indices
    # same input, fresh build: identical document
    again = export_mosaic_json(build_mosaic(pts))
    assert again == export_mosaic_json(m)
    out = tmp_path / "mosaic.json"
    export_mosaic_json(m, out)
    assert json.loads(out.read_text()) == doc
