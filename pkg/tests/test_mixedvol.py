import json
from math import comb

import numpy as np
import pytest

from voroscape.delaunay import (build_mosaic, clipped_voronoi_volumes,
                                voronoi_dual)
from voroscape.errors import UnboundedCellError
from voroscape.mixedvol import (MixedCell, mixed_cell, mixed_volume_sum,
                                partition_sum, regularity_report,
                                tile_measure)
from voroscape.pointproc import (Window, lattice, poisson, sample,
                                 unit_ball_volume, unit_box_window)

TRIANGLE = np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 2.0]])


def ball_mosaic(d, rho, radius, seed):
    w = Window("ball", np.zeros(d), radius)
    pts = sample(poisson(rho), w, seed)
    return build_mosaic(pts), pts


# ---------------- tile measure ----------------

def test_tile_measure_formula():
    # |gamma| = 2, |dual| = 0.75 in d=2, p=1: 2 * 0.75 / C(2,1) = 0.75
    m = build_mosaic(TRIANGLE)
    dual = voronoi_dual(m, 2, 0)  # any bounded dual carrier works here
    c = MixedCell(1, 0, dual, 2.0 * 0.75, np.zeros(2), 1.0, False)
    assert tile_measure(c, 2, 1) == pytest.approx(0.75, rel=1e-15)


def test_tile_measure_extreme_dims():
    m, _ = ball_mosaic(2, 800, 0.5, 0)
    # p=0: tile measure equals the Voronoi cell volume
    c0 = mixed_cell(m, 0, 40, R=0.4)
    if c0.dual.bounded:
        assert tile_measure(c0, 2, 0) == pytest.approx(c0.mixed_volume)
    # p=d: tile measure equals the Delaunay cell volume
    cd = mixed_cell(m, 2, 10, R=0.4)
    assert tile_measure(cd, 2, 2) == pytest.approx(cd.mixed_volume)
    assert cd.dual.bounded  # dual of a top cell is its circumcenter


def test_infinite_tile():
    m = build_mosaic(TRIANGLE)
    c = mixed_cell(m, 1, m.cell_index(1, (0, 1)), R=10.0)
    assert c.boundary
    with pytest.raises(UnboundedCellError, match="infinite tile"):
        tile_measure(c, 2, 1)


def test_mixed_complex_scaling_identity():
    # Vol(0.5 gamma x 0.5 dual) = mixed / 2^d, exact in floating point
    m, _ = ball_mosaic(2, 500, 0.5, 1)
    d = 2
    for p in (0, 1, 2):
        for idx in range(0, m.n_cells(p), 17):
            c = mixed_cell(m, p, idx, R=0.4)
            if not c.dual.bounded:
                continue
            gamma_vol = m.cell_volume(p, idx)
            dual_vol = c.mixed_volume / gamma_vol if gamma_vol > 0 else 0.0
            lhs = (gamma_vol / 2.0 ** p) * (dual_vol / 2.0 ** (d - p))
            assert lhs == c.mixed_volume / 2.0 ** d


def test_pivot_within_reach_of_all_vertices():
    # R0 must dominate the distance from z0 to every vertex of both cells
    m, pts = ball_mosaic(2, 300, 0.5, 2)
    for p in (0, 1, 2):
        for idx in range(0, m.n_cells(p), 11):
            c = mixed_cell(m, p, idx, R=0.4)
            if not c.dual.bounded:
                continue
            for v in pts[m.cells[p][idx]]:
                assert np.linalg.norm(c.z0 - v) <= c.R0 + 1e-9
            for v in c.dual.vertices:
                assert np.linalg.norm(c.z0 - v) <= c.R0 + 1e-9


# ---------------- ball sums ----------------

def test_report_schema():
    m, _ = ball_mosaic(2, 2000, 0.5, 3)
    rep = mixed_volume_sum(m, 1, 0.3, seed=3)
    doc = json.loads(rep.to_json())
    assert set(doc) == {"d", "p", "R", "sum_interior", "sum_boundary",
                        "predicted", "ratio", "n_cells", "n_boundary", "seed"}
    assert doc["predicted"] == pytest.approx(
        unit_ball_volume(2) * comb(2, 1) * 0.3 ** 2)
    assert doc["ratio"] == pytest.approx(doc["sum_interior"] / doc["predicted"])
    assert doc["seed"] == 3


def test_fast_path_matches_generic():
    # d=2 p=1 has a vectorized route; it must agree with per-cell evaluation
    m, _ = ball_mosaic(2, 1500, 0.5, 4)
    R = 0.3
    rep = mixed_volume_sum(m, 1, R)
    slow_interior = 0.0
    n_bnd = 0
    dist = np.linalg.norm(m.sites, axis=1)
    keep = np.nonzero(np.all(dist[m.cells[1]] <= R, axis=1))[0]
    for idx in keep:
        c = mixed_cell(m, 1, int(idx), R)
        if c.boundary:
            n_bnd += 1
        else:
            slow_interior += c.mixed_volume
    assert rep.n_cells == len(keep)
    assert rep.n_boundary == n_bnd
    assert rep.sum_interior == pytest.approx(slow_interior, rel=1e-9)


def test_partition_identities():
    m, _ = ball_mosaic(2, 3000, 0.5, 5)
    for p in (0, 2):
        rep = partition_sum(m, p, 0.35)
        assert rep.ratio == pytest.approx(1.0, abs=1e-9)


def test_p0_interior_sum_matches_clipped_partition():
    """Interior p=0 mixed volumes are whole Voronoi cells; the clipped
    partition route must produce the same volume for those same cells."""
    m, pts = ball_mosaic(2, 2000, 0.5, 6)
    R = 0.3
    clipped = clipped_voronoi_volumes(m, Window("ball", np.zeros(2), R))
    inside = np.nonzero(np.linalg.norm(pts, axis=1) <= R)[0]
    checked = 0
    for idx in inside:
        c = mixed_cell(m, 0, int(idx), R)
        if c.boundary:
            continue
        assert c.mixed_volume == pytest.approx(clipped[idx], rel=1e-6)
        checked += 1
    assert checked > 20


def test_predictions_symmetric_in_p():
    m, _ = ball_mosaic(2, 1000, 0.5, 7)
    r0 = mixed_volume_sum(m, 0, 0.3)
    r2 = mixed_volume_sum(m, 2, 0.3)
    assert r0.predicted == pytest.approx(r2.predicted)  # C(d,p) symmetry


def test_structural_duality_bijection():
    # each p-cell owns exactly one dual cell of complementary dimension
    m, _ = ball_mosaic(2, 200, 0.5, 8)
    for p in (0, 1, 2):
        seen = set()
        for idx in range(m.n_cells(p)):
            dual = voronoi_dual(m, p, idx)
            if dual.bounded:
                assert dual.dim == 2 - p
            seen.add((p, idx))
        assert len(seen) == m.n_cells(p)


def test_ratio_approaches_one():
    # modest density: the interior ratio should sit well inside (0.8, 1.02)
    m, _ = ball_mosaic(2, 8000, 0.5, 9)
    rep = mixed_volume_sum(m, 1, 0.3)
    assert 0.8 < rep.ratio < 1.02
    assert rep.n_boundary < rep.n_cells


# ---------------- regularity report ----------------

def test_regularity_three_sites_unbounded():
    m = build_mosaic(TRIANGLE)
    rep = regularity_report(m, 1.0)
    assert rep.unbounded_present
    assert not rep.regular


def test_regularity_lattice_circumradius_bound():
    # jittered lattice: interior circumradii stay near half the cell diagonal
    h = 0.1
    w = Window("box", np.full(2, 0.5), 0.5)
    pts = sample(lattice(h), w, 10)
    m = build_mosaic(pts)
    centers = m.top_circumcenters
    interior = np.all(np.abs(centers - 0.5) < 0.5 - h, axis=1)
    assert interior.sum() > 50
    assert m.top_circumradii[interior].max() <= h * np.sqrt(2) * (1 + 1e-2)


def test_regularity_boundary_share_trend():
    # boundary tile share per R^d drops as R doubles, averaged over seeds
    small, big = [], []
    for seed in range(4):
        m, _ = ball_mosaic(2, 2500, 0.5, 20 + seed)
        small.append(regularity_report(m, 0.15).boundary_tile_share[1])
        big.append(regularity_report(m, 0.30).boundary_tile_share[1])
    assert np.mean(big) < np.mean(small)
