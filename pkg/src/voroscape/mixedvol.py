"""Mixed volumes of dual cell pairs and the ball-sum identity.

For a Delaunay p-cell and its dual Voronoi (d-p)-cell the mixed volume is
the product of their intrinsic volumes; summed over the p-cells contained in
a ball of radius R it approaches nu_d C(d,p) R^d, with the discrepancy
carried by cells whose pivot ball reaches the boundary. The p = 0 and p = d
cases degenerate to the Voronoi and Delaunay partitions of the ball, which
are exposed separately as exact clipped sums.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .delaunay import DualCell, Mosaic, clipped_voronoi_volumes, pivot_point, voronoi_dual
from .errors import UnboundedCellError
from .geometry import (PolytopeCell, affine_basis, polygon_disk_area,
                       polytope_volume, simplex_volume)
from .pointproc import Window, unit_ball_volume


@dataclass(frozen=True)
class MixedCell:
    """A dual pair with its mixed volume, pivot point, and reach radius.

    boundary is True when the ball of radius R0 around the pivot z0 is not
    contained in the open window ball, which is exactly when the pair's tile
    can leak measure across the window boundary.
    """

    owner_dim: int
    owner_index: int
    dual: DualCell
    mixed_volume: float
    z0: np.ndarray
    R0: float
    boundary: bool


@dataclass(frozen=True)
class MixedSumReport:
    d: int
    p: int
    R: float
    sum_interior: float
    sum_boundary: float
    predicted: float
    ratio: float
    n_cells: int
    n_boundary: int
    seed: int | None = None

    def to_json(self) -> str:
        return json.dumps({
            "d": self.d, "p": self.p, "R": self.R,
            "sum_interior": self.sum_interior, "sum_boundary": self.sum_boundary,
            "predicted": self.predicted, "ratio": self.ratio,
            "n_cells": self.n_cells, "n_boundary": self.n_boundary,
            "seed": self.seed,
        })


def tile_measure(c: MixedCell, d: int, p: int) -> float:
    """Measure of the tile of a dual pair: mixed volume over C(d, p)."""
    if not c.dual.bounded:
        raise UnboundedCellError("infinite tile")
    return c.mixed_volume / comb(d, p)


def _dual_volume(m: Mosaic, dual: DualCell, clip_reach: float) -> float:
    """Intrinsic volume of a dual cell; unbounded duals are extended along
    their rays out to clip_reach, a reporting-only approximation."""
    verts = dual.vertices
    if dual.bounded:
        basis = dual.direction_basis()
        return polytope_volume(PolytopeCell(verts, basis, bounded=True))
    rays = dual.rays / np.linalg.norm(dual.rays, axis=1)[:, None]
    cloud = np.vstack([verts] + [verts + clip_reach * r for r in rays])
    return polytope_volume(PolytopeCell(cloud, affine_basis(cloud), bounded=True))


def mixed_cell(m: Mosaic, p: int, idx: int, R: float,
               center=None, clip_reach: float | None = None) -> MixedCell:
    """MixedCell of one p-cell against the window ball B(center, R)."""
    center = np.zeros(m.d) if center is None else np.asarray(center, dtype=float)
    if clip_reach is None:
        clip_reach = 4.0 * (R + float(m.top_circumradii.max()))
    dual = voronoi_dual(m, p, idx)
    vol_cell = m.cell_volume(p, idx)
    vol_dual = _dual_volume(m, dual, clip_reach)
    z0 = pivot_point(m, p, idx, dual)
    gamma = m.sites[m.cells[p][idx]]
    dverts = dual.vertices
    if not dual.bounded:
        rays = dual.rays / np.linalg.norm(dual.rays, axis=1)[:, None]
        dverts = np.vstack([dverts] + [dverts + clip_reach * r for r in rays])
    pair_d = np.linalg.norm(gamma[:, None, :] - dverts[None, :, :], axis=2)
    R0 = float(pair_d.max())
    boundary = (not dual.bounded) or \
        float(np.linalg.norm(z0 - center)) + R0 >= R
    return MixedCell(p, idx, dual, vol_cell * vol_dual, z0, R0, boundary)


def _fast_sum_d2_edges(m: Mosaic, R: float, center) -> tuple:
    # vectorized d=2, p=1 accounting: interior edges have exactly two
    # incident triangles, so everything reduces to batched arithmetic
    edges = m.cells[1]
    sites = m.sites
    in_ball = (np.linalg.norm(sites[edges[:, 0]] - center, axis=1) <= R) & \
              (np.linalg.norm(sites[edges[:, 1]] - center, axis=1) <= R)
    indptr, tops = m._cofaces[1]
    cnt = np.diff(indptr)
    two = (cnt == 2) & in_ball
    first = tops[indptr[two.nonzero()[0]]]
    second = tops[indptr[two.nonzero()[0]] + 1]
    e = edges[two]
    elen = np.linalg.norm(sites[e[:, 1]] - sites[e[:, 0]], axis=1)
    c1, c2 = m.top_circumcenters[first], m.top_circumcenters[second]
    dlen = np.linalg.norm(c1 - c2, axis=1)
    mixed = elen * dlen
    # pivot: project a circumcenter onto the edge's line
    a = sites[e[:, 0]]
    u = (sites[e[:, 1]] - a) / elen[:, None]
    z0 = a + np.einsum("ij,ij->i", c1 - a, u)[:, None] * u
    r1 = np.maximum(np.linalg.norm(sites[e[:, 0]] - c1, axis=1),
                    np.linalg.norm(sites[e[:, 0]] - c2, axis=1))
    r2 = np.maximum(np.linalg.norm(sites[e[:, 1]] - c1, axis=1),
                    np.linalg.norm(sites[e[:, 1]] - c2, axis=1))
    R0 = np.maximum(r1, r2)
    bnd = np.linalg.norm(z0 - center, axis=1) + R0 >= R
    sum_int = float(mixed[~bnd].sum())
    sum_bnd = float(mixed[bnd].sum())
    n_bnd = int(bnd.sum())
    # hull-boundary edges in the ball: unbounded duals, always boundary
    onhull = m.boundary_mask(1) & in_ball
    rest = onhull.nonzero()[0]
    clip_reach = 4.0 * (R + float(m.top_circumradii.max()))
    for idx in rest:
        c = mixed_cell(m, 1, int(idx), R, center, clip_reach)
        sum_bnd += c.mixed_volume
        n_bnd += 1
    n_cells = int(two.sum()) + len(rest)
    return sum_int, sum_bnd, n_cells, n_bnd


def mixed_volume_sum(m: Mosaic, p: int, R: float, center=None,
                     seed: int | None = None) -> MixedSumReport:
    """Sum of mixed volumes over p-cells contained in the ball B(center, R).

    A cell is contained when all its vertices are; pairs whose pivot ball
    ball(z0, R0) is not inside the open window go to sum_boundary, the rest
    to sum_interior. The prediction nu_d C(d,p) R^d is exact only in the
    R -> infinity limit, so the interior ratio approaches 1 from below as
    the intensity grows.
    """
    d = m.d
    center = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    predicted = unit_ball_volume(d) * comb(d, p) * R ** d
    if d == 2 and p == 1:
        si, sb, nc, nb = _fast_sum_d2_edges(m, R, center)
    else:
        cells = m.cells[p]
        dist = np.linalg.norm(m.sites - center, axis=1)
        keep = np.all(dist[cells] <= R, axis=1)
        clip_reach = 4.0 * (R + float(m.top_circumradii.max()))
        si = sb = 0.0
        nc = nb = 0
        for idx in np.nonzero(keep)[0]:
            c = mixed_cell(m, p, int(idx), R, center, clip_reach)
            nc += 1
            if c.boundary:
                sb += c.mixed_volume
                nb += 1
            else:
                si += c.mixed_volume
    return MixedSumReport(d, p, R, si, sb, predicted, si / predicted, nc, nb, seed)


def partition_sum(m: Mosaic, p: int, R: float, center=None,
                  seed: int | None = None) -> MixedSumReport:
    """Exact clipped partition sums for the degenerate ends p = 0 and p = d.

    p = 0: Voronoi cells clipped to B(R) tile the ball, so the sum of their
    clipped volumes is nu_d R^d exactly. p = d: the Delaunay cells clipped
    to B(R) do the same. Both go through the clipping code path, making the
    ratio a correctness check on that geometry rather than a statistical
    estimate; d = 2 only, where the clipping is exact.
    """
    d = m.d
    if p not in (0, d):
        raise ValueError("partition sums are defined for p = 0 and p = d")
    if d != 2:
        raise ValueError("exact ball clipping is implemented for d = 2")
    center = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    predicted = unit_ball_volume(d) * comb(d, p) * R ** d
    if p == 0:
        w = Window("ball", center, R)
        vols = clipped_voronoi_volumes(m, w)
        total = float(vols.sum())
        n = int(np.sum(vols > 0.0))
    else:
        tops = m.cells[d]
        verts = m.sites[tops]
        inball = np.linalg.norm(verts - center, axis=2) <= R
        total = 0.0
        n = 0
        full = np.all(inball, axis=1)
        for t in np.nonzero(full)[0]:
            total += simplex_volume(verts[t])
            n += 1
        for t in np.nonzero(~full)[0]:
            a = polygon_disk_area(verts[t], center, R)
            if a > 0.0:
                total += a
                n += 1
    return MixedSumReport(d, p, R, total, 0.0, predicted, total / predicted, n, 0, seed)


@dataclass(frozen=True)
class RegularityReport:
    """Desk-scale surrogates for the regularity conditions.

    max_circumradius bounds empty balls touching cell vertices, the largest
    empty ball is estimated by the farthest-out Voronoi vertex radius inside
    the window, and boundary_tile_share tracks how much tile measure sits on
    the window boundary relative to R^d, per cell dimension.
    """

    max_circumradius: float
    mean_circumradius: float
    empty_ball_radius: float
    boundary_tile_share: dict = field(default_factory=dict)
    unbounded_present: bool = False

    @property
    def regular(self) -> bool:
        return not self.unbounded_present


def regularity_report(m: Mosaic, R: float, center=None) -> RegularityReport:
    d = m.d
    center = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    rmax, rmean = float(m.top_circumradii.max()), float(m.top_circumradii.mean())
    cc_in = np.linalg.norm(m.top_circumcenters - center, axis=1) <= R
    empty_ball = float(m.top_circumradii[cc_in].max()) if np.any(cc_in) else 0.0
    shares = {}
    unbounded = False
    dist = np.linalg.norm(m.sites - center, axis=1)
    for p in range(d + 1):
        cells = m.cells[p]
        keep = np.all(dist[cells] <= R, axis=1)
        share = 0.0
        for idx in np.nonzero(keep)[0]:
            c = mixed_cell(m, p, int(idx), R, center)
            if not c.dual.bounded:
                unbounded = True
            if c.boundary:
                share += c.mixed_volume / comb(d, p)
        shares[p] = share / R ** d
    return RegularityReport(rmax, rmean, empty_ball, shares, unbounded)
