"""Delaunay mosaics in R^d via paraboloid lifting, with the full face lattice
and dual Voronoi cell geometry.

The construction lifts each site x to (x, |x|^2) in R^(d+1) and keeps the
lower facets of the convex hull; their projections are exactly the
top-dimensional Delaunay cells. Faces of every dimension are enumerated from
the tops, so incidences come for free. d = 2 and 3 are the supported scales,
d = 4 works but is not tuned, d >= 5 is rejected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import DegenerateInputError
from .geometry import Frame, affine_basis, circumsphere, simplex_volume
from .pointproc import Window

LIFT_TOL = 1e-10        # lower-facet test on lifted hull normals
EMPTY_SPHERE_TOL = 1e-9  # relative slack in the empty-circumsphere oracle
PIVOT_TOL = 1e-7        # agreement of the two pivot-point computations

MAX_DIM = 4


def lower_hull_simplices(lifted, tol=LIFT_TOL):
    """Vertex-index rows of the lower facets of the hull of lifted points.

    Shared by the unweighted construction here and the weighted (power)
    construction in the scape module; the two differ only in the lift height.
    Rows come back sorted and deduplicated in lexicographic order.
    """
    lifted = np.asarray(lifted, dtype=float)
    n, dim1 = lifted.shape
    if n == dim1:
        # exactly one simplex; its lifted hull is flat, so skip Qhull
        base = lifted[:, :-1]
        if simplex_volume(base) <= 0.0:
            raise DegenerateInputError(
                f"degenerate configuration ({n} affinely dependent points)")
        return np.arange(n, dtype=np.int32)[None, :]
    try:
        hull = ConvexHull(lifted)
    except QhullError as exc:
        raise DegenerateInputError(
            f"degenerate configuration ({n} points, cospherical or flat)") from exc
    low = hull.equations[:, dim1 - 1] < -tol
    tops = np.sort(hull.simplices[low], axis=1)
    return np.unique(tops, axis=0)


@dataclass(frozen=True)
class DualCell:
    """Dual Voronoi cell of a Delaunay k-cell.

    vertices are circumcenters of the incident top cells; rays give the
    recession directions (outward hull-facet normals) when the owner lies on
    the boundary of the site hull and the dual is unbounded.
    """

    owner_dim: int
    owner_index: int
    vertices: np.ndarray
    rays: np.ndarray
    bounded: bool

    def direction_basis(self) -> Frame:
        """Orthonormal basis of the direction space of the dual's affine hull."""
        pts = self.vertices
        rows = [pts[1:] - pts[0]] if len(pts) > 1 else []
        if len(self.rays):
            rows.append(self.rays)
        stacked = np.vstack(rows) if rows else np.zeros((0, pts.shape[1]))
        # affine_basis treats the first row as the base point
        return affine_basis(np.vstack([np.zeros((1, pts.shape[1])), stacked]))

    @property
    def dim(self) -> int:
        return self.direction_basis().p


class Mosaic:
    """Immutable Delaunay mosaic over a finite site set.

    cells[k] is an (m_k, k+1) int array of sorted site indices in
    lexicographic row order; cofaces map each k-cell to the indices of the
    top cells containing it.
    """

    def __init__(self, sites, cells, cofaces, circumcenters, circumradii,
                 hull_facets, hull_normals, hull_offsets):
        self.sites = sites
        self.d = sites.shape[1]
        self.cells = cells
        self._cofaces = cofaces
        self.top_circumcenters = circumcenters
        self.top_circumradii = circumradii
        self.hull_facets = hull_facets
        self.hull_normals = hull_normals
        self.hull_offsets = hull_offsets
        self._boundary_masks = {}
        self._neighbors = None
        self._cell_index = {}

    # -- structure lookups ------------------------------------------------

    def n_cells(self, k: int) -> int:
        return len(self.cells[k])

    def cofaces_of(self, k: int, idx: int) -> np.ndarray:
        """Indices of the top cells incident to the given k-cell."""
        indptr, tops = self._cofaces[k]
        return tops[indptr[idx]:indptr[idx + 1]]

    def cell_index(self, k: int, vertex_tuple) -> int:
        """Index of a k-cell given its sorted site indices; KeyError if absent."""
        if k not in self._cell_index:
            rows = self.cells[k]
            self._cell_index[k] = {tuple(row): i for i, row in enumerate(rows.tolist())}
        return self._cell_index[k][tuple(vertex_tuple)]

    def boundary_mask(self, k: int) -> np.ndarray:
        """True for k-cells lying on the convex-hull boundary of the sites."""
        if k not in self._boundary_masks:
            if k == self.d:
                mask = np.zeros(self.n_cells(k), dtype=bool)
            else:
                facet_faces = set()
                for facet in self.hull_facets.tolist():
                    for sub in combinations(facet, k + 1):
                        facet_faces.add(sub)
                rows = self.cells[k].tolist()
                mask = np.fromiter((tuple(r) in facet_faces for r in rows),
                                   dtype=bool, count=len(rows))
            self._boundary_masks[k] = mask
        return self._boundary_masks[k]

    @property
    def neighbors(self):
        """CSR site adjacency (indptr, indices) over Delaunay edges."""
        if self._neighbors is None:
            edges = self.cells[1]
            both = np.concatenate([edges, edges[:, ::-1]])
            order = np.lexsort((both[:, 1], both[:, 0]))
            both = both[order]
            n = len(self.sites)
            indptr = np.searchsorted(both[:, 0], np.arange(n + 1))
            self._neighbors = (indptr, np.ascontiguousarray(both[:, 1]))
        return self._neighbors

    # -- geometry ----------------------------------------------------------

    def cell_volume(self, k: int, idx: int) -> float:
        return simplex_volume(self.sites[self.cells[k][idx]])

    def contains(self, x, tol=1e-12) -> bool:
        """True when x lies inside the convex hull of the sites."""
        x = np.asarray(x, dtype=float)
        return bool(np.all(self.hull_normals @ x + self.hull_offsets <= tol))


def build_mosaic(points, d=None) -> Mosaic:
    """Delaunay mosaic of a finite point set in general position.

    Lifts to the paraboloid, takes lower hull facets as top cells, and
    enumerates every face dimension with coface incidences. Degenerate
    inputs (all on a sphere, affinely flat, too few points) raise
    DegenerateInputError.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise ValueError("points must be a 2d array")
    n, dim = pts.shape
    if d is not None and d != dim:
        raise ValueError(f"points have dimension {dim}, expected {d}")
    d = dim
    if d < 1 or d > MAX_DIM:
        raise ValueError(f"dimension {d} unsupported (1 <= d <= {MAX_DIM})")
    if n < d + 1:
        raise DegenerateInputError(
            f"degenerate configuration ({n} points cannot span R^{d})")

    lifted = np.column_stack([pts, np.einsum("ij,ij->i", pts, pts)])
    tops = lower_hull_simplices(lifted).astype(np.int32)

    cells = {d: tops}
    cofaces = {d: (np.arange(len(tops) + 1), np.arange(len(tops)))}
    for k in range(d - 1, -1, -1):
        subs = list(combinations(range(d + 1), k + 1))
        stacked = np.concatenate([tops[:, s] for s in subs])
        owners = np.tile(np.arange(len(tops)), len(subs))
        uniq, inv = np.unique(stacked, axis=0, return_inverse=True)
        order = np.argsort(inv, kind="stable")
        indptr = np.searchsorted(inv[order], np.arange(len(uniq) + 1))
        cells[k] = uniq
        cofaces[k] = (indptr, owners[order])

    # batched circumcenters of the top cells, solved in ambient coordinates
    v = pts[tops]
    v0 = v[:, 0, :]
    A = 2.0 * (v[:, 1:, :] - v0[:, None, :])
    rhs = (np.einsum("tkj,tkj->tk", v[:, 1:, :], v[:, 1:, :])
           - np.einsum("tj,tj->t", v0, v0)[:, None])
    try:
        centers = np.linalg.solve(A, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError as exc:
        raise DegenerateInputError(
            "degenerate configuration (flat top cell)") from exc
    radii = np.linalg.norm(centers - v0, axis=1)

    hull = ConvexHull(pts)
    facets = np.sort(hull.simplices, axis=1).astype(np.int32)
    normals = hull.equations[:, :d]
    offsets = hull.equations[:, d]

    return Mosaic(pts, cells, cofaces, centers, radii, facets, normals, offsets)


def voronoi_dual(m: Mosaic, k: int, idx: int) -> DualCell:
    """Dual Voronoi cell of the k-cell with the given index.

    Vertices are the circumcenters of the incident top cells. For cells on
    the hull boundary the dual is unbounded; its recession cone is spanned
    by the outward normals of the hull facets containing the cell.
    """
    tops = m.cofaces_of(k, idx)
    vertices = m.top_circumcenters[tops]
    bounded = not bool(m.boundary_mask(k)[idx])
    rays = np.zeros((0, m.d))
    if not bounded:
        cell = set(m.cells[k][idx].tolist())
        hits = [i for i, facet in enumerate(m.hull_facets.tolist())
                if cell.issubset(facet)]
        rays = m.hull_normals[hits]
    return DualCell(k, idx, vertices, rays, bounded)


def pivot_point(m: Mosaic, k: int, idx: int, dual: DualCell | None = None,
                check: bool = False):
    """Intersection point z0 of the affine hulls of a k-cell and its dual.

    Computed by projecting a dual vertex onto the affine hull of the cell.
    With check=True the same point is recomputed from the dual side and the
    two must agree within PIVOT_TOL.
    """
    cell = m.cells[k][idx]
    v0 = m.sites[cell[0]]
    if dual is None:
        dual = voronoi_dual(m, k, idx)
    c0 = dual.vertices[0]
    if k == 0:
        z0 = v0.copy()
    else:
        u = affine_basis(m.sites[cell])
        z0 = v0 + (c0 - v0) @ u.rows.T @ u.rows
    if check and dual.bounded:
        w = dual.direction_basis()
        z1 = c0 + (v0 - c0) @ w.rows.T @ w.rows if w.p else c0.copy()
        if np.linalg.norm(z0 - z1) > PIVOT_TOL:
            raise DegenerateInputError("pivot point disagreement between the two sides")
    return z0


def nearest_site(m: Mosaic, x, start: int | None = None) -> int:
    """Index of the site closest to x, ties broken by lowest index.

    Greedy descent through the Delaunay neighbor graph; for a Delaunay
    triangulation any non-nearest site has a neighbor strictly closer to the
    query, so the walk reaches the global minimizer.
    """
    x = np.asarray(x, dtype=float)
    indptr, nbrs = m.neighbors
    s = 0 if start is None else int(start)
    best = float(np.sum((m.sites[s] - x) ** 2))
    for _ in range(len(m.sites)):
        cand = nbrs[indptr[s]:indptr[s + 1]]
        rel = m.sites[cand] - x
        dist = np.einsum("ij,ij->i", rel, rel)
        j = int(np.argmin(dist))
        # lexicographic (distance, index) improvement gives the stated tie-break
        if dist[j] < best:
            s, best = int(cand[j]), float(dist[j])
            continue
        ties = cand[dist == best]
        lower = int(ties.min()) if len(ties) else s
        if lower < s:
            s = lower
            continue
        return s
    return s


def validate_empty_sphere(m: Mosaic) -> bool:
    """Brute-force check that no site lies strictly inside any circumsphere."""
    for t, (c, r) in enumerate(zip(m.top_circumcenters, m.top_circumradii)):
        rel = m.sites - c
        dist = np.sqrt(np.einsum("ij,ij->i", rel, rel))
        inside = dist < r * (1.0 - EMPTY_SPHERE_TOL)
        if np.any(inside):
            members = set(m.cells[m.d][t].tolist())
            if set(np.nonzero(inside)[0].tolist()) - members:
                return False
    return True


def circumradius_stats(m: Mosaic):
    """(max, mean) circumradius over the top cells."""
    r = m.top_circumradii
    return float(r.max()), float(r.mean())


# -- clipped Voronoi volumes (partition code path) --------------------------

def _voronoi_polygon(m: Mosaic, site: int, far: float) -> np.ndarray:
    """2D Voronoi cell of a site as a polygon, rays extended to distance far."""
    dual = voronoi_dual(m, 0, site)
    pts = [dual.vertices]
    if not dual.bounded:
        base = m.sites[site]
        for ray in dual.rays:
            u = ray / np.linalg.norm(ray)
            pts.append(dual.vertices + far * u)
            pts.append(base[None, :] + far * u)
    cloud = np.vstack(pts)
    try:
        hull = ConvexHull(cloud)
        # ConvexHull lists 2D vertices in counterclockwise boundary order
        return cloud[hull.vertices]
    except QhullError:
        center = m.sites[site]
        ang = np.arctan2(cloud[:, 1] - center[1], cloud[:, 0] - center[0])
        return cloud[np.argsort(ang)]


def _clipped_cell_volume_nd(m: Mosaic, site: int, window: Window) -> float:
    # Voronoi cell as a halfspace intersection (bisectors plus box faces),
    # volume via the hull of the intersection vertices
    from scipy.optimize import linprog
    from scipy.spatial import HalfspaceIntersection

    indptr, nbrs = m.neighbors
    cand = nbrs[indptr[site]:indptr[site + 1]]
    a = m.sites[site]
    b = m.sites[cand]
    normals = 2.0 * (b - a)
    offsets = np.einsum("ij,ij->i", b, b) - a @ a
    box_n = np.vstack([np.eye(m.d), -np.eye(m.d)])
    box_o = np.concatenate([window.center + window.extent,
                            -(window.center - window.extent)])
    A = np.vstack([normals, box_n])
    bb = np.concatenate([offsets, box_o])
    halfspaces = np.column_stack([A, -bb])
    interior = None
    if np.all(np.abs(a - window.center) < window.extent * (1 - 1e-9)):
        interior = a
    else:
        # Chebyshev center of the intersection; empty means no overlap
        norms = np.linalg.norm(A, axis=1)
        res = linprog(np.r_[np.zeros(m.d), -1.0],
                      A_ub=np.column_stack([A, norms]), b_ub=bb,
                      bounds=[(None, None)] * m.d + [(0, None)], method="highs")
        if not res.success or res.x[m.d] <= 1e-12:
            return 0.0
        interior = res.x[:m.d]
    try:
        inter = HalfspaceIntersection(halfspaces, interior)
        return float(ConvexHull(inter.intersections).volume)
    except QhullError:
        return 0.0


def clipped_voronoi_volumes(m: Mosaic, window: Window) -> np.ndarray:
    """Per-site volume of (Voronoi cell intersect window).

    For a window strictly inside the site hull these volumes partition the
    window, so their sum equals its volume. This is the second, clipping
    based code path that the mixed-volume accounting is checked against.
    d = 2 supports box and ball windows exactly; d >= 3 supports box windows
    through halfspace intersections.
    """
    from .geometry import clip_polygon_halfspace, polygon_area, polygon_disk_area

    n = len(m.sites)
    out = np.zeros(n)
    reach = window.extent * (np.sqrt(m.d) if window.kind == "box" else 1.0) \
        + 2.0 * float(m.top_circumradii.max())
    rel = m.sites - window.center
    near = np.einsum("ij,ij->i", rel, rel) <= reach * reach
    if m.d == 2:
        span = float(np.max(np.linalg.norm(rel, axis=1)))
        far = 4.0 * (span + window.extent + float(m.top_circumradii.max()))
        for site in np.nonzero(near)[0]:
            poly = _voronoi_polygon(m, int(site), far)
            if window.kind == "ball":
                out[site] = polygon_disk_area(poly, window.center, window.extent)
            else:
                for axis in range(2):
                    for sign in (1.0, -1.0):
                        normal = np.zeros(2)
                        normal[axis] = sign
                        offset = float(normal @ window.center) + window.extent
                        poly = clip_polygon_halfspace(poly, normal, offset)
                out[site] = polygon_area(poly)
        return out
    if window.kind != "box":
        raise ValueError("ball windows are only clipped exactly in d = 2")
    for site in np.nonzero(near)[0]:
        out[site] = _clipped_cell_volume_nd(m, int(site), window)
    return out


def export_mosaic_json(m: Mosaic, path=None):
    """Mosaic as JSON: sites, cells grouped by dimension, top circumcenters.

    Cell rows are in lexicographic order of their sorted vertex indices,
    which is how they are stored.
    """
    doc = {
        "d": m.d,
        "sites": m.sites.tolist(),
        "cells": {str(k): m.cells[k].tolist() for k in sorted(m.cells)},
        "circumcenters": m.top_circumcenters.tolist(),
        "circumradii": m.top_circumradii.tolist(),
    }
    if path is None:
        return json.dumps(doc)
    with open(path, "w") as fh:
        json.dump(doc, fh)
    return None
