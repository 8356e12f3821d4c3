"""Linear-algebra and convex-geometry primitives: volumes, circumspheres, frames.

Everything here is pure and operates on plain numpy arrays. The thin wrapper
classes (Frame, Simplex, PolytopeCell) validate their invariants once at
construction and are safe to share between threads.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import DegenerateInputError, UnboundedCellError

GRAM_TOL = 1e-10    # degeneracy threshold on normalized Gram determinants
FRAME_TOL = 1e-10   # orthonormality tolerance
AFFINE_TOL = 1e-8   # vertex-in-affine-hull tolerance
RANK_TOL = 1e-12    # rank-deficiency threshold in orthonormalize


def _as_points(v):
    a = np.asarray(v, dtype=float)
    if a.ndim == 1:
        a = a[None, :]
    if not np.all(np.isfinite(a)):
        raise ValueError("non-finite coordinates")
    return a


@dataclass(frozen=True)
class Frame:
    """p orthonormal row vectors in R^d; p = 0 (empty frame) is allowed."""

    rows: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2:
            rows = rows.reshape(0, int(rows.shape[0])) if rows.size == 0 else rows[None, :]
        object.__setattr__(self, "rows", rows)
        p, d = rows.shape
        if p > d:
            raise ValueError(f"frame has {p} rows in dimension {d}")
        if p and np.max(np.abs(rows @ rows.T - np.eye(p))) > FRAME_TOL:
            raise ValueError("rows are not orthonormal")

    @property
    def p(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class Simplex:
    """A k-simplex given by its k+1 vertices in R^d."""

    vertices: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vertices", _as_points(self.vertices))

    @property
    def k(self) -> int:
        return self.vertices.shape[0] - 1

    @property
    def d(self) -> int:
        return self.vertices.shape[1]

    @property
    def degenerate(self) -> bool:
        """True when the vertices are affinely dependent within tolerance."""
        e = self.vertices[1:] - self.vertices[0]
        if e.shape[0] == 0:
            return False
        scale = np.einsum("ij,ij->i", e, e)
        if np.any(scale <= 0.0):
            return True
        # normalize rows so the Gram determinant is scale free in [0, 1]
        g = (e / np.sqrt(scale)[:, None])
        return np.linalg.det(g @ g.T) <= GRAM_TOL


@dataclass(frozen=True)
class PolytopeCell:
    """Convex cell of intrinsic dimension m given by vertices and a hull basis.

    The basis rows span the directions of the affine hull; `bounded` is False
    for cells that extend to infinity (their volume is undefined here).
    """

    vertices: np.ndarray
    basis: Frame
    bounded: bool = True
    rays: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "vertices", _as_points(self.vertices))
        if self.vertices.shape[1] != self.basis.d:
            raise ValueError("vertex dimension does not match basis")

    @property
    def m(self) -> int:
        return self.basis.p

    @property
    def d(self) -> int:
        return self.basis.d


def simplex_volume(s) -> float:
    """k-dimensional volume of a k-simplex, via the Gram determinant.

    Accepts a Simplex or a (k+1, d) vertex array. A degenerate simplex
    (affinely dependent vertices within tolerance) yields 0.0; use
    Simplex.degenerate to distinguish that case from a genuinely thin cell.
    """
    v = s.vertices if isinstance(s, Simplex) else _as_points(s)
    k = v.shape[0] - 1
    if k == 0:
        return 1.0  # Vol_0 of a point, the convention used by tile measures
    e = v[1:] - v[0]
    gram = e @ e.T
    det = np.linalg.det(gram)
    if det <= 0.0 or Simplex(v).degenerate:
        return 0.0
    return float(np.sqrt(det) / np.prod(np.arange(1, k + 1, dtype=float)))


def circumsphere(s):
    """Center and radius of the circumsphere of a k-simplex.

    The center lies in the affine hull of the simplex, which is what the
    duality constructions need for faces of dimension k < d. Solves the
    linear system 2 E E^T a = diag(E E^T) for barycentric-like coefficients.

    Returns
    -------
    center : (d,) ndarray
    radius : float
    """
    v = s.vertices if isinstance(s, Simplex) else _as_points(s)
    if Simplex(v).degenerate:
        raise DegenerateInputError("degenerate simplex")
    e = v[1:] - v[0]
    if e.shape[0] == 0:
        return v[0].copy(), 0.0
    gram = e @ e.T
    rhs = 0.5 * np.diag(gram)
    coef = np.linalg.solve(gram, rhs)
    center = v[0] + coef @ e
    radius = float(np.linalg.norm(center - v[0]))
    return center, radius


def frame_projection_volume(f: Frame, g: Frame) -> float:
    """Volume of the projection of the unit p-cube spanned by f onto span(g).

    Equals |det(F G^T)|, which is symmetric in the two frames and lies in
    [0, 1]. For p = 1 this is the cosine of the angle between the lines.
    """
    if not isinstance(f, Frame):
        f = Frame(np.asarray(f, dtype=float))
    if not isinstance(g, Frame):
        g = Frame(np.asarray(g, dtype=float))
    if f.p != g.p or f.d != g.d:
        raise ValueError("frames must share p and d")
    if f.p == 0:
        return 1.0
    return float(abs(np.linalg.det(f.rows @ g.rows.T)))


def orthonormalize(vectors) -> Frame:
    """Orthonormal frame spanning the same subspace as the given vectors.

    Uses a QR factorization with the sign convention that reproduces
    Gram-Schmidt output exactly, so the result is deterministic in the
    input order.
    """
    v = np.asarray(vectors, dtype=float)
    if v.ndim == 1:
        v = v[None, :]
    p, d = v.shape
    if p == 0:
        return Frame(np.zeros((0, d)))
    if p > d:
        raise ValueError("rank deficient")
    q, r = np.linalg.qr(v.T)
    diag = np.diag(r)
    scale = np.max(np.linalg.norm(v, axis=1))
    if scale == 0.0 or np.min(np.abs(diag)) <= RANK_TOL * scale:
        raise ValueError("rank deficient")
    q = q * np.sign(diag)
    return Frame(q.T)


def _fan_volume(coords) -> float:
    # m-volume of a convex point cloud in R^m by fanning hull facets from the
    # centroid; valid because the cells handled here are convex
    m = coords.shape[1]
    if m == 1:
        return float(coords.max() - coords.min())
    try:
        hull = ConvexHull(coords)
    except QhullError as exc:
        raise DegenerateInputError(f"flat cell in dimension {m}") from exc
    centroid = coords.mean(axis=0)
    total = 0.0
    for facet in hull.simplices:
        total += simplex_volume(np.vstack([centroid[None, :], coords[facet]]))
    return total


def polytope_volume(cell: PolytopeCell) -> float:
    """m-dimensional volume of a bounded convex cell inside its affine hull."""
    if not cell.bounded:
        raise UnboundedCellError("unbounded")
    v = cell.vertices
    if cell.m == 0:
        return 1.0
    rel = v - v[0]
    coords = rel @ cell.basis.rows.T
    resid = rel - coords @ cell.basis.rows
    scale = max(1.0, float(np.max(np.abs(v))))
    if np.max(np.abs(resid)) > AFFINE_TOL * scale:
        warnings.warn("vertices leave the stated affine hull", stacklevel=2)
    return _fan_volume(coords)


def affine_basis(points) -> Frame:
    """Orthonormal basis of the direction space of the affine hull of points."""
    v = _as_points(points)
    e = v[1:] - v[0]
    if e.shape[0] == 0:
        return Frame(np.zeros((0, v.shape[1])))
    # SVD rank reveal, tolerant to nearly dependent generators
    u, s, vt = np.linalg.svd(e, full_matrices=False)
    rank = int(np.sum(s > max(1e-13, s[0] * 1e-12))) if s.size else 0
    return Frame(vt[:rank])


def clip_polygon_halfspace(poly, normal, offset):
    """Clip a convex 2D polygon to the halfspace normal . x <= offset.

    poly is an (n, 2) array of vertices in boundary order. Returns the
    clipped polygon (possibly empty) in the same orientation.
    """
    poly = np.asarray(poly, dtype=float)
    if len(poly) == 0:
        return poly
    vals = poly @ np.asarray(normal, dtype=float) - offset
    out = []
    n = len(poly)
    for i in range(n):
        j = (i + 1) % n
        a, b = poly[i], poly[j]
        fa, fb = vals[i], vals[j]
        if fa <= 0.0:
            out.append(a)
        if (fa < 0.0 < fb) or (fb < 0.0 < fa):
            t = fa / (fa - fb)
            out.append(a + t * (b - a))
    return np.asarray(out, dtype=float).reshape(-1, 2)


def polygon_area(poly) -> float:
    """Signed-free area of a convex polygon given in boundary order."""
    poly = np.asarray(poly, dtype=float)
    if len(poly) < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return float(abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))) / 2.0)


def polygon_disk_area(poly, center, radius) -> float:
    """Exact area of the intersection of a convex polygon with a disk.

    Walks the polygon boundary once in counterclockwise order; chord pieces
    inside the disk contribute triangle terms and the gap between each exit
    point and the following entry point contributes a circular-sector term
    (Green's theorem around the boundary of the intersection).
    """
    poly = np.asarray(poly, dtype=float)
    c = np.asarray(center, dtype=float)
    r = float(radius)
    if len(poly) < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    signed = (np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))) / 2.0
    if signed < 0.0:
        poly = poly[::-1]
    q = poly - c

    def cross(u, v):
        return u[0] * v[1] - u[1] * v[0]

    def seg_clip(a, b):
        # parameter interval [t0, t1] of a + t(b - a) inside the disk
        d = b - a
        aa = d @ d
        if aa == 0.0:
            return None
        bb = 2.0 * (a @ d)
        cc = a @ a - r * r
        disc = bb * bb - 4.0 * aa * cc
        if disc <= 0.0:
            return None
        sq = np.sqrt(disc)
        t0 = max((-bb - sq) / (2.0 * aa), 0.0)
        t1 = min((-bb + sq) / (2.0 * aa), 1.0)
        if t0 >= t1:
            return None
        return t0, t1

    def sector(p_from, p_to):
        dth = np.arctan2(p_to[1], p_to[0]) - np.arctan2(p_from[1], p_from[0])
        if dth < 0.0:
            dth += 2.0 * np.pi
        return 0.5 * r * r * dth

    area = 0.0
    pending_exit = None   # boundary point where P left the disk, arc not yet closed
    first_entry = None
    any_piece = False
    n = len(poly)
    for i in range(n):
        a, b = q[i], q[(i + 1) % n]
        tt = seg_clip(a, b)
        if tt is None:
            continue
        t0, t1 = tt
        p0 = a + t0 * (b - a)
        p1 = a + t1 * (b - a)
        any_piece = True
        if t0 > 0.0:
            # the boundary re-enters the disk within this edge
            if pending_exit is not None:
                area += sector(pending_exit, p0)
                pending_exit = None
            elif first_entry is None:
                first_entry = p0
        area += 0.5 * cross(p0, p1)
        if t1 < 1.0:
            pending_exit = p1
    if pending_exit is not None and first_entry is not None:
        area += sector(pending_exit, first_entry)
    if not any_piece:
        # either disjoint, or the disk sits entirely inside the polygon
        sides = [cross(q[(i + 1) % n] - q[i], -q[i]) for i in range(n)]
        if all(s >= 0 for s in sides):
            return np.pi * r * r
        return 0.0
    return max(area, 0.0)
