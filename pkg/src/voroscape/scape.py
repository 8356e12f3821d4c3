"""Voronoi paths of polylines and Voronoi scapes of flat patches.

A path walks a segment through the Voronoi tessellation and collects the
Delaunay edge dual to every crossed Voronoi facet. A flat-patch scape goes
through the power diagram instead: the Voronoi tessellation restricted to a
p-flat is the power diagram of the projected sites with weights equal to
minus the squared projection offsets, so the patch's scape is read off the
weighted Delaunay triangulation built by the same lifting machinery.
"""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .delaunay import Mosaic, lower_hull_simplices, nearest_site
from .errors import ConsistencyError, CoverageError, DegenerateInputError
from .geometry import Frame
from .pointproc import unit_ball_volume

CROSS_TOL = 1e-10       # crossing-parameter tolerance in the walk
PERTURB_EPS = 1e-9      # deterministic probe displacement on degenerate hits
WEIGHT_JITTER = 1e-12   # weight perturbation when the power diagram degenerates
MAX_REWALKS = 8


@dataclass(frozen=True)
class Probe:
    """A probe shape: a polyline, or a bounded convex patch of a p-flat.

    For flat patches the region lives in flat coordinates centered on the
    base point: a box with half extents `extent` (scalar or per-axis) or a
    ball of radius `extent`.
    """

    kind: str
    vertices: np.ndarray | None = None        # polyline vertices, (k+1, d)
    frame: Frame | None = None                # flat directions, (p, d)
    base: np.ndarray | None = None
    region: str = "box"                       # box | ball
    extent: float | np.ndarray = 0.0

    def __post_init__(self):
        if self.kind == "polyline":
            v = np.asarray(self.vertices, dtype=float)
            if v.ndim != 2 or len(v) < 2:
                raise ValueError("polyline needs at least two vertices")
            seg = np.linalg.norm(np.diff(v, axis=0), axis=1)
            if np.any(seg <= 0.0):
                raise ValueError("polyline segments must have positive length")
            object.__setattr__(self, "vertices", v)
        elif self.kind == "flat_patch":
            if self.frame is None or self.base is None:
                raise ValueError("flat patch needs a frame and a base point")
            if self.region not in ("box", "ball"):
                raise ValueError(f"unknown region {self.region!r}")
            base = np.asarray(self.base, dtype=float)
            extent = np.asarray(self.extent, dtype=float)
            if self.region == "box" and extent.ndim == 0:
                extent = np.full(self.frame.p, float(extent))
            if np.any(extent <= 0.0):
                raise ValueError("patch extent must be positive")
            object.__setattr__(self, "base", base)
            object.__setattr__(self, "extent", extent)
        else:
            raise ValueError(f"unknown probe kind {self.kind!r}")

    @property
    def p(self) -> int:
        return 1 if self.kind == "polyline" else self.frame.p

    def volume(self) -> float:
        """Intrinsic p-volume: total length, box area, or ball volume."""
        if self.kind == "polyline":
            return float(np.linalg.norm(np.diff(self.vertices, axis=0), axis=1).sum())
        if self.region == "box":
            return float(np.prod(2.0 * self.extent))
        r = float(self.extent)
        return unit_ball_volume(self.p) * r ** self.p

    def bounding_radius(self) -> float:
        """Radius of the probe around its placement center, any orientation."""
        if self.kind == "polyline":
            c = self.vertices.mean(axis=0)
            return float(np.max(np.linalg.norm(self.vertices - c, axis=1)))
        if self.region == "box":
            return float(np.linalg.norm(self.extent))
        return float(self.extent)


def segment_probe(a, b) -> Probe:
    return Probe("polyline", vertices=np.vstack([a, b]))


def flat_patch_probe(frame, base, region: str, extent) -> Probe:
    if not isinstance(frame, Frame):
        frame = Frame(np.atleast_2d(np.asarray(frame, dtype=float)))
    return Probe("flat_patch", frame=frame, base=np.asarray(base, dtype=float),
                 region=region, extent=extent)


@dataclass(frozen=True)
class ScapeEntry:
    sites: tuple          # sorted site indices of the Delaunay p-cell
    multiplicity: int
    volume: float


@dataclass(frozen=True)
class Scape:
    """Multiset of Delaunay p-cells with multiplicities and total p-volume."""

    p: int
    entries: tuple
    total_volume: float
    perturbed: bool = False   # a degenerate hit forced a retry somewhere

    def __post_init__(self):
        check = sum(e.multiplicity * e.volume for e in self.entries)
        if self.entries and abs(check - self.total_volume) > 1e-9 * max(1.0, abs(check)):
            raise ValueError("total volume does not match entries")
        if any(e.multiplicity < 1 for e in self.entries):
            raise ValueError("multiplicities must be positive")

    def edge_multiset(self) -> Counter:
        return Counter({e.sites: e.multiplicity for e in self.entries})


def _make_scape(m: Mosaic, p: int, counts: Counter, perturbed: bool) -> Scape:
    entries = []
    total = 0.0
    for key in sorted(counts):
        mult = counts[key]
        try:
            idx = m.cell_index(p, key)
        except KeyError as exc:
            raise ConsistencyError(
                f"{len(key) - 1}-cell {key} is not a cell of the mosaic") from exc
        vol = m.cell_volume(p, idx)
        entries.append(ScapeEntry(key, mult, vol))
        total += mult * vol
    return Scape(p, tuple(entries), total, perturbed)


def _walk_segment(m: Mosaic, a, b, start_site: int, counts: Counter) -> int:
    """Walk a->b through the Voronoi tessellation, recording facet crossings.

    Returns the site whose cell contains b. Raises DegenerateInputError when
    a crossing lands within tolerance of a lower-dimensional Voronoi face,
    which the caller resolves by perturbing the probe and rewalking.
    """
    indptr, nbrs = m.neighbors
    sites = m.sites
    sq = np.einsum("ij,ij->i", sites, sites)
    v = b - a
    s = start_site
    t = 0.0
    for _ in range(len(sites) * 4):
        cand = nbrs[indptr[s]:indptr[s + 1]]
        diff = sites[cand] - sites[s]
        den = diff @ v
        num = 0.5 * (sq[cand] - sq[s]) - diff @ a
        with np.errstate(divide="ignore", invalid="ignore"):
            tc = np.where(den > 0.0, num / den, np.inf)
        tc = np.where(tc > t + CROSS_TOL, tc, np.inf)
        j = int(np.argmin(tc))
        tj = float(tc[j])
        if tj >= 1.0:
            return s
        close = np.sum(np.abs(tc - tj) <= CROSS_TOL)
        if close > 1:
            raise DegenerateInputError("crossing at a low-dimensional Voronoi face")
        nxt = int(cand[j])
        counts[tuple(sorted((s, nxt)))] += 1
        s, t = nxt, tj
    raise ConsistencyError("segment walk did not terminate")


def _vertex_on_voronoi_face(m: Mosaic, x, s: int) -> bool:
    # a polyline vertex sits on a Voronoi face when a second site is
    # equidistant within tolerance of the nearest one
    indptr, nbrs = m.neighbors
    cand = nbrs[indptr[s]:indptr[s + 1]]
    best = np.linalg.norm(m.sites[s] - x)
    other = np.min(np.linalg.norm(m.sites[cand] - x, axis=1))
    return bool(other - best <= CROSS_TOL * max(1.0, best))


def voronoi_path(m: Mosaic, probe: Probe) -> Scape:
    """Voronoi path of a polyline probe.

    Every crossing of a Voronoi (d-1)-cell contributes the dual Delaunay
    edge, counted once per crossing. Polyline vertices must lie inside the
    convex hull of the sites; a walk that would leave it raises
    CoverageError. Hits on lower-dimensional Voronoi faces, and polyline
    vertices lying on any Voronoi face, are dislodged by a deterministic
    perturbation of the whole probe and a full rewalk.
    """
    if probe.kind != "polyline":
        raise ValueError("voronoi_path expects a polyline probe")
    verts = probe.vertices
    for x in verts:
        if not m.contains(x):
            raise CoverageError("probe outside coverage")
    d = m.d
    for attempt in range(MAX_REWALKS):
        shift = np.zeros(d)
        if attempt:
            # fixed direction with irrational-ratio components, scaled up
            # slowly so successive retries are distinct
            raw = np.array([np.sin(7.0 * (i + 1) + attempt) for i in range(d)])
            shift = PERTURB_EPS * attempt * raw / np.linalg.norm(raw)
        counts = Counter()
        try:
            s = nearest_site(m, verts[0] + shift)
            for i in range(len(verts) - 1):
                a = verts[i] + shift
                if _vertex_on_voronoi_face(m, a, s):
                    raise DegenerateInputError("polyline vertex on a Voronoi face")
                s = _walk_segment(m, a, verts[i + 1] + shift, s, counts)
            if _vertex_on_voronoi_face(m, verts[-1] + shift, s):
                raise DegenerateInputError("polyline vertex on a Voronoi face")
            return _make_scape(m, 1, counts, perturbed=attempt > 0)
        except DegenerateInputError:
            continue
    raise DegenerateInputError("probe keeps hitting degenerate Voronoi faces")


@dataclass(frozen=True)
class WeightedSite:
    """Projection of a site onto a flat: flat coordinates plus power weight."""

    point: np.ndarray     # coordinates in the flat, (p,)
    weight: float         # minus the squared distance from site to flat

    def __post_init__(self):
        if self.weight > 1e-12:
            raise ValueError("weights are nonpositive by construction")


def project_weights(m: Mosaic, frame: Frame, base) -> list:
    """Weighted sites of the power diagram induced on a flat.

    The defining identity, checked in tests: for x on the flat with flat
    coordinates y, the ambient squared distance |x - a|^2 equals
    |y - a'|^2 - a'' for every site a with projection a' and weight a''.
    """
    base = np.asarray(base, dtype=float)
    rel = m.sites - base
    y = rel @ frame.rows.T
    off2 = np.einsum("ij,ij->i", rel, rel) - np.einsum("ij,ij->i", y, y)
    off2 = np.maximum(off2, 0.0)
    return [WeightedSite(y[i].copy(), -float(off2[i])) for i in range(len(y))]


def power_nearest(weighted: list, y) -> int:
    """Index minimizing the power distance |y - a'|^2 - a''; lowest index wins ties."""
    y = np.asarray(y, dtype=float)
    pts = np.stack([w.point for w in weighted])
    wts = np.array([w.weight for w in weighted])
    rel = pts - y
    power = np.einsum("ij,ij->i", rel, rel) - wts
    return int(np.argmin(power))


def voronoi_scape_flat(m: Mosaic, probe: Probe) -> Scape:
    """Voronoi scape of a bounded convex patch of an affine p-flat.

    Builds the power diagram of the projected sites inside the flat with the
    same paraboloid lifting used for the ambient mosaic (weights shift the
    lift height). Every power-diagram vertex inside the patch is the spot
    where the flat pierces a Voronoi (d-p)-cell, and the scape collects the
    ambient Delaunay p-cell on the same p+1 sites, with multiplicity 1 and
    its unprojected p-volume. A projected cell missing from the ambient
    mosaic raises ConsistencyError, since their equality is the point of the
    construction.
    """
    if probe.kind != "flat_patch":
        raise ValueError("voronoi_scape_flat expects a flat patch probe")
    p, d = probe.frame.p, m.d
    if not (1 <= p <= d - 1):
        raise ValueError("patch dimension must satisfy 1 <= p <= d-1")
    rel = m.sites - probe.base
    y = rel @ probe.frame.rows.T
    lift = np.einsum("ij,ij->i", rel, rel)   # |y|^2 - weight, the power lift
    perturbed = False
    for attempt in range(MAX_REWALKS):
        try:
            wtops = lower_hull_simplices(np.column_stack([y, lift]))
            break
        except DegenerateInputError:
            jit = np.random.default_rng(attempt).standard_normal(len(lift))
            lift = lift + WEIGHT_JITTER * jit
            perturbed = True
    else:
        raise DegenerateInputError("power diagram stays degenerate after jitter")
    if perturbed:
        warnings.warn("degenerate power diagram, weights jittered", stacklevel=2)

    # orthocenters: the power-equidistant points of the weighted tops
    y0 = y[wtops[:, 0]]
    A = 2.0 * (y[wtops[:, 1:]] - y0[:, None, :])
    rhs = lift[wtops[:, 1:]] - lift[wtops[:, 0]][:, None]
    centers = np.linalg.solve(A, rhs[..., None])[..., 0]
    if probe.region == "box":
        inside = np.all(np.abs(centers) <= probe.extent, axis=1)
    else:
        inside = np.einsum("ij,ij->i", centers, centers) <= float(probe.extent) ** 2

    counts = Counter()
    for row in wtops[inside]:
        counts[tuple(int(i) for i in row)] += 1
    return _make_scape(m, p, counts, perturbed)


def distortion(s: Scape, probe: Probe) -> float:
    """Scape volume over probe volume; its expectation is the distortion constant."""
    vol = probe.volume()
    if vol <= 0.0:
        raise ValueError("probe volume must be positive")
    return s.total_volume / vol


def write_scape_csv(path, s: Scape) -> None:
    """Scape as CSV: sorted site indices (semicolon-joined), multiplicity, volume."""
    with open(path, "w") as fh:
        fh.write("sites,multiplicity,volume\n")
        for e in s.entries:
            fh.write(f"{';'.join(str(i) for i in e.sites)},{e.multiplicity},{e.volume!r}\n")
