"""Closed polylines and their pull-backs under a rational map.

A pull-back tracks every preimage of the curve's vertices along the loop.
Tracks are matched vertex to vertex by nearest roots and an edge is accepted
only while every root moves less than a third of the smallest distance
between roots; otherwise the edge is split at its midpoint.  After one lap
the tracks are permuted (monodromy) and each cycle of the permutation is one
component of the preimage.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import CriticalValueOnCurve, TrackingLost
from ..hypgeo import chordal_diameter, chordal_dist, polyline_self_intersects

MAX_VERTICES = 2**14
CRITICAL_MARGIN = 1e-6
PERTURBATION = 1e-6


class CurvePerturbedWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class JordanCurve:
    """Closed polyline; ``vertices`` lists each vertex once (the closing edge is implicit)."""

    vertices: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.vertices, dtype=complex).ravel()
        if v.size > 1 and v[0] == v[-1]:
            v = v[:-1]
        if v.size < 16:
            raise ValueError("a closed curve needs at least 16 vertices")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @classmethod
    def circle(cls, centre: complex, radius: float, n: int = 256) -> "JordanCurve":
        t = np.arange(n) * (2.0 * np.pi / n)
        return cls(centre + radius * np.exp(1j * t))

    def __len__(self) -> int:
        return self.vertices.size

    @property
    def closed_vertices(self) -> np.ndarray:
        return np.append(self.vertices, self.vertices[0])

    @property
    def signed_area(self) -> float:
        v = self.vertices
        w = np.roll(v, -1)
        return 0.5 * float(np.sum(v.real * w.imag - w.real * v.imag))

    @property
    def counterclockwise(self) -> bool:
        return self.signed_area > 0.0

    def edge_lengths(self) -> np.ndarray:
        v = self.vertices
        return chordal_dist(v, np.roll(v, -1))

    def chordal_diameter(self) -> float:
        return chordal_diameter(self.vertices)

    def winding_number(self, z) -> np.ndarray:
        """Winding number of the polyline around each point."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        v = self.closed_vertices
        out = np.zeros(z.shape)
        for i in range(0, z.size, 1024):
            zz = z[i : i + 1024, None]
            a = v[None, :-1] - zz
            b = v[None, 1:] - zz
            out[i : i + 1024] = np.sum(np.angle(b / a), axis=1) / (2.0 * np.pi)
        return np.rint(out).astype(int)

    def contains(self, z) -> np.ndarray:
        return self.winding_number(z) != 0

    def distance(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        a = self.vertices
        ab = np.roll(a, -1) - a
        denom = np.where(np.abs(ab) > 0, np.abs(ab) ** 2, 1.0)
        t = np.clip(((z[:, None] - a[None, :]) * np.conj(ab)[None, :]).real / denom[None, :], 0.0, 1.0)
        return np.abs(z[:, None] - (a[None, :] + t * ab[None, :])).min(axis=1)

    def self_intersects(self) -> bool:
        return polyline_self_intersects(self.vertices, closed=True)

    def to_csv(self, path) -> None:
        v = self.closed_vertices
        np.savetxt(path, np.column_stack([v.real, v.imag]), delimiter=",", header="x,y", comments="")


# --------------------------------------------------------------------------
# root tracking


def _all_preimages(f, z: np.ndarray) -> np.ndarray:
    if hasattr(f, "preimages_many"):
        return f.preimages_many(z)
    return np.array([f.preimages(zz) for zz in z])


def _align(roots: np.ndarray) -> np.ndarray:
    """Reorder each row so that column ``k`` is a continuous track."""
    m, d = roots.shape
    if d == 1:
        return roots.copy()
    if d == 2:
        a, b = roots[:, 0], roots[:, 1]
        keep = np.abs(a[1:] - a[:-1]) + np.abs(b[1:] - b[:-1])
        swap = np.abs(a[1:] - b[:-1]) + np.abs(b[1:] - a[:-1])
        flip = np.concatenate([[0], np.cumsum(swap < keep) % 2]).astype(bool)
        out = roots.copy()
        out[flip] = roots[flip][:, ::-1]
        return out
    perms = np.array(list(itertools.permutations(range(d))))
    out = np.empty_like(roots)
    out[0] = roots[0]
    for j in range(1, m):
        cand = roots[j][perms]
        cost = np.sum(np.abs(cand - out[j - 1][None, :]), axis=1)
        out[j] = cand[int(np.argmin(cost))]
    return out


def _match(prev: np.ndarray, nxt: np.ndarray) -> np.ndarray:
    """Permutation ``p`` with ``nxt[p[k]]`` closest to ``prev[k]``."""
    d = prev.size
    perms = np.array(list(itertools.permutations(range(d))))
    cost = np.sum(np.abs(nxt[perms] - prev[None, :]), axis=1)
    return perms[int(np.argmin(cost))]


def _min_gap(rows: np.ndarray) -> np.ndarray:
    d = rows.shape[1]
    gap = np.full(rows.shape[0], np.inf)
    for i in range(d):
        for j in range(i + 1, d):
            gap = np.minimum(gap, np.abs(rows[:, i] - rows[:, j]))
    return gap


@dataclass
class TrackedLoop:
    targets: np.ndarray  # refined target vertices (one lap)
    tracks: np.ndarray  # (M, d) continuous root tracks
    monodromy: np.ndarray  # tracks[-1, k] continues into tracks[0, monodromy[k]]


def track_loop(f, targets: np.ndarray, max_vertices: int = MAX_VERTICES, max_edge: float | None = None) -> TrackedLoop:
    """Follow every preimage around the closed polyline ``targets``.

    With ``max_edge`` set, edges whose preimage edges are longer than that
    (chordally) are split as well.
    """
    z = np.asarray(targets, dtype=complex)
    while True:
        roots = _all_preimages(f, z)
        tracks = _align(roots)
        perm = _match(tracks[-1], tracks[0])
        nxt = np.vstack([tracks[1:], tracks[0][perm][None, :]])
        move = np.max(np.abs(nxt - tracks), axis=1)
        gap = np.minimum(_min_gap(tracks), _min_gap(nxt))
        bad = move >= gap / 3.0
        if max_edge is not None:
            edge = np.max(chordal_dist(tracks, nxt), axis=1)
            bad |= edge > max_edge
        if not np.any(bad):
            return TrackedLoop(z, tracks, perm)
        idx = np.flatnonzero(bad)
        if z.size + idx.size > max_vertices:
            raise TrackingLost(f"refinement would exceed {max_vertices} vertices")
        mids = 0.5 * (z[idx] + z[(idx + 1) % z.size])
        z = np.insert(z, idx + 1, mids)


def _cycles(perm: np.ndarray) -> list[list[int]]:
    seen = np.zeros(perm.size, dtype=bool)
    out = []
    for k in range(perm.size):
        if seen[k]:
            continue
        cyc = []
        j = k
        while not seen[j]:
            seen[j] = True
            cyc.append(j)
            j = int(perm[j])
        out.append(cyc)
    return out


@dataclass(frozen=True, eq=False)
class PulledComponent:
    curve: JordanCurve
    laps: int  # how many times the component covers the input loop
    targets: np.ndarray  # image of each vertex (the refined input vertices, repeated per lap)
    label: int  # index of the starting track


def _safe_curve(f, curve: JordanCurve) -> JordanCurve:
    cvs = [c for c in f.critical_values if np.isfinite(c)]
    if not cvs:
        return curve
    dist = min(float(curve.distance(np.array([c]))[0]) for c in cvs)
    if dist >= CRITICAL_MARGIN:
        return curve
    v = curve.vertices
    centre = np.mean(v)
    radial = (v - centre) / np.where(np.abs(v - centre) > 0, np.abs(v - centre), 1.0)
    moved = JordanCurve(v + PERTURBATION * radial)
    dist2 = min(float(moved.distance(np.array([c]))[0]) for c in cvs)
    if dist2 < 1e-12:
        raise CriticalValueOnCurve("curve passes through a critical value")
    warnings.warn("curve passes near a critical value; pushed 1e-6 outward", CurvePerturbedWarning, stacklevel=3)
    return moved


def decimate(points: np.ndarray, targets: np.ndarray, max_edge: float) -> tuple[np.ndarray, np.ndarray]:
    """Drop vertices of a closed polyline while chordal edges stay below ``max_edge / 2``."""
    n = points.size
    if n <= 16:
        return points, targets
    seg = chordal_dist(points, np.roll(points, -1))
    keep = np.zeros(n, dtype=bool)
    keep[0] = True
    acc = 0.0
    for i in range(1, n):
        acc += seg[i - 1]
        if acc + seg[i] > max_edge / 2.0:
            keep[i] = True
            acc = 0.0
    if keep.sum() < 16:
        step = max(1, n // 16)
        keep[::step] = True
    return points[keep], targets[keep]


def pullback_curve(
    f,
    curve: JordanCurve,
    max_vertices: int = MAX_VERTICES,
    resolution: int | None = None,
) -> list[PulledComponent]:
    """Preimage components of a closed curve.

    ``resolution`` asks for roughly that many vertices per component, by
    refining edges of the input and then dropping surplus vertices.
    """
    curve = _safe_curve(f, curve)
    loop = track_loop(f, curve.vertices, max_vertices)
    if resolution is not None:
        per = np.sum(chordal_dist(loop.tracks, np.roll(loop.tracks, -1, axis=0)), axis=0)
        h = float(np.max(per)) / resolution
        if h > 0:
            loop = track_loop(f, loop.targets, max_vertices, max_edge=2.0 * h)
    comps = []
    for cyc in _cycles(loop.monodromy):
        pts = np.concatenate([loop.tracks[:, k] for k in cyc])
        tg = np.tile(loop.targets, len(cyc))
        if resolution is not None:
            per = float(np.sum(chordal_dist(pts, np.roll(pts, -1))))
            pts, tg = decimate(pts, tg, 2.0 * per / resolution)
        comps.append(PulledComponent(JordanCurve(pts), len(cyc), tg, cyc[0]))
    return comps


def pullback_residual(f, comp: PulledComponent) -> float:
    """Largest chordal distance between ``f`` of a vertex and its target."""
    return float(np.max(chordal_dist(f(comp.curve.vertices), comp.targets)))


def lift_path(f, path: np.ndarray, start: complex, max_vertices: int = MAX_VERTICES) -> tuple[np.ndarray, np.ndarray]:
    """Lift an open polyline through ``f`` starting from the preimage nearest ``start``.

    Returns the lifted vertices and their targets (the input vertices plus
    any midpoints inserted to keep every step safe).
    """
    z = np.asarray(path, dtype=complex)
    while True:
        tracks = _align(_all_preimages(f, z))
        move = np.max(np.abs(tracks[1:] - tracks[:-1]), axis=1)
        gap = np.minimum(_min_gap(tracks[1:]), _min_gap(tracks[:-1]))
        bad = np.flatnonzero(move >= gap / 3.0)
        if bad.size == 0:
            k = int(np.argmin(np.abs(tracks[0] - start)))
            return tracks[:, k].copy(), z
        if z.size + bad.size > max_vertices:
            raise TrackingLost(f"path refinement would exceed {max_vertices} vertices")
        z = np.insert(z, bad + 1, 0.5 * (z[bad] + z[bad + 1]))
