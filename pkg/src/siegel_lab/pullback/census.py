"""Counting large preimage components of the Siegel disk.

The disk is approximated by a polyline through its sampled boundary.  Its
first new preimage is the reflected copy ``-lam - Delta``; after that every
component has two preimages, since none of them contains the critical
value.  Components are pulled back in batches: each vertex has two roots,
the roots are sorted into continuous tracks along the polyline, and each
track is one child.  A batch row that fails the safe-step test is redone
with the adaptive curve pull-back.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import NodeCap, SiegelLabError
from ..hypgeo import chordal_diameter, chordal_dist
from .curves import JordanCurve, pullback_curve
from .siegel import QuadSiegel, SiegelBoundary, siegel_boundary

MAX_DEPTH = 20
BATCH = 2048
VERTICES = 256


@dataclass
class CensusReport:
    epsilon: float
    depth: int
    counts: list[int]
    components: list[int]
    max_diam: list[float]  # largest diameter seen per depth; exact for rows near epsilon, else within a factor 2 below
    vertices: int
    fallbacks: int = 0
    findings: list[dict] = field(default_factory=list)
    basin_marker: bool = True  # the basin of infinity is one more component, not counted here

    @property
    def first_zero(self) -> int | None:
        """First depth from which every count is 0."""
        for n in range(len(self.counts)):
            if all(c == 0 for c in self.counts[n:]):
                return n
        return None

    @property
    def total(self) -> int:
        return int(sum(self.counts))

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "depth": self.depth,
            "counts": self.counts,
            "components": self.components,
            "max_diam": self.max_diam,
            "vertices": self.vertices,
            "fallbacks": self.fallbacks,
            "first_zero": self.first_zero,
            "total_large": self.total,
            "basin_of_infinity": "separate component, not counted",
            "findings": self.findings,
        }


def _split_rows(f, parents: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Children of every row of ``parents`` and a mask of rows that passed the safe-step test."""
    b, m = parents.shape
    roots = f.preimages_many(parents.ravel()).reshape(b, m, 2)
    a, c = roots[..., 0], roots[..., 1]
    keep = np.abs(a[:, 1:] - a[:, :-1]) + np.abs(c[:, 1:] - c[:, :-1])
    swap = np.abs(a[:, 1:] - c[:, :-1]) + np.abs(c[:, 1:] - a[:, :-1])
    flip = np.concatenate([np.zeros((b, 1), dtype=bool), (np.cumsum(swap < keep, axis=1) % 2).astype(bool)], axis=1)
    t0 = np.where(flip, c, a)
    t1 = np.where(flip, a, c)
    # safe step on every edge, the closing one included
    n0, n1 = np.roll(t0, -1, axis=1), np.roll(t1, -1, axis=1)
    move = np.maximum(np.abs(n0 - t0), np.abs(n1 - t1))
    gap = np.minimum(np.abs(t0 - t1), np.abs(n0 - n1))
    ok = np.all(move < gap / 3.0, axis=1)
    return np.concatenate([t0, t1], axis=0), np.concatenate([ok, ok])


def _resample(points: np.ndarray, m: int) -> np.ndarray:
    idx = np.linspace(0, points.size, m, endpoint=False).astype(int)
    return points[idx]


def _fallback(f, parent: np.ndarray, m: int) -> np.ndarray:
    comps = pullback_curve(f, JordanCurve(parent))
    return np.array([_resample(c.curve.vertices, m) for c in comps])


def _diameters(rows: np.ndarray, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """Whether each row's chordal diameter exceeds ``eps``, and a lower bound for it.

    The distance ``L`` from vertex 0 gives ``L <= diam <= 2 L``; only rows
    with ``L <= eps < 2 L`` need the full pairwise maximum.
    """
    lo = np.max(chordal_dist(rows, rows[:, :1]), axis=1)
    big = lo > eps
    unsure = np.flatnonzero(~big & (2.0 * lo > eps))
    diam = lo.copy()
    for i in unsure:
        diam[i] = chordal_diameter(rows[i])
        big[i] = diam[i] > eps
    return big, diam


def fatou_census(
    f: QuadSiegel,
    depth: int,
    epsilon: float,
    boundary: SiegelBoundary | None = None,
    vertices: int = VERTICES,
    batch: int = BATCH,
    node_cap: int = 2**21,
) -> CensusReport:
    """Per-depth number of preimage components of the disk with chordal diameter above ``epsilon``.

    Depth 0 is the disk itself, depth 1 its reflected copy and depth ``n``
    the ``2^(n-1)`` components mapped onto the copy by ``f^(n-1)``.
    """
    if depth > MAX_DEPTH:
        raise ValueError(f"depth must be <= {MAX_DEPTH}")
    if depth < 0:
        raise ValueError("depth must be >= 0")
    total = 1 + sum(2 ** (n - 1) for n in range(1, depth + 1))
    if total > node_cap:
        raise NodeCap(f"{total} components exceed the cap {node_cap}")
    if boundary is None:
        boundary = siegel_boundary(f)
    disk = boundary.subsample(vertices)
    m = disk.size
    counts = [0] * (depth + 1)
    comps = [0] * (depth + 1)
    maxd = [0.0] * (depth + 1)
    rep = CensusReport(epsilon, depth, counts, comps, maxd, m)

    def tally(n: int, rows: np.ndarray) -> None:
        big, diam = _diameters(rows, epsilon)
        counts[n] += int(big.sum())
        comps[n] += rows.shape[0]
        maxd[n] = max(maxd[n], float(diam.max()))

    tally(0, disk[None, :])
    if depth == 0:
        return rep
    stack = [(1, f.partner(disk)[None, :])]
    while stack:
        n, rows = stack.pop()
        tally(n, rows)
        if n == depth:
            continue
        for i in range(0, rows.shape[0], batch):
            kids, ok = _split_rows(f, rows[i : i + batch])
            bad = np.flatnonzero(~ok[: kids.shape[0] // 2])
            if bad.size:
                parent = rows[i : i + batch]
                half = kids.shape[0] // 2
                keep = np.ones(kids.shape[0], dtype=bool)
                keep[bad] = False
                keep[bad + half] = False
                extra = []
                for j in bad:
                    try:
                        extra.append(_fallback(f, parent[j], m))
                    except SiegelLabError as exc:
                        rep.findings.append({"depth": n + 1, "kind": exc.kind, "message": str(exc)})
                rep.fallbacks += int(bad.size)
                kids = np.concatenate([kids[keep]] + extra, axis=0) if extra else kids[keep]
            stack.append((n + 1, kids))
    return rep
