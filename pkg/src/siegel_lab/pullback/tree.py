"""Trees of iterated pull-backs of a Jordan domain and their diameter profiles."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from ..errors import NodeCap, SiegelLabError
from .curves import JordanCurve, pullback_curve, pullback_residual
from .siegel import SiegelBoundary

TOUCH_TOL = 1e-3
LEVEL_CAP = 10**4
NODE_RESOLUTION = 256


@dataclass(frozen=True)
class ArcTouch:
    """Boundary contact of a closed domain: the shortest boundary arc holding every contact point.

    ``start`` and ``length`` are in turns (boundary phase for a Siegel boundary,
    angle / 2 pi for the unit circle).
    """

    touches: bool
    start: float = 0.0
    length: float = 0.0
    points: int = 0

    def to_dict(self) -> dict:
        return {"touches": self.touches, "start": self.start, "length": self.length, "points": self.points}


def _shortest_arc(phases: np.ndarray) -> tuple[float, float]:
    p = np.sort(np.mod(phases, 1.0))
    if p.size == 1:
        return float(p[0]), 0.0
    gaps = np.diff(np.append(p, p[0] + 1.0))
    k = int(np.argmax(gaps))
    start = p[(k + 1) % p.size]
    return float(start), float(1.0 - gaps[k])


def _contacts(curve: JordanCurve, pts: np.ndarray, tol: float) -> np.ndarray:
    """Mask of ``pts`` lying in the closed domain bounded by ``curve`` or within ``tol`` of it."""
    v = curve.vertices
    lo_x, hi_x = v.real.min() - tol, v.real.max() + tol
    lo_y, hi_y = v.imag.min() - tol, v.imag.max() + tol
    near = (pts.real >= lo_x) & (pts.real <= hi_x) & (pts.imag >= lo_y) & (pts.imag <= hi_y)
    out = np.zeros(pts.size, dtype=bool)
    idx = np.flatnonzero(near)
    if idx.size:
        sub = pts[idx]
        hit = curve.distance(sub) <= tol
        rest = ~hit
        if np.any(rest):
            hit[rest] = curve.contains(sub[rest])
        out[idx] = hit
    return out


def boundary_touch(curve: JordanCurve, boundary: SiegelBoundary | None = None, tol: float = TOUCH_TOL) -> ArcTouch:
    """Contact of the closed domain with a Siegel boundary sample, or with the unit circle if none is given."""
    if boundary is None:
        n = 4096
        phase = np.arange(n) / n
        pts = np.exp(2j * math.pi * phase)
    else:
        pts, phase = boundary.points, boundary.phases
    hit = _contacts(curve, pts, tol)
    if not np.any(hit):
        return ArcTouch(False)
    start, length = _shortest_arc(phase[hit])
    return ArcTouch(True, start, length, int(hit.sum()))


@dataclass(frozen=True)
class HypothesisReport:
    """Checks that a seed domain sits outside the disk and meets its closure only along a short arc."""

    outside: bool
    touches: bool
    arc: ArcTouch
    deep_points: int  # boundary points strictly inside the domain beyond the tolerance
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.outside and self.touches and self.deep_points == 0

    def to_dict(self) -> dict:
        return {
            "outside": self.outside,
            "touches": self.touches,
            "arc": self.arc.to_dict(),
            "deep_points": self.deep_points,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "note": "contact tested against the sampled boundary polyline",
        }


def check_seed(curve: JordanCurve, boundary: SiegelBoundary, centre: complex = 0j, tol: float = TOUCH_TOL) -> HypothesisReport:
    """Seed-domain hypotheses against a boundary sample.

    ``centre`` is a point of the disk itself (the fixed point) which must lie
    outside the seed.
    """
    outside = not bool(curve.contains(np.array([centre]))[0])
    arc = boundary_touch(curve, boundary, tol)
    inside = _contacts(curve, boundary.points, 0.0)
    deep = 0
    if np.any(inside):
        deep = int(np.sum(curve.distance(boundary.points[inside]) > tol))
    return HypothesisReport(outside, arc.touches, arc, deep, tol)


def touching_disk(boundary: SiegelBoundary, phase: float, chordal_diameter: float, vertices: int = 256) -> tuple[JordanCurve, complex, float]:
    """Round disk outside the boundary curve, tangent to it near the point of the given phase.

    The centre slides outward along the ray through the boundary point until
    the distance to the polyline equals the radius; the radius is set so the
    disk has the requested chordal diameter.
    """
    p = boundary.point_at_phase(phase)
    u = p / abs(p)

    def place(r: float) -> complex:
        g = lambda s: float(boundary.distance(np.array([p + s * u]))[0]) - r
        s = brentq(g, 0.0, 4.0 * r + 1.0, xtol=1e-14)
        return p + s * u

    def chordal_diam(c: complex, r: float) -> float:
        # the extreme pair lies on the line through 0 and c
        a, b = abs(c) - r, abs(c) + r
        return 2.0 * abs(b - a) / math.sqrt((1 + a * a) * (1 + b * b))

    r = chordal_diameter * (1.0 + abs(p) ** 2) / 4.0
    for _ in range(50):
        c = place(r)
        d = chordal_diam(c, r)
        if abs(d - chordal_diameter) < 1e-12:
            break
        r *= chordal_diameter / d
    return JordanCurve.circle(c, r, vertices), c, r


# --------------------------------------------------------------------------
# the tree


@dataclass
class PullbackNode:
    id: int
    depth: int
    parent: int | None
    label: str
    curve: JordanCurve | None
    chordal_diam: float
    touch: ArcTouch
    residual: float = 0.0
    laps: int = 1
    children: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "depth": self.depth,
            "parent": self.parent,
            "label": self.label,
            "chordal_diam": self.chordal_diam,
            "touches_boundary": self.touch.to_dict(),
            "residual": self.residual,
            "laps": self.laps,
            "vertices": 0 if self.curve is None else len(self.curve),
            "children": self.children,
        }


@dataclass
class PullbackTree:
    nodes: list[PullbackNode]
    depth: int
    policy: str
    seed: int | None
    degree: int
    findings: list[dict] = field(default_factory=list)

    def level(self, n: int) -> list[PullbackNode]:
        return [v for v in self.nodes if v.depth == n]

    def level_sizes(self) -> list[int]:
        out = [0] * (self.depth + 1)
        for v in self.nodes:
            out[v.depth] += 1
        return out

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "policy": self.policy,
            "seed": self.seed,
            "degree": self.degree,
            "level_sizes": self.level_sizes(),
            "profile": max_diam_profile(self),
            "findings": self.findings,
            "nodes": [v.to_dict() for v in self.nodes],
        }

    def to_json(self, path=None) -> str:
        s = json.dumps(self.to_dict(), indent=1)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(s)
        return s

    def profile_csv(self, path) -> None:
        prof = max_diam_profile(self)
        with open(path, "w") as fh:
            fh.write("depth,max_chordal_diam,nodes\n")
            for n, (d, k) in enumerate(zip(prof, self.level_sizes())):
                fh.write(f"{n},{d!r},{k}\n")


def pullback_tree(
    f,
    v0: JordanCurve,
    depth: int,
    policy: str = "all",
    seed: int | None = None,
    boundary: SiegelBoundary | None = None,
    level_cap: int = LEVEL_CAP,
    resolution: int = NODE_RESOLUTION,
    keep_curves: bool = True,
) -> PullbackTree:
    """Pull ``v0`` back ``depth`` times, along every branch or one random branch.

    Curves are kept only on the frontier unless ``keep_curves`` is set.
    Tracking failures prune that branch and are recorded as findings.
    """
    if f.degree < 2:
        raise ValueError("pull-back trees need a map of degree at least 2")
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if policy not in ("all", "random"):
        raise ValueError(f"unknown policy {policy!r}")
    if policy == "random" and seed is None:
        raise ValueError("random policy needs a seed")
    rng = np.random.default_rng(seed)
    root = PullbackNode(0, 0, None, "", v0, v0.chordal_diameter(), boundary_touch(v0, boundary))
    nodes = [root]
    frontier = [root]
    findings: list[dict] = []
    for n in range(1, depth + 1):
        nxt: list[PullbackNode] = []
        for node in frontier:
            try:
                comps = pullback_curve(f, node.curve, resolution=resolution)
            except SiegelLabError as exc:
                findings.append({"depth": n, "parent": node.id, "kind": exc.kind, "message": str(exc)})
                continue
            if policy == "random":
                comps = [comps[int(rng.integers(len(comps)))]]
            for comp in comps:
                label = f"{node.label}.{comp.label}" if node.label else str(comp.label)
                child = PullbackNode(
                    len(nodes), n, node.id, label, comp.curve, comp.curve.chordal_diameter(),
                    boundary_touch(comp.curve, boundary), pullback_residual(f, comp), comp.laps,
                )
                node.children.append(child.id)
                nodes.append(child)
                nxt.append(child)
                if len(nxt) > level_cap:
                    raise NodeCap(f"level {n} exceeds {level_cap} nodes")
            if not keep_curves and node.depth > 0:
                node.curve = None
        frontier = nxt
        if not frontier:
            break
    return PullbackTree(nodes, depth, policy, seed, f.degree, findings)


def max_diam_profile(tree: PullbackTree) -> list[float]:
    """Largest chordal diameter at each depth (``nan`` where a level is empty)."""
    if not tree.nodes:
        raise ValueError("empty tree")
    if tree.degree < 2:
        raise ValueError("profiles need a map of degree at least 2")
    out = [math.nan] * (tree.depth + 1)
    for v in tree.nodes:
        if math.isnan(out[v.depth]) or v.chordal_diam > out[v.depth]:
            out[v.depth] = v.chordal_diam
    return out


def envelope_bumps(profile: list[float], start: int = 0) -> float:
    """Worst relative rise of the profile above its running minimum from ``start`` on."""
    worst = 0.0
    low = math.inf
    for x in profile[start:]:
        if x < low:
            low = x
        elif low > 0:
            worst = max(worst, x / low - 1.0)
    return worst
