"""Equipotentials and ray segments in the basin of infinity of a quadratic map.

``Gamma_0`` is the circle of radius ``R0`` parametrized by ``theta`` in turns.
``Gamma_n(theta)`` is the preimage of ``Gamma_{n-1}(2 theta)`` chosen by
continuity in ``theta``, starting from the preimage of ``Gamma_{n-1}(0)``
nearest to it.  On a grid of ``L`` angles every value is an exact preimage
of a grid value one level up.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import TrackingLost
from ..hypgeo import chordal_dist, polyline_self_intersects
from .curves import _align, _min_gap, lift_path
from .siegel import Quadratic

GRID = 2**16
MIN_BASE_RADIUS = 4.0


@dataclass
class Equipotentials:
    f: Quadratic
    base_radius: float
    grid: int
    levels: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def build(cls, f: Quadratic, n: int, base_radius: float = MIN_BASE_RADIUS, grid: int = GRID) -> "Equipotentials":
        if base_radius < MIN_BASE_RADIUS:
            raise ValueError(f"base radius must be at least {MIN_BASE_RADIUS}")
        if n < 0:
            raise ValueError("n must be >= 0")
        eq = cls(f, base_radius, grid)
        j = np.arange(grid)
        eq.levels.append(base_radius * np.exp(2j * math.pi * j / grid))
        for _ in range(n):
            eq._extend()
        return eq

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def _extend(self) -> None:
        prev = self.levels[-1]
        j = np.arange(self.grid)
        target = prev[(2 * j) % self.grid]
        tracks = _align(self.f.preimages_many(target))
        step = np.max(np.abs(np.diff(tracks, axis=0)), axis=1)
        if np.any(step >= _min_gap(tracks[1:]) / 3.0):
            raise TrackingLost(f"equipotential {self.depth + 1} needs a finer grid than {self.grid}")
        k = int(np.argmin(np.abs(tracks[0] - prev[0])))
        cur = tracks[:, k].copy()
        # closing up: the last grid value must continue into the first
        if abs(cur[-1] - cur[0]) >= _min_gap(tracks[:1])[0] / 3.0:
            raise TrackingLost("equipotential did not close after one turn")
        self.levels.append(cur)

    def ensure(self, n: int) -> None:
        while self.depth < n:
            self._extend()

    def gamma(self, n: int, theta) -> np.ndarray:
        """``Gamma_n`` at angles in turns; off-grid angles follow the branch of the nearest grid value."""
        self.ensure(n)
        theta = np.mod(np.atleast_1d(np.asarray(theta, dtype=float)), 1.0)
        pos = theta * self.grid
        idx = np.rint(pos).astype(np.int64) % self.grid
        on = np.abs(pos - np.rint(pos)) < 1e-9
        out = self.levels[n][idx].astype(complex)
        off = np.flatnonzero(~on)
        if off.size and n == 0:
            out[off] = self.base_radius * np.exp(2j * math.pi * theta[off])
        elif off.size:
            up = self.gamma(n - 1, 2.0 * theta[off])
            roots = self.f.preimages_many(up)
            pick = np.argmin(np.abs(roots - out[off, None]), axis=1)
            out[off] = roots[np.arange(off.size), pick]
        return out

    def curve(self, n: int) -> np.ndarray:
        self.ensure(n)
        return self.levels[n]

    def is_simple(self, n: int, sample: int = 2048) -> bool:
        c = self.curve(n)
        step = max(1, c.size // sample)
        return not polyline_self_intersects(c[::step], closed=True)

    def residual(self, n: int) -> float:
        """Largest chordal gap between ``f(Gamma_n(theta))`` and ``Gamma_{n-1}(2 theta)`` on the grid."""
        if n < 1:
            raise ValueError("n must be >= 1")
        self.ensure(n)
        j = np.arange(self.grid)
        return float(np.max(chordal_dist(self.f(self.levels[n]), self.levels[n - 1][(2 * j) % self.grid])))

    def sup_gap(self, n: int, angles: int = 512) -> float:
        """``sup_theta`` chordal distance between ``Gamma_n`` and ``Gamma_{n+1}`` over equally spaced angles."""
        theta = np.arange(angles) / angles
        return float(np.max(chordal_dist(self.gamma(n, theta), self.gamma(n + 1, theta))))

    def cauchy_profile(self, n_max: int, angles: int = 512) -> list[float]:
        return [self.sup_gap(n, angles) for n in range(n_max + 1)]


def equipotential(f: Quadratic, n: int, samples: int = 512, base_radius: float = MIN_BASE_RADIUS, grid: int = GRID) -> np.ndarray:
    """``Gamma_n`` at ``samples`` equally spaced angles."""
    eq = Equipotentials.build(f, n, base_radius, grid)
    return eq.gamma(n, np.arange(samples) / samples)


def non_increasing_within(values: list[float], noise: float = 0.1) -> bool:
    """Each value is at most ``1 + noise`` times the smallest value before it."""
    low = math.inf
    for v in values:
        if v > (1.0 + noise) * low:
            return False
        low = min(low, v)
    return True


# --------------------------------------------------------------------------
# ray segments


@dataclass
class RaySegment:
    theta: float
    pieces: list[np.ndarray]  # piece k joins Gamma_k(theta) to Gamma_{k+1}(theta)
    targets: list[np.ndarray | None]  # targets[k] holds f of piece k for k >= 1

    @property
    def n(self) -> int:
        return len(self.pieces)

    @property
    def polyline(self) -> np.ndarray:
        out = [self.pieces[0]]
        for p in self.pieces[1:]:
            out.append(p[1:])
        return np.concatenate(out)

    def residual(self, f: Quadratic) -> float:
        """Largest chordal gap between ``f`` of the lifted vertices and their targets."""
        res = [float(np.max(chordal_dist(f(p), t))) for p, t in zip(self.pieces[1:], self.targets[1:])]
        return max(res, default=0.0)


def ray_segment(f: Quadratic, theta: float, n: int, eq: Equipotentials | None = None, vertices: int = 64) -> RaySegment:
    """Polyline from ``Gamma_0(theta)`` to ``Gamma_n(theta)``.

    The first piece is the straight segment between the first two
    equipotentials; piece ``k+1`` at ``theta`` is the lift of piece ``k`` at
    ``2 theta`` that starts on ``Gamma_{k+1}(theta)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    theta = float(theta) % 1.0
    if eq is None:
        eq = Equipotentials.build(f, n)
    eq.ensure(n)
    angles = [(theta * 2**m) % 1.0 for m in range(n)]

    # build pieces level by level for the angle chain theta, 2 theta, 4 theta, ...
    def first_piece(a: float) -> np.ndarray:
        z0, z1 = eq.gamma(0, a)[0], eq.gamma(1, a)[0]
        s = np.linspace(0.0, 1.0, vertices)
        return z0 + s * (z1 - z0)

    # chain[m][k] is piece k at angle theta * 2^m
    pieces_at: dict[tuple[int, int], np.ndarray] = {}
    targets_at: dict[tuple[int, int], np.ndarray] = {}
    for m in range(n):
        pieces_at[(m, 0)] = first_piece(angles[m])
    for k in range(1, n):
        for m in range(n - k):
            parent = pieces_at[(m + 1, k - 1)]
            start = eq.gamma(k, angles[m])[0]
            lifted, tg = lift_path(f, parent, start)
            end = eq.gamma(k + 1, angles[m])[0]
            if abs(lifted[0] - start) > 1e-9 * (1 + abs(start)) or abs(lifted[-1] - end) > 1e-9 * (1 + abs(end)):
                raise TrackingLost(f"ray piece {k} at angle {angles[m]} does not join consecutive equipotentials")
            pieces_at[(m, k)] = lifted
            targets_at[(m, k)] = tg
    pieces = [pieces_at[(0, k)] for k in range(n)]
    targets = [None] + [targets_at[(0, k)] for k in range(1, n)]
    return RaySegment(theta, pieces, targets)
