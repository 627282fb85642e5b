"""Quadratic maps ``z -> lam z + z^2`` and the boundary of the Siegel disk."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from ..errors import Escape
from ..hypgeo import chordal_dist
from ..rotation import RotationNumber, cf_expand
from .rational import RationalMap

ESCAPE_RADIUS = 10.0


@dataclass(frozen=True, eq=False)
class Quadratic:
    """``f(z) = lam z + z^2``; ``lam = 0`` gives the squaring map."""

    lam: complex

    @property
    def degree(self) -> int:
        return 2

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = z * (self.lam + z)
        return complex(out) if out.ndim == 0 else out

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        out = self.lam + 2.0 * z
        return complex(out) if out.ndim == 0 else out

    @property
    def critical_point(self) -> complex:
        return -self.lam / 2.0

    @property
    def critical_value(self) -> complex:
        return -self.lam * self.lam / 4.0

    @property
    def critical_points(self) -> list[tuple[complex, int]]:
        return [(self.critical_point, 1), (complex(np.inf), 1)]

    @property
    def critical_values(self) -> list[complex]:
        return [self.critical_value, complex(np.inf)]

    def partner(self, w):
        """The other preimage of ``f(w)``."""
        return -self.lam - np.asarray(w, dtype=complex)

    def preimages_many(self, z) -> np.ndarray:
        """Both roots of ``w^2 + lam w - z = 0`` for every target, shape ``(M, 2)``.

        The larger root comes from the quadratic formula with the non-cancelling
        sign and the smaller from the product ``w1 w2 = -z``; one Newton step
        cleans up both.
        """
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        lam = self.lam
        s = np.sqrt(lam * lam + 4.0 * z)
        same = (np.conj(lam) * s).real >= 0.0
        big = np.where(same, -lam - s, -lam + s) / 2.0
        with np.errstate(invalid="ignore", divide="ignore"):
            small = np.where(big != 0, -z / big, 0.0)
        roots = np.stack([big, small], axis=1)
        df = 2.0 * roots + lam
        ok = np.abs(df) > 1e-300
        fval = roots * (roots + lam) - z[:, None]
        roots = roots - np.where(ok, fval / np.where(ok, df, 1.0), 0.0)
        return roots

    def preimages(self, z: complex) -> np.ndarray:
        if np.isinf(z):
            return np.array([complex(np.inf)] * 2)
        return self.preimages_many(np.array([z]))[0]

    def as_rational(self) -> RationalMap:
        return RationalMap.polynomial([1.0, self.lam, 0.0])


class QuadSiegel(Quadratic):
    """``lam = exp(2 pi i alpha)`` with alpha of bounded type."""

    def __init__(self, alpha: RotationNumber | float):
        if not isinstance(alpha, RotationNumber):
            alpha = cf_expand(float(alpha))
        object.__setattr__(self, "alpha", alpha)
        super().__init__(complex(np.exp(2j * math.pi * alpha.value)))

    @classmethod
    def golden(cls) -> "QuadSiegel":
        return cls(RotationNumber.golden())


@dataclass(frozen=True, eq=False)
class SiegelBoundary:
    """Critical orbit ordered by its rotation coordinate ``frac(n alpha)``."""

    points: np.ndarray  # ordered polyline (open; closes from last to first)
    phases: np.ndarray  # rotation coordinate of each point, increasing in [0, 1)

    @cached_property
    def max_gap(self) -> float:
        p = np.append(self.points, self.points[0])
        return float(np.max(np.abs(np.diff(p))))

    def subsample(self, m: int) -> np.ndarray:
        """``m`` points with phases closest to ``k/m``."""
        idx = np.searchsorted(self.phases, (np.arange(m) + 0.5) / m) % self.phases.size
        return self.points[np.unique(idx)]

    def point_at_phase(self, phase: float) -> complex:
        i = int(np.searchsorted(self.phases, phase % 1.0)) % self.phases.size
        return complex(self.points[i])

    @cached_property
    def _kdtree(self) -> cKDTree:
        return cKDTree(np.column_stack([self.points.real, self.points.imag]))

    def distance(self, z) -> np.ndarray:
        """Euclidean distance from points to the boundary polyline.

        A segment at distance ``d`` has an endpoint within ``d + max_gap / 2``,
        so only segments next to vertices inside that ball are examined.
        """
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        xy = np.column_stack([z.real, z.imag])
        tree = self._kdtree
        d_vert, _ = tree.query(xy)
        half = 0.5 * self.max_gap
        n = self.points.size
        out = np.empty(z.shape)
        for i, (zz, r) in enumerate(zip(z, d_vert)):
            idx = np.asarray(tree.query_ball_point(xy[i], r + half), dtype=np.int64)
            seg = np.unique(np.concatenate([idx, (idx - 1) % n]))
            a = self.points[seg]
            ab = self.points[(seg + 1) % n] - a
            denom = np.where(np.abs(ab) > 0, np.abs(ab) ** 2, 1.0)
            t = np.clip(((zz - a) * np.conj(ab)).real / denom, 0.0, 1.0)
            out[i] = np.min(np.abs(zz - (a + t * ab)))
        return out

    def distance_brute(self, z) -> np.ndarray:
        """Same as ``distance`` by scanning every segment (slow; kept as a check)."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        a = self.points
        b = np.roll(a, -1)
        out = np.full(z.shape, np.inf)
        for i in range(0, a.size, 4096):
            aa, bb = a[i : i + 4096], b[i : i + 4096]
            ab = bb - aa
            denom = np.where(np.abs(ab) > 0, np.abs(ab) ** 2, 1.0)
            t = np.clip(((z[:, None] - aa[None, :]) * np.conj(ab)[None, :]).real / denom[None, :], 0.0, 1.0)
            d = np.abs(z[:, None] - (aa[None, :] + t * ab[None, :]))
            out = np.minimum(out, d.min(axis=1))
        return out


def critical_orbit(f: Quadratic, n: int, start: int = 0) -> np.ndarray:
    """``f^k(c)`` for ``k = start .. start + n - 1``."""
    z = complex(f.critical_point)
    for _ in range(start):
        z = z * (f.lam + z)
    out = np.empty(n, dtype=complex)
    lam = f.lam
    for k in range(n):
        out[k] = z
        z = z * (lam + z)
        if abs(z) > ESCAPE_RADIUS:
            raise Escape(f"critical orbit left the radius-{ESCAPE_RADIUS} disk at step {start + k + 1}")
    return out


def siegel_boundary(f: Quadratic, n: int = 10**5) -> SiegelBoundary:
    """The critical orbit, a dense sample of the Siegel disk boundary.

    The conjugacy to the rotation places ``f^k(c)`` at phase ``k alpha``
    (mod 1), which orders the orbit along the boundary curve.  A plain
    ``Quadratic`` is accepted too, with alpha read off the multiplier; a
    critical orbit that creeps into the fixed point (parabolic or rational
    multipliers) has no disk to sample and raises ``Escape``.
    """
    if n < 10**4:
        raise ValueError("need at least 10^4 orbit points")
    orbit = critical_orbit(f, n)
    # on a Siegel boundary the orbit keeps its distance from the fixed point
    if np.min(np.abs(orbit)) < 1e-2 * abs(f.critical_value):
        raise Escape("critical orbit collapses onto the fixed point; no Siegel disk")
    a = f.alpha.value if isinstance(f, QuadSiegel) else (np.angle(f.lam) / (2 * math.pi)) % 1.0
    k = np.arange(n, dtype=np.float64)
    phase = np.mod(k * a, 1.0)
    order = np.argsort(phase, kind="stable")
    return SiegelBoundary(orbit[order], phase[order])


def postcritical_sample(f: Quadratic, n: int) -> np.ndarray:
    """``f^k(c)`` for ``1 <= k <= n`` over the finite critical point, plus infinity; deduplicated."""
    if n < 1:
        raise ValueError("n must be >= 1")
    pts = list(critical_orbit(f, n, start=1)) + [complex(np.inf)]
    out: list[complex] = []
    for p in pts:
        if not out or np.min(chordal_dist(np.array(out), np.full(len(out), p))) > 1e-9:
            out.append(p)
    return np.array(out)


def invariance_residual(f: Quadratic, bd: SiegelBoundary, sample: int = 4096, seed: int = 0) -> float:
    """Largest distance from ``f`` of sampled boundary points to the boundary polyline."""
    rng = np.random.default_rng(seed)
    idx = rng.choice(bd.points.size, size=min(sample, bd.points.size), replace=False)
    return float(np.max(bd.distance(f(bd.points[idx]))))
