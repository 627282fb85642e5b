"""Critical circle maps, their invariant measure and first-return statistics.

Two maps are supported: the rigid rotation ``theta -> theta + 2 pi alpha`` and
the degree-3 Blaschke family

    B_t(z) = exp(2 pi i t) z^2 (z - 3) / (1 - 3 z),

which preserves the unit circle and restricts to a circle homeomorphism with a
single cubic critical point at ``z = 1``.  On the circle its lift is

    F_t(theta) = theta - 2 atan2(sin theta, 3 - cos theta) + 2 pi t.

Dynamical length is measured with the empirical invariant measure of a long
orbit and normalized so that the whole circle has length ``2 pi``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numba import njit
from scipy.optimize import brentq

from .errors import CapExceeded, NoConvergence, TargetTooLarge
from .rotation import RotationNumber

TWO_PI = 2.0 * math.pi
ANGLE_TOL = 1e-12
DEFAULT_ORBIT = 10**6
DEFAULT_RETURN_CAP = 10**7
TUNE_MAX_BISECTIONS = 200
TUNE_MAX_ORBIT = 2**30

_KIND_CODES = {"rigid": 0, "blaschke": 1}


def wrap(theta):
    """Reduce angles to [0, 2 pi)."""
    out = np.mod(theta, TWO_PI)
    if np.ndim(out) == 0:
        out = float(out)
        return 0.0 if out >= TWO_PI else out
    out[out >= TWO_PI] = 0.0
    return out


def ccw(a: float, b: float) -> float:
    """Anticlockwise angular distance from ``a`` to ``b`` in [0, 2 pi)."""
    return wrap(b - a)


# --------------------------------------------------------------------------
# numba kernels


@njit(cache=True)
def _lift(kind, p, x):
    if kind == 0:
        return x + 2.0 * math.pi * p
    return x - 2.0 * math.atan2(math.sin(x), 3.0 - math.cos(x)) + 2.0 * math.pi * p


@njit(cache=True)
def _reduce(y):
    tp = 2.0 * math.pi
    k = math.floor(y / tp)
    x = y - k * tp
    if x >= tp:
        x -= tp
        k += 1
    elif x < 0.0:
        x += tp
        k -= 1
    return x, k


@njit(cache=True)
def _orbit(kind, p, x0, n):
    out = np.empty(n)
    x = x0
    for i in range(n):
        out[i] = x
        x, _ = _reduce(_lift(kind, p, x))
    return out


@njit(cache=True)
def _rotation_number(kind, p, x0, n):
    x, _ = _reduce(x0)
    start = x
    turns = 0
    for _ in range(n):
        x, k = _reduce(_lift(kind, p, x))
        turns += k
    return (turns + (x - start) / (2.0 * math.pi)) / n


@njit(cache=True)
def _in_arc(theta, a, length):
    d = theta - a
    d -= 2.0 * math.pi * math.floor(d / (2.0 * math.pi))
    return d > 0.0 and d < length


@njit(cache=True)
def _first_return(kind, p, a, length, x, cap):
    for n in range(1, cap + 1):
        x, _ = _reduce(_lift(kind, p, x))
        if _in_arc(x, a, length):
            return n, x
    return -1, x


@njit(cache=True)
def _first_returns(kind, p, a, length, xs, cap):
    out = np.empty(xs.shape[0], dtype=np.int64)
    for i in range(xs.shape[0]):
        n, _ = _first_return(kind, p, a, length, xs[i], cap)
        out[i] = n
    return out


# --------------------------------------------------------------------------
# arcs


@dataclass(frozen=True)
class CircleArc:
    """Open arc from ``a`` anticlockwise to ``b`` (radians)."""

    a: float
    b: float

    def __post_init__(self) -> None:
        a, b = wrap(float(self.a)), wrap(float(self.b))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        d = ccw(a, b)
        if d < ANGLE_TOL or d > TWO_PI - ANGLE_TOL:
            raise ValueError(f"degenerate arc ({a}, {b})")

    @classmethod
    def centered(cls, centre: float, length: float) -> "CircleArc":
        return cls(centre - length / 2.0, centre + length / 2.0)

    @property
    def length(self) -> float:
        """Euclidean (angular) length ``|I|``."""
        return ccw(self.a, self.b)

    @property
    def midpoint(self) -> float:
        return wrap(self.a + self.length / 2.0)

    def contains(self, theta: float) -> bool:
        d = ccw(self.a, theta)
        return 0.0 < d < self.length

    def contains_closed(self, theta: float, tol: float = ANGLE_TOL) -> bool:
        d = ccw(self.a, theta)
        return d <= self.length + tol or d >= TWO_PI - tol

    def points(self, n: int) -> np.ndarray:
        """``n`` interior points, evenly spaced, avoiding the endpoints."""
        s = (np.arange(n) + 0.5) / n
        return wrap(self.a + s * self.length)

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b}

    @classmethod
    def from_dict(cls, d: dict) -> "CircleArc":
        return cls(d["a"], d["b"])


# --------------------------------------------------------------------------
# maps


@dataclass(frozen=True)
class CircleMap:
    """A circle homeomorphism: ``kind`` is ``"rigid"`` (parameter alpha) or
    ``"blaschke"`` (parameter t)."""

    kind: str
    parameter: float

    def __post_init__(self) -> None:
        if self.kind not in _KIND_CODES:
            raise ValueError(f"unknown circle map kind {self.kind!r}")
        object.__setattr__(self, "parameter", float(self.parameter))

    @classmethod
    def rigid(cls, alpha: float | RotationNumber) -> "CircleMap":
        if isinstance(alpha, RotationNumber):
            alpha = alpha.value
        return cls("rigid", alpha)

    @classmethod
    def blaschke(cls, t: float) -> "CircleMap":
        return cls("blaschke", t)

    @property
    def code(self) -> int:
        return _KIND_CODES[self.kind]

    @property
    def critical_points_on_circle(self) -> list[tuple[float, int]]:
        """``(angle, local degree)`` pairs; the Blaschke point ``z = 1`` is cubic."""
        if self.kind == "rigid":
            return []
        return [(0.0, 3)]

    @property
    def critical_values_on_circle(self) -> list[float]:
        return [self(c) for c, _ in self.critical_points_on_circle]

    @property
    def branch_index(self) -> int:
        """Half of (local degree + 1) at the critical point; 0 without one."""
        cps = self.critical_points_on_circle
        return (cps[0][1] + 1) // 2 if cps else 0

    def lift(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.kind == "rigid":
            out = theta + TWO_PI * self.parameter
        else:
            out = theta - 2.0 * np.arctan2(np.sin(theta), 3.0 - np.cos(theta)) + TWO_PI * self.parameter
        return float(out) if out.ndim == 0 else out

    def __call__(self, theta):
        return wrap(self.lift(theta))

    def derivative(self, theta):
        """Derivative of the lift."""
        theta = np.asarray(theta, dtype=float)
        if self.kind == "rigid":
            out = np.ones_like(theta)
        else:
            c = np.cos(theta)
            out = 6.0 * (1.0 - c) / (5.0 - 3.0 * c)
        return float(out) if out.ndim == 0 else out

    def iterate(self, theta: float, n: int) -> float:
        if n == 0:
            return wrap(theta)
        return float(_orbit(self.code, self.parameter, wrap(float(theta)), n + 1)[-1])

    def preimage(self, theta: float) -> float:
        """The unique angle ``phi`` with ``G(phi) = theta``."""
        if self.kind == "rigid":
            return wrap(theta - TWO_PI * self.parameter)
        base = TWO_PI * self.parameter
        target = base + ccw(base, theta)
        if target - base < 1e-300:
            return 0.0
        phi = brentq(lambda x: self.lift(x) - target, 0.0, TWO_PI, xtol=1e-15, maxiter=200)
        return wrap(phi)

    def image_arc(self, arc: CircleArc) -> CircleArc:
        return CircleArc(self(arc.a), self(arc.b))

    def preimage_arc(self, arc: CircleArc) -> CircleArc:
        return CircleArc(self.preimage(arc.a), self.preimage(arc.b))

    def complex_eval(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == "rigid":
            return np.exp(1j * TWO_PI * self.parameter) * z
        return np.exp(1j * TWO_PI * self.parameter) * z**2 * (z - 3.0) / (1.0 - 3.0 * z)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "parameter": self.parameter,
            "critical_points": [[a, d] for a, d in self.critical_points_on_circle],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "CircleMap":
        return cls(d["kind"], d["parameter"])

    @classmethod
    def from_json(cls, s: str) -> "CircleMap":
        return cls.from_dict(json.loads(s))


def eval_map(g: CircleMap, theta):
    return g(theta)


def rotation_number(g: CircleMap, n: int = DEFAULT_ORBIT, theta0: float = 0.0) -> tuple[float, float]:
    """Return ``(rho, error_bound)`` from ``n`` iterates of the lift."""
    if n < 1000:
        raise ValueError("rotation_number needs at least 1000 iterates")
    rho = _rotation_number(g.code, g.parameter, float(theta0), int(n))
    return float(rho), 1.0 / n


@njit(cache=True)
def _compare_to_convergents(kind, p, qs, ps):
    """Order the rotation number of the map against alpha.

    ``F^q(0) > 2 pi p`` forces ``rho >= p/q`` and ``F^q(0) < 2 pi p`` forces
    ``rho <= p/q``.  Odd-index convergents lie above alpha, even-index ones
    below, so a single violated inequality settles the comparison.  Returns
    +1 (rho > alpha), -1 (rho < alpha) or 0 (consistent at every level).
    """
    tp = 2.0 * math.pi
    x = 0.0
    turns = 0
    done = 0
    for j in range(qs.shape[0]):
        q = qs[j]
        while done < q:
            x, k = _reduce(_lift(kind, p, x))
            turns += k
            done += 1
        # lift value F^q(0) - 2 pi p_j, computed without forming a large float
        d = (turns - ps[j]) * tp + x
        above = j % 2 == 1
        if above and d >= 0.0:
            return 1
        if (not above) and d <= 0.0:
            return -1
    return 0


def _convergent_arrays(alpha: RotationNumber, q_max: int) -> tuple[np.ndarray, np.ndarray]:
    from .rotation import convergents

    table = convergents(alpha)
    rows = [(p, q) for _, _, p, q in table.rows if q <= q_max]
    return np.array([q for _, q in rows], dtype=np.int64), np.array([p for p, _ in rows], dtype=np.int64)


def tune_to_rotation(alpha: RotationNumber | float, tol: float = 1e-5, q_max: int = 2**22) -> CircleMap:
    """Blaschke parameter whose rotation number is alpha, to ``tol``.

    The parameter is bisected until the bracket collapses to machine
    precision, which pushes the map off the low-period mode-locking plateaus
    that surround alpha; each midpoint is ordered against alpha through the
    convergents with ``q_n <= q_max``.  The final rotation number is then
    verified from an orbit long enough for its ``1/N`` error bound.
    """
    if not isinstance(alpha, RotationNumber):
        from .rotation import cf_expand

        alpha = cf_expand(float(alpha))
    a = alpha.value
    if tol * TUNE_MAX_ORBIT <= 1.0:
        raise NoConvergence(f"tolerance {tol:g} is below the achievable orbit resolution")
    qs, ps = _convergent_arrays(alpha, q_max)
    lo, hi = 0.0, 1.0
    for _ in range(TUNE_MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        side = _compare_to_convergents(1, mid, qs, ps)
        if side > 0:
            hi = mid
        elif side < 0:
            lo = mid
        else:
            break
    else:
        raise NoConvergence(f"bracket did not collapse within {TUNE_MAX_BISECTIONS} bisections")
    g = CircleMap.blaschke(0.5 * (lo + hi))
    n = int(min(TUNE_MAX_ORBIT, max(DEFAULT_ORBIT, math.ceil(4.0 / tol))))
    rho, err = rotation_number(g, n)
    if abs(rho - a) + err > tol:
        raise NoConvergence(f"rotation number {rho} misses {a} by more than {tol:g}")
    return g


# --------------------------------------------------------------------------
# invariant measure


@dataclass(frozen=True, eq=False)
class InvariantMeasure:
    """Empirical invariant measure of a length-``n_points`` orbit of ``x0``."""

    source: CircleMap
    n_points: int
    x0: float
    orbit: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, g: CircleMap, n_points: int = DEFAULT_ORBIT, x0: float = 0.0) -> "InvariantMeasure":
        pts = np.sort(_orbit(g.code, g.parameter, wrap(float(x0)), int(n_points)))
        pts.setflags(write=False)
        return cls(g, int(n_points), float(x0), pts)

    @property
    def resolution(self) -> float:
        return TWO_PI / self.n_points

    def count(self, arc: CircleArc) -> int:
        s = self.orbit
        # use the stored endpoints: a + length can round across an orbit point
        a, b = arc.a, arc.b
        if a < b:
            return int(np.searchsorted(s, b, "left") - np.searchsorted(s, a, "right"))
        return int(self.n_points - np.searchsorted(s, a, "right") + np.searchsorted(s, b, "left"))

    def sigma(self, arc: CircleArc) -> float:
        return TWO_PI * self.count(arc) / self.n_points

    def sigma_between(self, a: float, b: float) -> float:
        """sigma of the open arc (a, b); zero when the points coincide."""
        if ccw(a, b) < ANGLE_TOL:
            return 0.0
        return self.sigma(CircleArc(a, b))

    def _after(self, theta: float, k: int) -> float:
        """Angle halfway between the k-th and (k+1)-th orbit points after theta."""
        s = self.orbit
        i0 = int(np.searchsorted(s, wrap(theta), "right"))
        n = self.n_points
        lo = s[(i0 + k - 1) % n] if k > 0 else wrap(theta)
        hi = s[(i0 + k) % n]
        return wrap(lo + ccw(lo, hi) / 2.0)

    def _before(self, theta: float, k: int) -> float:
        s = self.orbit
        i0 = int(np.searchsorted(s, wrap(theta), "left")) - 1
        n = self.n_points
        hi = s[(i0 - k + 1) % n] if k > 0 else wrap(theta)
        lo = s[(i0 - k) % n]
        return wrap(lo + ccw(lo, hi) / 2.0)


def dynamical_length(mu: InvariantMeasure, arc: CircleArc) -> float:
    return mu.sigma(arc)


def arc_with_sigma(mu: InvariantMeasure, c: float, side: str, target: float) -> CircleArc:
    """Arc ``(c, x)`` (side ``"right"``) or ``(x, c)`` (side ``"left"``) of
    dynamical length ``target``.

    The endpoint is placed between consecutive orbit points, which is the
    limit of bisection in ``x`` against the step function ``sigma``.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    if target >= TWO_PI - mu.resolution:
        raise TargetTooLarge(f"target {target} leaves no room on the circle")
    if target <= 0.0:
        raise ValueError("target must be positive")
    k = max(1, int(round(target / mu.resolution)))
    if side == "right":
        return CircleArc(c, mu._after(c, k))
    return CircleArc(mu._before(c, k), c)


def _gap_mid(mu: InvariantMeasure, i: int) -> float:
    """Angle halfway between orbit points ``i - 1`` and ``i`` (indices mod n)."""
    n = mu.n_points
    lo, hi = mu.orbit[(i - 1) % n], mu.orbit[i % n]
    return wrap(lo + ccw(lo, hi) / 2.0)


def sigma_midpoint(mu: InvariantMeasure, arc: CircleArc) -> float:
    k = mu.count(arc)
    if k == 0:
        return arc.midpoint
    i0 = int(np.searchsorted(mu.orbit, arc.a, "right"))
    if k % 2:
        return float(mu.orbit[(i0 + k // 2) % mu.n_points])
    return _gap_mid(mu, i0 + k // 2)


def scale_arc(mu: InvariantMeasure, arc: CircleArc, kappa: float) -> CircleArc:
    """``kappa I``: same sigma-midpoint, ``kappa`` times the dynamical length."""
    k = mu.count(arc)
    target = kappa * TWO_PI * k / mu.n_points
    if target >= TWO_PI - mu.resolution:
        raise TargetTooLarge(f"scaled length {target} leaves no room on the circle")
    if target <= 0.0:
        raise ValueError("kappa * sigma(I) must be positive")
    k_new = max(1, int(round(target / mu.resolution)))
    i0 = int(np.searchsorted(mu.orbit, arc.a, "right"))
    # keep the centre of the index block [i0, i0 + k) fixed
    start = i0 + int(math.floor((k - k_new) / 2.0))
    return CircleArc(_gap_mid(mu, start), _gap_mid(mu, start + k_new))


# --------------------------------------------------------------------------
# returns


def first_return(g: CircleMap, arc: CircleArc, x: float, cap: int = DEFAULT_RETURN_CAP) -> int:
    """Minimal ``n >= 1`` with ``G^n(x)`` in the arc."""
    n, _ = _first_return(g.code, g.parameter, arc.a, arc.length, wrap(float(x)), int(cap))
    if n < 0:
        raise CapExceeded(f"no return to the arc within {cap} iterates")
    return int(n)


def first_returns(g: CircleMap, arc: CircleArc, xs, cap: int = DEFAULT_RETURN_CAP) -> np.ndarray:
    xs = wrap(np.ascontiguousarray(xs, dtype=float))
    out = _first_returns(g.code, g.parameter, arc.a, arc.length, np.atleast_1d(xs), int(cap))
    if np.any(out < 0):
        raise CapExceeded(f"no return to the arc within {cap} iterates")
    return out


@dataclass(frozen=True)
class ReturnStats:
    min_return: int
    max_return: int

    @property
    def ratio(self) -> float:
        return self.max_return / self.min_return


def return_stats(g: CircleMap, arc: CircleArc, samples: int = 1000, cap: int = DEFAULT_RETURN_CAP) -> ReturnStats:
    """Extremes of the first-return time over an even grid of the arc."""
    if samples < 100:
        raise ValueError("return_stats needs at least 100 sample points")
    n = first_returns(g, arc, arc.points(samples), cap)
    return ReturnStats(int(n.min()), int(n.max()))


@dataclass(frozen=True)
class ReturnTriple:
    n1: int
    n2: int
    points: tuple[float, float, float]
    smallest_gap_sigma: float
    arc_sigma: float

    @property
    def ratio(self) -> float:
        """sigma of the smallest gap between the three points over sigma(I)."""
        return self.smallest_gap_sigma / self.arc_sigma


def return_triple(
    g: CircleMap,
    arc: CircleArc,
    x: float,
    mu: InvariantMeasure | None = None,
    cap: int = DEFAULT_RETURN_CAP,
) -> ReturnTriple:
    """First and second returns of ``x`` to the arc and the smallest of
    the three arcs cut out by ``x``, ``G^{n1}(x)`` and ``G^{n2}(x)``.

    Without a measure the angular length is used (exact for rotations).
    """
    n1, y1 = _first_return(g.code, g.parameter, arc.a, arc.length, wrap(float(x)), int(cap))
    if n1 < 0:
        raise CapExceeded("no first return within cap")
    m, y2 = _first_return(g.code, g.parameter, arc.a, arc.length, y1, int(cap))
    if m < 0:
        raise CapExceeded("no second return within cap")
    pts = sorted([wrap(float(x)), float(y1), float(y2)])
    gaps = [(pts[1], pts[2]), (pts[0], pts[1]), (pts[2], pts[0])]
    if mu is None:
        smallest = min(ccw(a, b) for a, b in gaps)
        total = arc.length
    else:
        smallest = min(mu.sigma_between(a, b) for a, b in gaps)
        total = mu.sigma(arc)
    return ReturnTriple(int(n1), int(n1 + m), (pts[0], pts[1], pts[2]), smallest, total)


def sigma_profile(mu: InvariantMeasure, arcs: Iterable[CircleArc]) -> list[tuple[float, float, float, float]]:
    """Rows ``(a, b, |I|, sigma(I))``."""
    return [(I.a, I.b, I.length, mu.sigma(I)) for I in arcs]


def random_arcs(rng: np.random.Generator, count: int, min_len: float, max_len: float) -> list[CircleArc]:
    starts = rng.uniform(0.0, TWO_PI, count)
    lengths = rng.uniform(min_len, max_len, count)
    return [CircleArc(a, a + L) for a, L in zip(starts, lengths)]


def write_rows_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
