"""Chordal and hyperbolic geometry around an arc of the unit circle.

For an arc ``I`` the slit sphere ``C^ minus (T minus I)`` is uniformized onto
the right half-plane by three explicit maps (after rotating ``I`` so that its
midpoint is ``1``)::

    zeta = (i / tan(|I|/4)) (1 - z)/(1 + z)
    xi   = (1 + zeta)/(1 - zeta)
    w    = sqrt(xi)                    (principal branch)

``I`` goes to the positive real axis, the disk to the upper quarter-plane and
the outside of the disk to the lower one.  Hyperbolic distances are then read
off from the half-plane metric ``|dw| / Re w``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .circle_dynamics import CircleArc, ccw
from .errors import OutOfRange, OutsideDomain, OutsideRegime

SLIT_TOL = 1e-12


def chordal_dist(z, w):
    """Chordal distance on the Riemann sphere; ``inf`` stands for the point at infinity."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    zi, wi = np.isinf(z), np.isinf(w)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        finite = 2.0 * np.abs(z - w) / np.sqrt((1.0 + np.abs(z) ** 2) * (1.0 + np.abs(w) ** 2))
        to_inf_z = 2.0 / np.sqrt(1.0 + np.abs(w) ** 2)
        to_inf_w = 2.0 / np.sqrt(1.0 + np.abs(z) ** 2)
    out = np.where(zi & wi, 0.0, np.where(zi, to_inf_z, np.where(wi, to_inf_w, finite)))
    return float(out) if out.ndim == 0 else out


def chordal_diameter(points) -> float:
    """Largest pairwise chordal distance of a finite point set."""
    p = np.asarray(points, dtype=complex).ravel()
    s = 1.0 / np.sqrt(1.0 + np.abs(p) ** 2)
    best = 0.0
    for i in range(0, p.size, 2048):
        blk = p[i : i + 2048]
        d = 2.0 * np.abs(blk[:, None] - p[None, :]) * s[i : i + 2048, None] * s[None, :]
        best = max(best, float(d.max()))
    return best


# --------------------------------------------------------------------------
# beta <-> d


def d_from_beta(beta: float) -> float:
    """Hyperbolic depth of the sector ``|arg w| < pi/2 - beta/2`` around the positive axis."""
    if not 0.0 < beta <= math.pi:
        raise OutOfRange(f"beta = {beta} outside (0, pi]")
    return math.log(1.0 / math.tan(beta / 4.0))


def beta_from_d(d: float) -> float:
    if not d >= 0.0:
        raise OutOfRange(f"d = {d} must be non-negative")
    return 4.0 * math.atan(math.exp(-d))


# --------------------------------------------------------------------------
# slit map


@dataclass(frozen=True)
class SlitDomain:
    """The sphere slit along ``T minus I``."""

    arc: CircleArc

    @property
    def rotation(self) -> float:
        """Angle of the midpoint of I; the maps work in coordinates where it is 0."""
        return self.arc.midpoint

    @property
    def tau(self) -> float:
        return math.tan(self.arc.length / 4.0)

    def normalize(self, z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(invalid="ignore"):
            out = z * np.exp(-1j * self.rotation)
        return np.where(np.isinf(z), complex(np.inf), out)

    def denormalize(self, z):
        return np.asarray(z, dtype=complex) * np.exp(1j * self.rotation)

    def on_slit(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        with np.errstate(invalid="ignore"):
            near_circle = np.abs(np.abs(z) - 1.0) <= SLIT_TOL
            ang = np.angle(self.normalize(z))
        return near_circle & (np.abs(ang) >= self.arc.length / 2.0 - SLIT_TOL)

    def forward(self, z):
        z = np.asarray(z, dtype=complex)
        if np.any(self.on_slit(z)):
            raise OutsideDomain("point lies on the slit T minus I")
        u = self.normalize(z)
        inf = np.isinf(u)
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(inf, -1.0 + 0j, (1.0 - u) / (1.0 + u))
        zeta = 1j / self.tau * ratio
        with np.errstate(divide="ignore", invalid="ignore"):
            xi = (1.0 + zeta) / (1.0 - zeta)
        w = np.sqrt(xi)
        return complex(w) if w.ndim == 0 else w

    def inverse(self, w):
        w = np.asarray(w, dtype=complex)
        if np.any(w.real <= 0.0):
            raise OutsideDomain("inverse slit map needs Re w > 0")
        xi = w * w
        zeta = (xi - 1.0) / (xi + 1.0)
        s = -1j * self.tau * zeta
        with np.errstate(divide="ignore", invalid="ignore"):
            u = (1.0 - s) / (1.0 + s)
        u = np.where(np.abs(1.0 + s) == 0.0, complex(np.inf), u)
        z = self.denormalize(u)
        return complex(z) if z.ndim == 0 else z


def slit_map(arc: CircleArc, z):
    return SlitDomain(arc).forward(z)


def slit_map_inverse(arc: CircleArc, w):
    return SlitDomain(arc).inverse(w)


def halfplane_dist(w1, w2):
    """Distance for the metric ``|dw| / Re w``."""
    w1 = np.asarray(w1, dtype=complex)
    w2 = np.asarray(w2, dtype=complex)
    if np.any(w1.real <= 0.0) or np.any(w2.real <= 0.0):
        raise OutsideDomain("points must lie in the right half-plane")
    arg = 1.0 + np.abs(w1 - w2) ** 2 / (2.0 * w1.real * w2.real)
    out = np.arccosh(arg)
    return float(out) if out.ndim == 0 else out


def halfplane_dist_to_axis(w):
    """Distance from ``w`` to the positive real axis: ``log(sec t + tan|t|)`` with ``t = arg w``."""
    w = np.asarray(w, dtype=complex)
    if np.any(w.real <= 0.0):
        raise OutsideDomain("points must lie in the right half-plane")
    out = np.arcsinh(np.abs(w.imag) / w.real)
    return float(out) if out.ndim == 0 else out


def slit_dist(arc: CircleArc, z1, z2):
    dom = SlitDomain(arc)
    return halfplane_dist(dom.forward(z1), dom.forward(z2))


def dist_to_arc(arc: CircleArc, z):
    """Hyperbolic distance in the slit domain from ``z`` to ``I``."""
    return halfplane_dist_to_axis(SlitDomain(arc).forward(z))


# --------------------------------------------------------------------------
# half neighbourhoods


@dataclass(frozen=True)
class HalfNbhd:
    arc: CircleArc
    d: float

    def __post_init__(self) -> None:
        if self.d <= 0.0:
            raise OutOfRange("d must be positive")

    @property
    def beta(self) -> float:
        return beta_from_d(self.d)

    def contains(self, z) -> np.ndarray:
        """Membership of the outer half ``{dist(z, I) < d, |z| > 1}``."""
        z = np.asarray(z, dtype=complex)
        ok = np.abs(z) > 1.0
        dom = SlitDomain(self.arc)
        out = np.zeros(z.shape, dtype=bool)
        if np.any(ok):
            out[ok] = halfplane_dist_to_axis(dom.forward(z[ok])) < self.d
        return out


@dataclass(frozen=True)
class HalfNbhdBoundary:
    outer: np.ndarray  # curve from a to b outside the disk, endpoints included
    polyline: np.ndarray  # closed: outer curve followed by I traversed back

    def to_csv(self, path) -> None:
        np.savetxt(path, np.column_stack([self.polyline.real, self.polyline.imag]), delimiter=",", header="x,y", comments="")


def half_nbhd_boundary(arc: CircleArc, d: float, samples: int = 256, span: float = 6.0) -> HalfNbhdBoundary:
    """Boundary of the neighbourhood ``{dist(z, I) < d}`` outside the closed disk.

    The outer curve is the preimage of the ray ``arg w = -(pi/2 - beta/2)``;
    ``w = r e^{i arg}`` is sampled log-uniformly for ``log r`` in ``[-span, span]``
    and the exact endpoints of ``I`` are appended.
    """
    if samples < 64:
        raise ValueError("need at least 64 boundary samples")
    beta = beta_from_d(d)
    if arc.length >= 2.0 * beta:
        raise OutsideRegime("the neighbourhood reaches infinity; the arc is too long for this depth")
    dom = SlitDomain(arc)
    theta = -(math.pi / 2.0 - beta / 2.0)
    r = np.exp(np.linspace(-span, span, samples))
    curve = dom.inverse(r * np.exp(1j * theta))
    a = np.exp(1j * arc.a)
    b = np.exp(1j * arc.b)
    outer = np.concatenate([[a], curve, [b]])
    back = np.exp(1j * (arc.a + arc.length * np.linspace(1.0, 0.0, samples))[1:-1])
    return HalfNbhdBoundary(outer, np.concatenate([outer, back]))


def polyline_self_intersects(poly: np.ndarray, closed: bool = True) -> bool:
    """Brute-force segment intersection test (adjacent segments excluded).

    Proper crossings are detected by orientation signs; a vertex visited
    twice also counts, since a curve pinched at a vertex is not simple.
    """
    p = np.asarray(poly, dtype=complex)
    if np.unique(p).size < p.size:
        return True
    if closed:
        p = np.append(p, p[0])
    a, b = p[:-1], p[1:]
    m = a.size

    def cross(u, v):
        return u.real * v.imag - u.imag * v.real

    for i in range(m):
        j = np.arange(i + 2, m)
        if closed and i == 0:
            j = j[j != m - 1]
        if j.size == 0:
            continue
        d1 = cross(b[i] - a[i], a[j] - a[i])
        d2 = cross(b[i] - a[i], b[j] - a[i])
        d3 = cross(b[j] - a[j], a[i] - a[j])
        d4 = cross(b[j] - a[j], b[i] - a[j])
        if np.any((d1 * d2 < 0) & (d3 * d4 < 0)):
            return True
    return False


# --------------------------------------------------------------------------
# sandwich


@dataclass(frozen=True)
class SandwichReport:
    arc_length: float
    d: float
    d_prime: float
    beta: float
    beta_hat: float
    sector_gap: float  # epsilon: the obstacles stay outside |arg w| < pi/2 - epsilon
    constant: float  # (d' - d) / |I|
    boundary_max_dist: float  # largest sector distance of sampled boundary points
    strict_outside_d: bool  # every boundary point sits beyond d in the sector metric

    @property
    def passed(self) -> bool:
        return self.d_prime < 2.0 * self.d and self.boundary_max_dist <= self.d_prime + 1e-6


def _obstacle_min_angle(dom: SlitDomain, r_prime: float, n: int = 4096) -> float:
    """Smallest ``|arg w|`` over the images of the circles ``|z| = r', 1/r'``
    and the segment ``(-r', -1/r')`` (normalized coordinates)."""

    def ang_circle(t, rad):
        return abs(np.angle(dom.forward(dom.denormalize(rad * np.exp(1j * t)))))

    def ang_segment(s):
        # s in (0, 1) parametrizes -r' .. -1/r' logarithmically, avoiding z = -1 on the slit
        x = -np.exp(math.log(r_prime) * (1.0 - 2.0 * s))
        return abs(np.angle(dom.forward(dom.denormalize(x + 0j))))

    candidates = []
    ts = np.linspace(-math.pi, math.pi, n, endpoint=False)
    for rad in (r_prime, 1.0 / r_prime):
        vals = ang_circle(ts, rad)
        k = int(np.argmin(vals))
        h = ts[1] - ts[0]
        res = minimize_scalar(lambda t: ang_circle(t, rad), bounds=(ts[k] - h, ts[k] + h), method="bounded",
                              options={"xatol": 1e-12})
        candidates.append(min(float(vals[k]), float(res.fun)))
    ss = np.linspace(0.0, 1.0, n)[1:-1]
    ss = ss[np.abs(np.exp(math.log(r_prime) * (1.0 - 2.0 * ss)) - 1.0) > 1e-9]
    vals = ang_segment(ss)
    candidates.append(float(vals.min()))
    return min(candidates)


def sandwich_check(arc: CircleArc, d: float, r_prime: float = 2.0, samples: int = 256) -> SandwichReport:
    """Compare the slit-domain neighbourhood with its counterpart in the
    annular domain ``A(r') minus ((T minus I) and (-r', -1/r'))``.

    The annular domain's uniformized image contains the sector
    ``|arg w| < pi/2 - eps`` where ``eps`` comes from the images of the
    removed circles and segment.  Measured in that sector the boundary of the
    depth-``d`` neighbourhood sits at depth ``d' = log cot(beta_hat / 4)``.
    """
    if r_prime <= 1.0:
        raise ValueError("r' must exceed 1")
    dom = SlitDomain(arc)
    beta = beta_from_d(d)
    theta_min = _obstacle_min_angle(dom, r_prime)
    eps = math.pi / 2.0 - theta_min
    half_angle = math.pi / 2.0 - eps
    if half_angle <= math.pi / 2.0 - beta / 2.0:
        raise OutsideRegime("the removed pieces reach the depth-d neighbourhood")
    beta_hat = 2.0 * (math.pi / 2.0 - (math.pi / 2.0) / half_angle * (math.pi / 2.0 - beta / 2.0))
    if beta_hat <= 0.0:
        raise OutsideRegime("sector too thin")
    d_prime = d_from_beta(beta_hat)
    # independent check on sampled boundary points: straighten the sector and measure
    bd = half_nbhd_boundary(arc, d, samples)
    w = dom.forward(bd.outer[1:-1])
    straight = np.abs(w) ** (math.pi / 2.0 / half_angle) * np.exp(1j * np.angle(w) * (math.pi / 2.0 / half_angle))
    sector_d = halfplane_dist_to_axis(straight)
    return SandwichReport(
        arc_length=arc.length,
        d=d,
        d_prime=d_prime,
        beta=beta,
        beta_hat=beta_hat,
        sector_gap=eps,
        constant=(d_prime - d) / arc.length,
        boundary_max_dist=float(np.max(sector_d)),
        strict_outside_d=bool(np.all(sector_d > d)),
    )


# --------------------------------------------------------------------------
# metric densities


def exterior_metric_density(z):
    """Density ``1/(|z| log|z|)`` of the hyperbolic metric of ``{|z| > 1}``."""
    r = np.abs(np.asarray(z, dtype=complex))
    if np.any(r <= 1.0):
        raise OutsideDomain("density is defined only for |z| > 1")
    out = 1.0 / (r * np.log(r))
    return float(out) if out.ndim == 0 else out


def _quarter_disk_map(w):
    u = (2.0 * w - 1j) / (2.0 * w + 1j)
    return -1j * u * u, 8.0 * u / (2.0 * w + 1j) ** 2


def half_disk_density_ratio(w):
    """``rho_U(w) / rho_H(w)`` for the half-disk ``U = {|w| < 1/2, Re w > 0}``,
    evaluated through its uniformization onto the half-plane."""
    w = np.asarray(w, dtype=complex)
    psi, dpsi = _quarter_disk_map(w)
    out = w.real * np.abs(dpsi) / psi.real
    return float(out) if out.ndim == 0 else out


def half_disk_density_ratio_closed(w):
    """The same ratio from its factorized closed form."""
    w = np.asarray(w, dtype=complex)
    x, y = w.real, w.imag
    out = (
        (1.0 + x**2 / (0.25 - y**2 - x**2))
        * np.sqrt(1.0 + x**2 / (0.5 + y) ** 2)
        * np.sqrt(1.0 + x**2 / (0.5 - y) ** 2)
    )
    return float(out) if out.ndim == 0 else out


def endpoint_density_bound(arc: CircleArc, z):
    """Upper bound for the ratio of the annular-domain density to the slit
    density at ``z`` near an endpoint of ``I``.

    ``z`` must land in ``|w| < 1/4`` or ``|w| > 4`` of the uniformizing plane.
    """
    w = np.atleast_1d(SlitDomain(arc).forward(z))
    out = np.full(w.shape, np.nan)
    small = np.abs(w) < 0.25
    large = np.abs(w) > 4.0
    out[small] = half_disk_density_ratio(w[small])
    out[large] = half_disk_density_ratio(1.0 / w[large])
    if np.any(~(small | large)):
        raise OutOfRange("point is not close enough to an endpoint of the arc")
    return float(out[0]) if np.ndim(z) == 0 else out


def point_near_endpoint(arc: CircleArc, kappa: float, angle: float, which: str = "a") -> complex:
    """Point at Euclidean distance ``kappa |I|`` from an endpoint, in direction ``angle``."""
    e = np.exp(1j * (arc.a if which == "a" else arc.b))
    return complex(e + kappa * arc.length * np.exp(1j * angle))


def angular_offset(arc: CircleArc, theta: float) -> float:
    return ccw(arc.a, theta)
