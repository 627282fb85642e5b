"""Empirical contraction of the exterior metric proxy under inverse branches of the Blaschke model.

In the logarithmic coordinate ``zeta = log z / (2 pi i)`` (measured in turns)
the unit circle is the real axis and the exterior ``|z| > 1`` is the lower
half plane.  Near the critical point ``zeta = 0`` the map looks like
``zeta -> t + k zeta^3`` with ``k > 0``, so a sector at the critical value
pulls back to three sectors of a third of the angle.

The probed regions are the two sectors below a ray through the critical
value meeting the circle at angle ``beta``: directions ``psi`` in
``(-pi, -beta)`` (ray leaving to the right) and ``(-pi + beta, 0)`` (ray
leaving to the left).  In each, the preimage is the branch whose direction
from the critical point is ``psi / 3`` and ``(psi - 2 pi) / 3`` respectively,
the branch adjacent to the circle on the far side of the ray.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..circle_dynamics import CircleMap
from ..errors import OutsideRegime
from ..hypgeo import exterior_metric_density
from .rational import RationalMap

DEFAULT_RADIUS = 0.01  # turns


def _as_rational(model) -> tuple[RationalMap, float]:
    if isinstance(model, CircleMap):
        if model.kind != "blaschke":
            raise ValueError("the probe needs the Blaschke model")
        return RationalMap.blaschke(model.parameter), model.parameter
    if isinstance(model, (int, float)):
        return RationalMap.blaschke(float(model)), float(model)
    raise TypeError("model must be a Blaschke CircleMap or its parameter t")


def log_coordinate(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return (np.angle(z) - 1j * np.log(np.abs(z))) / (2.0 * math.pi)


def metric_ratio(f: RationalMap, w) -> np.ndarray:
    """``rho(w) / (rho(f(w)) |f'(w)|)`` for the exterior density ``rho``; at most 1 on the exterior part of the preimage of the exterior."""
    w = np.asarray(w, dtype=complex)
    z = f(w)
    return exterior_metric_density(w) / (exterior_metric_density(z) * np.abs(f.derivative(w)))


@dataclass
class ProbeReport:
    beta: float
    samples: int
    radius: float
    max_ratio: float = math.nan
    mean_ratio: float = math.nan
    fraction_below_one: float = math.nan
    by_sector: dict = field(default_factory=dict)
    worst_point: complex | None = None

    @property
    def empty(self) -> bool:
        return self.samples == 0

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "samples": self.samples,
            "radius_turns": self.radius,
            "max_ratio": self.max_ratio,
            "mean_ratio": self.mean_ratio,
            "fraction_below_one": self.fraction_below_one,
            "by_sector": self.by_sector,
            "worst_point": None if self.worst_point is None else [self.worst_point.real, self.worst_point.imag],
        }


def _branch(f: RationalMap, z: complex, target_dir: float) -> complex:
    roots = f.preimages(z)
    roots = roots[np.isfinite(roots)]
    zeta = log_coordinate(roots)
    # distance of direction from the critical point, taken on the circle
    d = np.abs(np.angle(np.exp(1j * (np.angle(zeta) - target_dir))))
    return complex(roots[int(np.argmin(d))])


def contraction_probe(model, beta: float = math.pi / 8, samples: int = 1000, radius: float = DEFAULT_RADIUS, seed: int = 0) -> ProbeReport:
    """Sample both sectors below the rays at the critical value and pull each point back.

    Half of the samples go to each sector; radii are spread uniformly in
    area out to ``radius`` turns.  Raises OutsideRegime if a chosen preimage
    falls off the exterior.
    """
    if not (0.0 < beta < math.pi) or samples <= 0:
        return ProbeReport(beta, 0, radius)
    f, t = _as_rational(model)
    rng = np.random.default_rng(seed)
    ratios = []
    sector_ratios: dict[str, list[float]] = {"right": [], "left": []}
    worst = (-math.inf, None)
    for i in range(samples):
        side = "right" if i % 2 == 0 else "left"
        r = radius * math.sqrt(rng.uniform(1e-6, 1.0))
        if side == "right":
            psi = rng.uniform(-math.pi, -beta)
            target = psi / 3.0
        else:
            psi = rng.uniform(-math.pi + beta, 0.0)
            target = (psi - 2.0 * math.pi) / 3.0
        zeta = t + r * complex(math.cos(psi), math.sin(psi))
        z = complex(np.exp(2j * math.pi * zeta))
        if abs(z) <= 1.0:
            raise OutsideRegime("sample left the exterior of the circle")
        w = _branch(f, z, target)
        if abs(w) <= 1.0:
            raise OutsideRegime("tracked preimage left the exterior of the circle")
        q = float(metric_ratio(f, w))
        ratios.append(q)
        sector_ratios[side].append(q)
        if q > worst[0]:
            worst = (q, w)
    arr = np.array(ratios)
    rep = ProbeReport(beta, samples, radius, float(arr.max()), float(arr.mean()), float(np.mean(arr < 1.0)), worst_point=worst[1])
    rep.by_sector = {k: {"n": len(v), "max_ratio": float(max(v))} for k, v in sector_ratios.items() if v}
    return rep


def schwarz_pick_probe(model, samples: int = 1000, seed: int = 0, r_range: tuple[float, float] = (1.02, 4.0), keep_away: float = 0.1) -> ProbeReport:
    """Ratio at random exterior points whose image is also exterior, away from the critical point."""
    f, _ = _as_rational(model)
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < samples:
        w = rng.uniform(*r_range) * np.exp(2j * math.pi * rng.uniform())
        if abs(w - 1.0) < keep_away:
            continue
        if abs(f(w)) <= 1.0 + 1e-9:
            continue
        out.append(float(metric_ratio(f, w)))
    arr = np.array(out)
    return ProbeReport(math.nan, samples, math.nan, float(arr.max()), float(arr.mean()), float(np.mean(arr < 1.0)))
