"""Rational maps on the Riemann sphere and their point preimages."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..errors import SolverFailure
from ..hypgeo import chordal_dist

RESIDUAL_TOL = 1e-9


def _trim(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=complex)
    nz = np.flatnonzero(np.abs(c) > 0)
    return c[nz[0] :] if nz.size else np.zeros(1, dtype=complex)


@dataclass(frozen=True, eq=False)
class RationalMap:
    """``P/Q`` with coefficient arrays in decreasing degree (numpy.polyval order)."""

    num: np.ndarray
    den: np.ndarray = field(default_factory=lambda: np.ones(1, dtype=complex))

    def __post_init__(self) -> None:
        object.__setattr__(self, "num", _trim(self.num))
        object.__setattr__(self, "den", _trim(self.den))
        if not np.any(self.den):
            raise ValueError("denominator is identically zero")
        if self.degree < 1:
            raise ValueError("constant map")
        # P and Q must not share a root
        if self.den.size > 1 and self.num.size > 1:
            rq = np.roots(self.den)
            scale = np.sum(np.abs(self.num)) * (1.0 + np.abs(rq)) ** (self.num.size - 1)
            if np.any(np.abs(np.polyval(self.num, rq)) < 1e-10 * scale):
                raise ValueError("numerator and denominator share a root")

    @classmethod
    def polynomial(cls, coeffs) -> "RationalMap":
        return cls(np.asarray(coeffs, dtype=complex))

    @classmethod
    def blaschke(cls, t: float) -> "RationalMap":
        """``e^{2 pi i t} z^2 (z - 3) / (1 - 3 z)``."""
        lam = np.exp(2j * math.pi * t)
        return cls(lam * np.array([1.0, -3.0, 0.0, 0.0]), np.array([-3.0, 1.0]))

    @property
    def degree(self) -> int:
        return max(self.num.size, self.den.size) - 1

    @property
    def is_polynomial(self) -> bool:
        return self.den.size == 1

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        inf = np.isinf(z)
        zf = np.where(inf, 0.0, z)
        p = np.polyval(self.num, zf)
        q = np.polyval(self.den, zf)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(q == 0, complex(np.inf), p / q)
        if np.any(inf):
            out = np.where(inf, self._at_infinity(), out)
        return complex(out) if out.ndim == 0 else out

    def _at_infinity(self) -> complex:
        dn, dd = self.num.size - 1, self.den.size - 1
        if dn > dd:
            return complex(np.inf)
        if dn < dd:
            return 0j
        return complex(self.num[0] / self.den[0])

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        p, q = np.polyval(self.num, z), np.polyval(self.den, z)
        dp, dq = np.polyval(np.polyder(self.num), z), np.polyval(np.polyder(self.den), z)
        out = (dp * q - p * dq) / (q * q)
        return complex(out) if out.ndim == 0 else out

    @cached_property
    def wronskian(self) -> np.ndarray:
        return np.polysub(np.polymul(np.polyder(self.num), self.den), np.polymul(self.num, np.polyder(self.den)))

    @cached_property
    def critical_points(self) -> list[tuple[complex, int]]:
        """Finite critical points with multiplicity, plus ``inf`` when critical."""
        w = _trim(self.wronskian)
        roots = np.roots(w) if w.size > 1 else np.array([], dtype=complex)
        out: list[tuple[complex, int]] = []
        for r in roots:
            for i, (c, m) in enumerate(out):
                if abs(c - r) < 1e-6 * (1.0 + abs(c)):
                    out[i] = (c, m + 1)
                    break
            else:
                out.append((complex(r), 1))
        at_inf = 2 * self.degree - 2 - (w.size - 1)
        if at_inf > 0:
            out.append((complex(np.inf), at_inf))
        return out

    @cached_property
    def critical_values(self) -> list[complex]:
        return [complex(self(c)) for c, _ in self.critical_points]

    def preimages(self, z: complex) -> np.ndarray:
        """All ``degree`` preimages of ``z`` with multiplicity (``inf`` included)."""
        z = complex(z)
        d = self.degree
        pad_n = np.concatenate([np.zeros(d + 1 - self.num.size), self.num])
        pad_d = np.concatenate([np.zeros(d + 1 - self.den.size), self.den])
        if math.isinf(z.real) or math.isinf(z.imag):
            poly = pad_d
        else:
            poly = pad_n - z * pad_d
        lead = np.flatnonzero(np.abs(poly) > 1e-14 * np.max(np.abs(poly)))
        if lead.size == 0:
            raise SolverFailure("degenerate preimage equation")
        poly_t = poly[lead[0] :]
        roots = np.roots(poly_t) if poly_t.size > 1 else np.array([], dtype=complex)
        roots = _polish(poly_t, roots)
        n_inf = d - roots.size
        out = np.concatenate([roots, np.full(n_inf, complex(np.inf))])
        res = chordal_dist(self(out), np.full(out.shape, z))
        if np.any(res > RESIDUAL_TOL):
            raise SolverFailure(f"preimage residual {np.max(res):.3g} exceeds {RESIDUAL_TOL}")
        return out


def _polish(poly: np.ndarray, roots: np.ndarray, steps: int = 3) -> np.ndarray:
    dpoly = np.polyder(poly)
    r = roots.copy()
    for _ in range(steps):
        f = np.polyval(poly, r)
        df = np.polyval(dpoly, r)
        ok = np.abs(df) > 1e-12 * (1.0 + np.abs(f))
        step = np.where(ok, f / np.where(ok, df, 1.0), 0.0)
        # only accept steps that reduce the residual
        trial = r - step
        better = np.abs(np.polyval(poly, trial)) <= np.abs(f)
        r = np.where(better, trial, r)
    return r


def preimages_point(f, z: complex) -> np.ndarray:
    return f.preimages(z)
