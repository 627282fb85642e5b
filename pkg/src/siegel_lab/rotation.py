"""Continued fractions and closest-return combinatorics of rotation numbers.

Conventions: ``alpha = [a_1, a_2, ...] = 1/(a_1 + 1/(a_2 + ...))`` with
``p_0/q_0 = 0/1`` and ``p_{-1}/q_{-1} = 1/0``, so that
``q_n = a_n q_{n-1} + q_{n-2}`` holds for every ``n >= 1``.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DepthTooLarge, IndexOutOfRange, RationalInput

INT64_MAX = 2**63 - 1
DEFAULT_DEPTH = 40
DEFAULT_BOUND = 50
#: cf_expand stops with RationalInput once the fractional remainder is this small.
REMAINDER_FLOOR = 1e-12


class BoundExceededWarning(UserWarning):
    pass


def cf_value(quotients: Sequence[int]) -> float:
    """Evaluate ``[a_1, ..., a_K]`` exactly and round once."""
    x = Fraction(0)
    for a in reversed(quotients):
        x = 1 / (a + x)
    return float(x)


def _denominators(quotients: Sequence[int]) -> list[int]:
    q = [1]
    q_prev = 0
    for a in quotients:
        q_prev, q_cur = q[-1], a * q[-1] + q_prev
        q.append(q_cur)
        if q_cur > INT64_MAX:
            raise DepthTooLarge(
                f"q_{len(q) - 1} = {q_cur} does not fit in a signed 64-bit integer"
            )
    return q


@dataclass(frozen=True)
class RotationNumber:
    """A bounded-type irrational in (0, 1) stored by its partial quotients.

    ``value`` is the double closest to the number the quotients describe (or
    the real the quotients were expanded from).
    """

    partial_quotients: tuple[int, ...]
    value: float
    bound: int = DEFAULT_BOUND

    def __post_init__(self) -> None:
        a = tuple(int(x) for x in self.partial_quotients)
        object.__setattr__(self, "partial_quotients", a)
        if not a:
            raise ValueError("at least one partial quotient is required")
        if any(x < 1 for x in a):
            raise ValueError("partial quotients must be positive integers")
        if not 0.0 < self.value < 1.0:
            raise ValueError("rotation number must lie in (0, 1)")
        q = _denominators(a)
        # |alpha - p_K/q_K| < 1/(q_K q_{K+1}) <= 1/q_K^2
        tol = 1.0 / float(q[-1]) ** 2 + 1e-15
        if abs(cf_value(a) - self.value) > tol:
            raise ValueError("value is inconsistent with the stored partial quotients")
        if max(a) > self.bound:
            warnings.warn(
                f"partial quotient {max(a)} exceeds the bounded-type bound {self.bound}",
                BoundExceededWarning,
                stacklevel=2,
            )

    @classmethod
    def from_quotients(cls, quotients: Iterable[int], bound: int = DEFAULT_BOUND) -> "RotationNumber":
        a = tuple(int(x) for x in quotients)
        return cls(a, cf_value(a), bound)

    @classmethod
    def golden(cls, depth: int = DEFAULT_DEPTH) -> "RotationNumber":
        return cls((1,) * depth, (math.sqrt(5.0) - 1.0) / 2.0)

    @classmethod
    def silver(cls, depth: int = DEFAULT_DEPTH) -> "RotationNumber":
        return cls((2,) * depth, math.sqrt(2.0) - 1.0)

    @property
    def depth(self) -> int:
        return len(self.partial_quotients)

    @property
    def max_quotient(self) -> int:
        return max(self.partial_quotients)

    def tails(self) -> list[float]:
        """Remainders ``x_i = [a_{i+1}, ..., a_K]`` for ``i = 0..K``; ``x_0 = alpha``."""
        a = self.partial_quotients
        out = [0.0] * (len(a) + 1)
        x = 0.0
        for i in range(len(a) - 1, -1, -1):
            x = 1.0 / (a[i] + x)
            out[i] = x
        # the double value is the better estimate of alpha itself
        out[0] = self.value
        return out


def cf_expand(x: float, depth: int = DEFAULT_DEPTH, bound: int = DEFAULT_BOUND) -> RotationNumber:
    """Expand ``x`` in (0, 1) into ``depth`` partial quotients.

    Raises RationalInput when a remainder vanishes (below 1e-12) before the
    requested depth is reached.
    """
    if not 0.0 < x < 1.0:
        raise ValueError("x must lie strictly between 0 and 1")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    quotients: list[int] = []
    r = float(x)
    q_prev, q_cur = 0, 1
    for n in range(1, depth + 1):
        inv = 1.0 / r
        a = int(math.floor(inv))
        r = inv - a
        if a < 1:
            # 1/r rounded to exactly 1.0 from below
            a, r = 1, 0.0
        q_prev, q_cur = q_cur, a * q_cur + q_prev
        if q_cur > INT64_MAX:
            raise DepthTooLarge(f"q_{n} overflows 64 bits")
        quotients.append(a)
        if r < REMAINDER_FLOOR:
            raise RationalInput(f"{x!r} terminates after {n} partial quotients")
    return RotationNumber(tuple(quotients), float(x), bound)


@dataclass(frozen=True)
class ConvergentTable:
    """Rows ``(n, a_n, p_n, q_n)`` for ``n = 0..N`` (``a_0 = 0``)."""

    rows: tuple[tuple[int, int, int, int], ...]

    @property
    def q(self) -> list[int]:
        return [r[3] for r in self.rows]

    @property
    def p(self) -> list[int]:
        return [r[2] for r in self.rows]

    def check(self) -> None:
        """Assert the recursion invariants (exact integer arithmetic)."""
        q, p = self.q, self.p
        assert q[0] == 1 and p[0] == 0
        for n in range(2, len(q)):
            a = self.rows[n][1]
            assert q[n] == a * q[n - 1] + q[n - 2]
            assert p[n] == a * p[n - 1] + p[n - 2]
            assert q[n] > q[n - 1]
        for pn, qn in zip(p, q):
            assert math.gcd(pn, qn) == 1

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "a_n", "p_n", "q_n"])
            w.writerows(self.rows)


def convergents(alpha: RotationNumber, n: int | None = None) -> ConvergentTable:
    a = alpha.partial_quotients
    if n is None:
        n = len(a)
    if not 0 <= n <= len(a):
        raise IndexOutOfRange(f"n={n} outside stored truncation 0..{len(a)}")
    rows = [(0, 0, 0, 1)]
    p_prev, p_cur = 1, 0
    q_prev, q_cur = 0, 1
    for k in range(1, n + 1):
        ak = a[k - 1]
        p_prev, p_cur = p_cur, ak * p_cur + p_prev
        q_prev, q_cur = q_cur, ak * q_cur + q_prev
        if q_cur > INT64_MAX:
            raise DepthTooLarge(f"q_{k} overflows 64 bits")
        rows.append((k, ak, p_cur, q_cur))
    return ConvergentTable(tuple(rows))


def closest_return_gap(alpha: RotationNumber, k: int) -> float:
    """``|q_k alpha - p_k|``, the circular distance of ``q_k alpha`` to the integers.

    Evaluated as the product of the continued-fraction remainders
    ``x_0 x_1 ... x_k`` which avoids the cancellation in ``q_k alpha - p_k``.
    The last stored remainder ``1/a_K`` ignores everything past the
    truncation, so ``k`` stops one short of the stored depth.
    """
    if not 0 <= k < alpha.depth - 1:
        raise IndexOutOfRange(f"k={k} outside 0..{alpha.depth - 2}")
    x = alpha.tails()
    gap = 1.0
    for i in range(k + 1):
        gap *= x[i]
    return gap


def circle_distance_to_integers(y: float) -> float:
    return abs(y - round(y))
