import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from siegel_lab.errors import DepthTooLarge, IndexOutOfRange, RationalInput
from siegel_lab.rotation import (
    BoundExceededWarning,
    RotationNumber,
    cf_expand,
    cf_value,
    closest_return_gap,
    convergents,
)

SQRT2_M1 = math.sqrt(2.0) - 1.0
PHI_INV = (math.sqrt(5.0) - 1.0) / 2.0


def test_golden_expands_to_ones():
    assert cf_expand(PHI_INV, 8).partial_quotients == (1,) * 8


def test_silver_expands_to_twos():
    assert cf_expand(SQRT2_M1, 5).partial_quotients == (2,) * 5


def test_exact_rational_rejected():
    with pytest.raises(RationalInput):
        cf_expand(0.5)
    with pytest.raises(RationalInput):
        cf_expand(3 / 8)


def test_expansion_reproduces_value():
    for x in (PHI_INV, SQRT2_M1, math.pi - 3, math.e - 2):
        r = cf_expand(x, 12)
        q = convergents(r).q[-1]
        assert abs(cf_value(r.partial_quotients) - x) <= 1.0 / q**2


def test_out_of_interval():
    with pytest.raises(ValueError):
        cf_expand(1.2)


def test_golden_denominators_fibonacci():
    assert convergents(RotationNumber.golden(), 10).q == [1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89]
    assert convergents(RotationNumber.golden(), 6).q == [1, 1, 2, 3, 5, 8, 13]


def test_silver_denominators():
    assert convergents(RotationNumber.silver(), 3).q == [1, 2, 5, 12]


def test_q0_is_one():
    for a in (RotationNumber.golden(), RotationNumber.silver(), cf_expand(math.pi - 3, 10)):
        assert convergents(a, 0).q == [1]


def test_convergents_out_of_range():
    with pytest.raises(IndexOutOfRange):
        convergents(RotationNumber.golden(5), 6)


def test_bound_warning():
    with pytest.warns(BoundExceededWarning):
        RotationNumber.from_quotients([1, 60, 1], bound=50)


def test_inconsistent_value_rejected():
    with pytest.raises(ValueError):
        RotationNumber((1,) * 40, 0.6)


def test_csv_export(tmp_path):
    p = tmp_path / "conv.csv"
    convergents(RotationNumber.golden(), 5).to_csv(p)
    lines = p.read_text().splitlines()
    assert lines[0] == "n,a_n,p_n,q_n"
    assert lines[-1] == "5,1,5,8"


def test_gap_golden_k2():
    # oracle: exact |q a - p| with a from the rounded real, no remainder products
    assert closest_return_gap(RotationNumber.golden(), 2) == pytest.approx(abs(2 * PHI_INV - 1), abs=1e-15)
    assert closest_return_gap(RotationNumber.golden(), 2) == pytest.approx(math.sqrt(5) - 2, abs=1e-15)


def test_gap_k0_is_alpha():
    for a in (RotationNumber.golden(), RotationNumber.silver()):
        assert closest_return_gap(a, 0) == a.value


def test_gap_ratio_tends_to_alpha():
    a = RotationNumber.golden()
    t = convergents(a)
    gaps = [abs(q * a.value - p) for p, q in zip(t.p, t.q)][:20]
    assert gaps[15] / gaps[14] == pytest.approx(PHI_INV, abs=1e-6)
    assert closest_return_gap(a, 15) / closest_return_gap(a, 14) == pytest.approx(PHI_INV, abs=1e-9)


def test_gap_strictly_decreasing():
    for a in (RotationNumber.golden(), RotationNumber.silver(), cf_expand(math.pi - 3, 12)):
        g = [closest_return_gap(a, k) for k in range(a.depth - 1)]
        assert all(x > y for x, y in zip(g, g[1:]))


def test_gap_out_of_range():
    with pytest.raises(IndexOutOfRange):
        closest_return_gap(RotationNumber.golden(5), 4)


def test_gap_matches_exact_fraction():
    a = RotationNumber.from_quotients([1, 2, 1, 3, 1, 2, 4, 1, 1, 2] * 4)
    t = convergents(a)
    exact = Fraction(a.value)
    for k in range(8):
        assert closest_return_gap(a, k) == pytest.approx(float(abs(t.q[k] * exact - t.p[k])), rel=1e-9)


quotient_lists = st.lists(st.integers(1, 50), min_size=3, max_size=40)


def _fits(a) -> bool:
    q0, q1 = 0, 1
    for x in a:
        q0, q1 = q1, x * q1 + q0
        if q1 > 2**63 - 1:
            return False
    return True


@given(quotient_lists)
def test_recursion_holds_exactly(a):
    if not _fits(a):
        with pytest.raises(DepthTooLarge):
            RotationNumber.from_quotients(a)
        return
    t = convergents(RotationNumber.from_quotients(a))
    t.check()
    for n in range(2, len(t.q)):
        assert t.q[n] == a[n - 1] * t.q[n - 1] + t.q[n - 2]


@given(st.lists(st.integers(1, 6), min_size=30, max_size=30))
def test_expand_value_roundtrip(a):
    r = RotationNumber.from_quotients(a)
    back = cf_expand(r.value, 12)
    assert back.partial_quotients == tuple(a[:12])


def _dist(x):
    return abs(x - round(x))


def best_approximation_holds(alpha: RotationNumber, q_max: int) -> bool:
    t = convergents(alpha)
    x = alpha.value
    for n in range(1, len(t.q)):
        if t.q[n] > q_max:
            break
        floor = _dist(t.q[n - 1] * x)
        if any(_dist(q * x) <= floor for q in range(1, t.q[n]) if q != t.q[n - 1]):
            return False
    return True


def test_best_approximation_golden():
    assert best_approximation_holds(RotationNumber.golden(), 10**4)


def test_best_approximation_silver():
    assert best_approximation_holds(RotationNumber.silver(), 10**4)
