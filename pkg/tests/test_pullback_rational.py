import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from siegel_lab.errors import SolverFailure
from siegel_lab.hypgeo import chordal_dist
from siegel_lab.pullback.rational import RESIDUAL_TOL, RationalMap, preimages_point
from siegel_lab.pullback.siegel import Quadratic, QuadSiegel


def sorted_c(z):
    z = np.asarray(z)
    return z[np.lexsort((np.round(z.imag, 9), np.round(z.real, 9)))]


def test_square_preimages_of_one():
    f = RationalMap.polynomial([1, 0, 0])
    np.testing.assert_allclose(sorted_c(preimages_point(f, 1.0)), [-1.0, 1.0], atol=1e-12)


def test_golden_quadratic_preimages_of_zero():
    q = QuadSiegel.golden()
    got = sorted_c(q.preimages(0.0))
    want = sorted_c([0.0, -q.lam])
    np.testing.assert_allclose(got, want, atol=1e-14)
    got_r = sorted_c(q.as_rational().preimages(0.0))
    np.testing.assert_allclose(got_r, want, atol=1e-12)


def random_rational(rng, deg_num, deg_den):
    num = rng.normal(size=deg_num + 1) + 1j * rng.normal(size=deg_num + 1)
    den = rng.normal(size=deg_den + 1) + 1j * rng.normal(size=deg_den + 1)
    return RationalMap(num, den)


def test_random_degree_five_residual():
    rng = np.random.default_rng(5)
    f = random_rational(rng, 5, 3)
    assert f.degree == 5
    for _ in range(50):
        z = complex(rng.normal(), rng.normal()) * 3
        w = f.preimages(z)
        assert w.size == 5
        # independent residual oracle: P(w) - z Q(w) measured through the chordal metric
        assert np.max(chordal_dist(f(w), np.full(5, z))) < 1e-9


def test_degree_is_max_of_the_two():
    assert RationalMap(np.array([1, 0, 0]), np.array([1, 0, 0, 1])).degree == 3
    assert RationalMap.blaschke(0.3).degree == 3


def test_preimage_of_infinity_and_of_value_at_infinity():
    # z^2 / (z - 2): infinity has preimages {2, inf}
    f = RationalMap(np.array([1, 0, 0]), np.array([1, -2]))
    w = f.preimages(complex(np.inf))
    assert np.sum(np.isinf(w)) == 1
    assert abs(w[np.isfinite(w)][0] - 2.0) < 1e-12
    # 1 / z^2 at 0 has both preimages at infinity
    g = RationalMap(np.array([1]), np.array([1, 0, 0]))
    assert np.all(np.isinf(g.preimages(0.0)))


def test_common_root_rejected():
    with pytest.raises(ValueError):
        RationalMap(np.array([1, -1]), np.array([1, -1, 0]))  # (z-1)/(z(z-1))
    with pytest.raises(ValueError):
        RationalMap(np.array([2.0]))


def test_critical_points_have_zero_derivative():
    rng = np.random.default_rng(3)
    for _ in range(5):
        f = random_rational(rng, 4, 2)
        total = 0
        for c, m in f.critical_points:
            total += m
            if np.isfinite(c):
                # spherical derivative at a finite critical point
                w = f(c)
                dsph = abs(f.derivative(c)) * (1 + abs(c) ** 2) / (1 + abs(w) ** 2)
                assert dsph < 1e-8
        # Riemann-Hurwitz count
        assert total == 2 * f.degree - 2


def test_blaschke_critical_structure():
    f = RationalMap.blaschke(0.25)
    crit = f.critical_points
    finite = sorted((c for c, _ in crit if np.isfinite(c)), key=abs)
    # double critical point at 0, simple one at 1 on the circle, and at 1/3 reflected: 3
    assert any(abs(c) < 1e-6 for c in finite)
    assert any(abs(c - 1.0) < 1e-6 for c in finite)
    assert sum(m for c, m in crit) == 4


def test_quadratic_critical_data():
    q = QuadSiegel.golden()
    assert abs(abs(q.lam) - 1) < 1e-15
    assert abs(q.derivative(0.0) - q.lam) < 1e-15
    assert abs(q.derivative(q.critical_point)) < 1e-15
    assert q.critical_value == pytest.approx(q(q.critical_point))
    w = 0.3 + 0.1j
    assert abs(q(q.partner(w)) - q(w)) < 1e-14


def test_degree_conservation_many_targets():
    rng = np.random.default_rng(11)
    f = random_rational(rng, 3, 2)
    q = QuadSiegel.golden()
    for _ in range(1000):
        z = complex(rng.normal(), rng.normal()) * 2
        assert f.preimages(z).size == 3
        r = q.preimages(z)
        assert r.size == 2
        assert np.max(chordal_dist(q(r), np.full(2, z))) <= RESIDUAL_TOL


@given(
    st.floats(-5, 5), st.floats(-5, 5),
    st.integers(2, 6), st.integers(0, 4), st.integers(0, 10**6),
)
def test_residual_contract_property(x, y, dn, dd, seed):
    f = random_rational(np.random.default_rng(seed), dn, dd)
    w = f.preimages(complex(x, y))
    assert w.size == f.degree
    assert np.max(chordal_dist(f(w), np.full(w.size, complex(x, y)))) <= RESIDUAL_TOL


@given(st.floats(0, 1, exclude_max=True), st.floats(-3, 3), st.floats(-3, 3))
def test_quadratic_vectorised_roots_match_formula(a, x, y):
    q = Quadratic(complex(np.exp(2j * math.pi * a)))
    z = complex(x, y)
    got = sorted_c(q.preimages(z))
    s = np.sqrt(q.lam ** 2 + 4 * z)
    want = sorted_c([(-q.lam + s) / 2, (-q.lam - s) / 2])
    np.testing.assert_allclose(got, want, atol=1e-10)


def test_unmeetable_residual_raises(monkeypatch):
    import siegel_lab.pullback.rational as rational

    monkeypatch.setattr(rational, "RESIDUAL_TOL", 0.0)
    f = RationalMap.blaschke(0.123)
    with pytest.raises(SolverFailure):
        f.preimages(0.7 + 0.2j)
