import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from frozen import COMPARABILITY_LAMBDA, CRITICAL_COMPARABILITY_LAMBDA, RETURN_COMPARABILITY_LAMBDA
from siegel_lab.circle_dynamics import (
    TWO_PI,
    CircleArc,
    CircleMap,
    InvariantMeasure,
    arc_with_sigma,
    ccw,
    first_return,
    random_arcs,
    return_stats,
    return_triple,
    rotation_number,
    scale_arc,
    sigma_midpoint,
    tune_to_rotation,
    write_rows_csv,
    sigma_profile,
)
from siegel_lab.errors import CapExceeded, NoConvergence, TargetTooLarge
from siegel_lab.rotation import RotationNumber, closest_return_gap

GOLD = RotationNumber.golden()
angles = st.floats(0.0, TWO_PI, exclude_max=True, allow_nan=False)


@pytest.fixture(scope="module")
def rigid_mu():
    return InvariantMeasure.build(CircleMap.rigid(GOLD))


def brute_return(g, arc, x, cap=10**6):
    y = x
    for n in range(1, cap):
        y = g(y)
        if arc.contains(y):
            return n
    raise AssertionError("no return")


# ---------------------------------------------------------------- arcs


def test_arc_wraps_and_measures():
    I = CircleArc(6.0, 0.5)
    assert I.length == pytest.approx(0.5 + TWO_PI - 6.0)
    assert I.contains(0.1) and not I.contains(3.0)


def test_arc_degenerate_rejected():
    with pytest.raises(ValueError):
        CircleArc(1.0, 1.0)


@given(angles, st.floats(1e-3, 6.0))
def test_arc_and_complement_cover_circle(a, L):
    I = CircleArc(a, a + L)
    J = CircleArc(I.b, I.a)
    assert I.length + J.length == pytest.approx(TWO_PI)


# ---------------------------------------------------------------- maps


def test_rigid_eval():
    g = CircleMap.rigid(0.3)
    assert g(1.0) == pytest.approx(1.0 + TWO_PI * 0.3)
    assert g(6.0) == pytest.approx(6.0 + TWO_PI * 0.3 - TWO_PI)


def test_blaschke_critical_point_image():
    for t in (0.0, 0.25, 0.61):
        g = CircleMap.blaschke(t)
        w = complex(g.complex_eval(1.0 + 0j))
        assert w == pytest.approx(np.exp(2j * math.pi * t), abs=1e-14)
        assert g(0.0) == pytest.approx(math.fmod(TWO_PI * t, TWO_PI), abs=1e-14)


def test_blaschke_eval_matches_complex_argument():
    g = CircleMap.blaschke(0.37)
    th = np.linspace(0, TWO_PI, 101, endpoint=False)
    w = g.complex_eval(np.exp(1j * th))
    assert np.max(np.abs(np.abs(w) - 1.0)) < 1e-12
    d = np.angle(np.exp(1j * g(th)) / w)
    assert np.max(np.abs(d)) < 1e-12


def test_lift_strictly_increasing():
    th = np.linspace(0, TWO_PI, 10**4)
    for g in (CircleMap.rigid(GOLD), CircleMap.blaschke(0.1), CircleMap.blaschke(0.9)):
        assert np.all(np.diff(g.lift(th)) > 0)


def test_critical_value_is_image():
    g = CircleMap.blaschke(0.6)
    (c, deg), = g.critical_points_on_circle
    assert deg == 3 and g.derivative(c) == pytest.approx(0.0, abs=1e-15)
    assert abs(g.critical_values_on_circle[0] - g(c)) < 1e-10
    assert CircleMap.rigid(0.3).critical_values_on_circle == []


@given(angles)
def test_preimage_inverts(theta):
    g = CircleMap.blaschke(0.613)
    assert ccw(g(g.preimage(theta)), theta) in (pytest.approx(0.0, abs=1e-9), pytest.approx(TWO_PI, abs=1e-9))


def test_json_roundtrip():
    g = CircleMap.blaschke(0.61)
    assert CircleMap.from_json(g.to_json()) == g
    assert json.loads(g.to_json())["critical_points"] == [[0.0, 3]]


# ---------------------------------------------------------------- rotation number


def test_rigid_rotation_number():
    rho, err = rotation_number(CircleMap.rigid(GOLD), 10**4)
    assert rho == pytest.approx(GOLD.value, abs=1e-12) and err == 1e-4


def test_rotation_number_needs_long_orbit():
    with pytest.raises(ValueError):
        rotation_number(CircleMap.rigid(0.3), 10)


def test_blaschke_rotation_monotone_in_t():
    a, _ = rotation_number(CircleMap.blaschke(0.61), 10**5)
    b, _ = rotation_number(CircleMap.blaschke(0.611), 10**5)
    assert 0.0 < a <= b < 1.0


def test_rotation_monotone_on_grid():
    rho = [rotation_number(CircleMap.blaschke(t), 10**4)[0] for t in np.linspace(0.0, 0.999, 60)]
    assert all(x <= y + 1e-4 for x, y in zip(rho, rho[1:]))


def test_tuned_golden(tuned):
    rho, _ = rotation_number(tuned, 10**6)
    assert abs(rho - GOLD.value) <= 1e-5


def test_tuned_silver():
    g = tune_to_rotation(RotationNumber.silver())
    rho, _ = rotation_number(g, 10**6)
    assert abs(rho - (math.sqrt(2) - 1)) <= 1e-5


def test_tune_impossible_tolerance():
    with pytest.raises(NoConvergence):
        tune_to_rotation(GOLD, tol=1e-20)


# ---------------------------------------------------------------- sigma


def test_sigma_rigid_equals_length(rigid_mu):
    assert rigid_mu.sigma(CircleArc(1.0, 1.5)) == pytest.approx(0.5, abs=1e-3)
    rng = np.random.default_rng(1)
    for I in random_arcs(rng, 100, 1e-3, 6.0):
        assert abs(rigid_mu.sigma(I) - I.length) <= 1e-3


def test_sigma_full_circle_normalized(tuned_mu):
    assert tuned_mu.sigma(CircleArc(0.3, 0.3 + TWO_PI - 1e-9)) == pytest.approx(TWO_PI, abs=2 * tuned_mu.resolution)


def test_sigma_invariant(tuned, tuned_mu):
    rng = np.random.default_rng(2)
    for I in random_arcs(rng, 100, 1e-3, 1.0):
        assert abs(tuned_mu.sigma(tuned.image_arc(I)) - tuned_mu.sigma(I)) <= 4 * math.pi / tuned_mu.n_points


def test_comparability_regression(tuned_mu):
    rng = np.random.default_rng(11)
    worst = 1.0
    for _ in range(1000):
        a = rng.uniform(0, TWO_PI)
        L = math.exp(rng.uniform(math.log(1e-3), math.log(0.2)))
        L2 = L * math.exp(rng.uniform(-math.log(2), math.log(2)))
        r = tuned_mu.sigma(CircleArc(a, a + L)) / tuned_mu.sigma(CircleArc(a + L, a + L + L2))
        worst = max(worst, r, 1 / r)
    assert worst <= COMPARABILITY_LAMBDA


def test_critical_point_comparability(tuned_mu):
    for h in np.geomspace(0.02, 0.2, 40):
        r = tuned_mu.sigma(CircleArc(0.0, h)) / tuned_mu.sigma(CircleArc(h, 2 * h))
        assert 1 / CRITICAL_COMPARABILITY_LAMBDA <= r <= CRITICAL_COMPARABILITY_LAMBDA


def test_sigma_profile_csv(tmp_path, rigid_mu):
    rows = sigma_profile(rigid_mu, [CircleArc(0.0, 1.0), CircleArc(2.0, 2.5)])
    write_rows_csv(tmp_path / "s.csv", ["a", "b", "len", "sigma"], rows)
    assert len((tmp_path / "s.csv").read_text().splitlines()) == 3


# ---------------------------------------------------------------- arc solvers


def test_arc_with_sigma_rigid(rigid_mu):
    arc = arc_with_sigma(rigid_mu, 0.0, "right", 1.0)
    assert arc.a == 0.0 and arc.b == pytest.approx(1.0, abs=1e-3)
    left = arc_with_sigma(rigid_mu, 0.0, "left", 1.0)
    assert left.b == 0.0 and left.length == pytest.approx(1.0, abs=1e-3)


def test_arc_with_sigma_critical_roundtrip(tuned_mu):
    I = CircleArc(-0.05, 0.05)
    target = tuned_mu.sigma(I) / 2
    arc = arc_with_sigma(tuned_mu, 0.0, "right", target)
    assert abs(tuned_mu.sigma(arc) - target) <= tuned_mu.resolution


def test_arc_with_sigma_too_large(rigid_mu):
    with pytest.raises(TargetTooLarge):
        arc_with_sigma(rigid_mu, 0.0, "right", TWO_PI)


@given(angles, st.floats(1e-3, 3.0), st.sampled_from(["left", "right"]))
def test_arc_with_sigma_hits_target(tuned_mu, c, target, side):
    mu = tuned_mu
    arc = arc_with_sigma(mu, c, side, target)
    assert abs(mu.sigma(arc) - target) <= mu.resolution


def test_scale_arc_rigid(rigid_mu):
    J = scale_arc(rigid_mu, CircleArc(0.0, 1.0), 2.0)
    assert min(ccw(J.a, TWO_PI - 0.5), ccw(TWO_PI - 0.5, J.a)) < 1e-3
    assert J.b == pytest.approx(1.5, abs=1e-3)


def test_scale_arc_identity(tuned_mu):
    I = CircleArc(1.0, 1.3)
    J = scale_arc(tuned_mu, I, 1.0)
    assert tuned_mu.sigma(J) == tuned_mu.sigma(I)
    # both endpoints move at most to the neighbouring orbit gap
    assert tuned_mu.sigma_between(min(I.a, J.a), max(I.a, J.a)) <= tuned_mu.resolution


@given(angles, st.floats(0.01, 0.5), st.floats(0.5, 3.0))
def test_scale_arc_keeps_midpoint(tuned_mu, a, L, kappa):
    mu = tuned_mu
    I = CircleArc(a, a + L)
    J = scale_arc(mu, I, kappa)
    assert abs(mu.sigma(J) - kappa * mu.sigma(I)) <= mu.resolution
    m1, m2 = sigma_midpoint(mu, I), sigma_midpoint(mu, J)
    gap = min(mu.sigma_between(m1, m2), mu.sigma_between(m2, m1)) if abs(m1 - m2) > 1e-15 else 0.0
    assert gap <= mu.resolution


def test_scale_arc_delta(tuned_mu):
    I = CircleArc(2.0, 2.05)
    J = scale_arc(tuned_mu, I, 1.02)
    assert abs(tuned_mu.sigma(J) - 1.02 * tuned_mu.sigma(I)) <= tuned_mu.resolution


# ---------------------------------------------------------------- returns


def test_first_return_matches_brute_force():
    g = CircleMap.rigid(GOLD)
    I = CircleArc.centered(1.0, TWO_PI * 0.4)
    assert first_return(g, I, 1.0) == brute_return(g, I, 1.0)
    assert first_return(g, I, 1.0) in (2, 3)
    rng = np.random.default_rng(4)
    for x in rng.uniform(I.a, I.a + I.length, 50):
        assert first_return(g, I, x) == brute_return(g, I, x)


def test_first_return_almost_full_circle():
    g = CircleMap.rigid(GOLD)
    I = CircleArc(0.5, 0.5 - 1e-9)
    assert first_return(g, I, 2.0) == 1


def test_first_return_cap():
    with pytest.raises(CapExceeded):
        first_return(CircleMap.rigid(GOLD), CircleArc(0.0, 1e-6), 0.5e-6, cap=100)


def test_return_stats_closest_return_scale():
    g = CircleMap.rigid(GOLD)
    for k in range(3, 12):
        I = CircleArc.centered(0.7, TWO_PI * closest_return_gap(GOLD, k))
        assert return_stats(g, I, 200).ratio <= 5


def test_return_stats_full_circle():
    r = return_stats(CircleMap.rigid(GOLD), CircleArc(0.5, 0.5 - 1e-9), 100)
    assert (r.min_return, r.max_return, r.ratio) == (1, 1, 1.0)


def test_return_time_comparability(tuned, tuned_mu):
    rng = np.random.default_rng(15)
    for I in random_arcs(rng, 1000, 1e-3, 0.5)[:100]:
        target = tuned_mu.sigma(I) * math.exp(rng.uniform(-math.log(2), math.log(2)))
        J = arc_with_sigma(tuned_mu, rng.uniform(0, TWO_PI), "right", target)
        nI, nJ = return_stats(tuned, I, 100).max_return, return_stats(tuned, J, 100).max_return
        assert max(nI / nJ, nJ / nI) <= RETURN_COMPARABILITY_LAMBDA


def test_rigid_triple_comparable():
    g = CircleMap.rigid(GOLD)
    rng = np.random.default_rng(13)
    for I in random_arcs(rng, 100, 1e-3, 0.5):
        x = I.a + I.length * rng.uniform(0.01, 0.99)
        r = return_triple(g, I, x).ratio
        assert 1 / 10 <= r <= 10


def test_triple_returns_straddle_midpoint():
    g = CircleMap.rigid(GOLD)
    for k in range(2, 10):
        I = CircleArc.centered(1.7, TWO_PI * closest_return_gap(GOLD, k))
        r = return_triple(g, I, 1.7)
        s1 = math.sin(g.iterate(1.7, r.n1) - 1.7)
        s2 = math.sin(g.iterate(1.7, r.n2) - 1.7)
        assert s1 * s2 < 0


def test_triple_full_circle():
    r = return_triple(CircleMap.rigid(GOLD), CircleArc(0.5, 0.5 - 1e-9), 2.0)
    assert (r.n1, r.n2) == (1, 2)
