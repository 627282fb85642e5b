import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from siegel_lab.errors import CriticalValueOnCurve, TrackingLost
from siegel_lab.hypgeo import chordal_dist
from siegel_lab.pullback.curves import (
    CurvePerturbedWarning,
    JordanCurve,
    decimate,
    lift_path,
    pullback_curve,
    pullback_residual,
    track_loop,
)
from siegel_lab.pullback.rational import RationalMap
from siegel_lab.pullback.siegel import Quadratic, QuadSiegel

SQUARE = Quadratic(0j)


def winding_of_f_minus_point(f, curve, value):
    """Argument principle oracle: winding of f(curve) - value, counted on a fine sample."""
    v = curve.closed_vertices
    z = np.concatenate([np.linspace(v[i], v[i + 1], 20, endpoint=False) for i in range(v.size - 1)])
    w = f(z) - value
    return int(np.rint(np.sum(np.angle(np.roll(w, -1) / w)) / (2 * math.pi)))


def test_curve_drops_duplicate_closing_vertex():
    c = JordanCurve.circle(0, 1, 32)
    again = JordanCurve(c.closed_vertices)
    assert len(again) == 32
    assert again.closed_vertices[0] == again.closed_vertices[-1]


def test_too_few_vertices():
    with pytest.raises(ValueError):
        JordanCurve(np.exp(2j * np.pi * np.arange(8) / 8))


def test_circle_geometry():
    c = JordanCurve.circle(1 + 1j, 0.5, 512)
    assert c.counterclockwise
    assert c.signed_area == pytest.approx(math.pi * 0.25, rel=1e-4)
    assert not c.self_intersects()
    assert list(c.winding_number([1 + 1j, 3.0])) == [1, 0]
    assert c.distance(np.array([1 + 1j]))[0] == pytest.approx(0.5, rel=1e-4)


def test_figure_eight_self_intersects():
    t = np.linspace(0, 2 * np.pi, 200, endpoint=False)
    # two loops pinched at a shared vertex
    loop = 1.0 + np.exp(1j * (np.pi + np.linspace(0, 2 * np.pi, 12, endpoint=False)))
    assert JordanCurve(np.concatenate([loop, -loop])).self_intersects()
    # and shifted so it falls inside two edges
    assert JordanCurve(np.sin(t + 0.01) + 1j * np.sin(2 * t + 0.02) / 2).self_intersects()


def test_off_centre_circle_has_two_components():
    c = JordanCurve.circle(3.0, 1.0, 128)
    comps = pullback_curve(SQUARE, c)
    assert len(comps) == 2
    assert [p.laps for p in comps] == [1, 1]
    # oracle: the winding of z^2 - 3 about the whole circle is 0, so no square root of
    # a point inside is enclosed twice; each branch closes after one lap
    assert winding_of_f_minus_point(SQUARE, c, 3.0) == 0
    # the two components are the two square-root images, negatives of each other
    a, b = (p.curve.vertices for p in comps)
    assert np.max(np.abs(a + b)) < 1e-12 or np.max(np.abs(np.sort_complex(a) + np.sort_complex(b)[::-1])) < 1e-9
    for p in comps:
        assert pullback_residual(SQUARE, p) < 1e-9
        assert not p.curve.self_intersects()


def test_circle_around_zero_has_one_double_component():
    c = JordanCurve.circle(0.0, 2.0, 128)
    comps = pullback_curve(SQUARE, c)
    assert len(comps) == 1
    assert comps[0].laps == 2
    assert winding_of_f_minus_point(SQUARE, c, 0.0) == 2
    # the preimage is the round circle of radius sqrt 2
    np.testing.assert_allclose(np.abs(comps[0].curve.vertices), math.sqrt(2), atol=1e-12)
    assert not comps[0].curve.self_intersects()


@pytest.mark.parametrize("centre,radius", [(0.0, 1.3), (0.5 + 0.5j, 0.2), (-2.0, 0.9), (1.5j, 1.0)])
def test_components_agree_with_argument_principle(centre, radius):
    c = JordanCurve.circle(centre, radius, 128)
    comps = pullback_curve(SQUARE, c)
    # z^2 has one critical value (0): enclosed gives one component of degree 2,
    # otherwise two components of degree 1
    inside = abs(centre) < radius
    assert sorted(p.laps for p in comps) == ([2] if inside else [1, 1])
    assert sum(p.laps for p in comps) == 2
    for p in comps:
        assert pullback_residual(SQUARE, p) < 1e-9


def test_blaschke_pullback_residual_and_surjectivity():
    f = RationalMap.blaschke(0.61)
    c = JordanCurve.circle(2.0 + 0.5j, 0.3, 64)
    comps = pullback_curve(f, c)
    assert sum(p.laps for p in comps) == 3
    for p in comps:
        assert pullback_residual(f, p) < 1e-9
    # sampled surjectivity: every input vertex is the image of some output vertex
    imgs = np.concatenate([f(p.curve.vertices) for p in comps])
    d = np.min(np.abs(c.vertices[:, None] - imgs[None, :]), axis=1)
    assert np.max(d) < 1e-9


def test_golden_quadratic_pullback():
    q = QuadSiegel.golden()
    c = JordanCurve.circle(1.0, 0.25, 64)
    comps = pullback_curve(q, c, resolution=128)
    assert sum(p.laps for p in comps) == 2
    for p in comps:
        assert pullback_residual(q, p) < 1e-9
        assert len(p.curve) >= 16


def test_tracking_steps_are_safe():
    loop = track_loop(SQUARE, JordanCurve.circle(0.1, 0.099, 32).vertices)
    t = loop.tracks
    nxt = np.vstack([t[1:], t[0][loop.monodromy][None, :]])
    move = np.max(np.abs(nxt - t), axis=1)
    gap = np.minimum(np.abs(t[:, 0] - t[:, 1]), np.abs(nxt[:, 0] - nxt[:, 1]))
    assert np.all(move < gap / 3)
    # near the critical value the input was refined
    assert loop.targets.size > 32


def test_near_critical_value_is_perturbed_with_warning():
    n = 64
    t = 2 * np.pi * np.arange(n) / n
    verts = 1.0 + np.exp(1j * t)
    verts[n // 2] = 0.0  # a vertex exactly at the critical value
    with pytest.warns(CurvePerturbedWarning):
        comps = pullback_curve(SQUARE, JordanCurve(verts))
    for p in comps:
        assert pullback_residual(SQUARE, p) < 1e-9


def test_refinement_cap():
    with pytest.raises(TrackingLost):
        pullback_curve(SQUARE, JordanCurve.circle(0.01, 0.01 - 1e-5, 64), max_vertices=70)


def test_lift_path_of_squaring():
    path = np.linspace(4.0, 1.0, 10)
    lifted, tg = lift_path(SQUARE, path, 2.0)
    np.testing.assert_allclose(lifted, np.sqrt(tg), atol=1e-12)
    lifted, tg = lift_path(SQUARE, path, -2.0)
    np.testing.assert_allclose(lifted, -np.sqrt(tg), atol=1e-12)


def test_decimate_keeps_a_closed_curve():
    c = JordanCurve.circle(0, 1, 4096)
    pts, tg = decimate(c.vertices, c.vertices, 0.1)
    assert 16 <= pts.size < 4096
    assert np.all(chordal_dist(pts, np.roll(pts, -1)) < 0.1 + 1e-3)


def test_csv_export(tmp_path):
    c = JordanCurve.circle(0, 1, 16)
    c.to_csv(tmp_path / "c.csv")
    rows = np.loadtxt(tmp_path / "c.csv", delimiter=",", skiprows=1)
    assert rows.shape == (17, 2)
    np.testing.assert_allclose(rows[0], rows[-1])


@given(
    st.floats(-3, 3), st.floats(-3, 3), st.floats(0.05, 1.5),
    st.floats(0, 1, exclude_max=True),
)
def test_pullback_residual_property(x, y, r, a):
    f = Quadratic(complex(np.exp(2j * math.pi * a)))
    c = JordanCurve.circle(complex(x, y), r, 64)
    if np.min(np.abs(c.vertices - f.critical_value)) < 1e-3:
        return
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CurvePerturbedWarning)
        try:
            comps = pullback_curve(f, c)
        except (TrackingLost, CriticalValueOnCurve):
            return
    assert sum(p.laps for p in comps) == 2
    assert len(comps) == (1 if abs(complex(x, y) - f.critical_value) < r else 2)
    for p in comps:
        assert pullback_residual(f, p) <= 1e-9
