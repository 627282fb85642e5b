import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from siegel_lab.errors import NodeCap
from siegel_lab.hypgeo import chordal_diameter
from siegel_lab.pullback.census import CensusReport, _diameters, fatou_census
from siegel_lab.pullback.curves import JordanCurve, pullback_curve


def curve_census(f, disk, depth, eps):
    """Oracle: recursive adaptive pull-back, exact diameters."""
    counts = [int(chordal_diameter(disk) > eps)]
    # the critical value sits on the disk boundary, so the new preimage is
    # taken as the reflection w -> -lam - w rather than by tracking
    level = [JordanCurve(f.partner(disk))]
    for _ in range(depth):
        counts.append(sum(chordal_diameter(c.vertices) > eps for c in level))
        level = [p.curve for c in level for p in pullback_curve(f, c)]
    return counts


def test_matches_curve_pullback_oracle(quad, boundary):
    rep = fatou_census(quad, 6, 0.1, boundary)
    disk = boundary.subsample(256)
    assert rep.counts == curve_census(quad, disk, 6, 0.1)
    assert rep.components == [1] + [2 ** (n - 1) for n in range(1, 7)]


def test_first_levels(quad, boundary):
    rep = fatou_census(quad, 12, 0.1, boundary)
    assert rep.counts[:3] == [1, 1, 2]
    assert rep.fallbacks == 0
    assert rep.first_zero is None  # 0.1-large components remain at depth 12


def test_huge_epsilon_counts_nothing(quad, boundary):
    rep = fatou_census(quad, 8, 2.0, boundary)
    assert rep.counts == [0] * 9
    assert rep.first_zero == 0


def test_depth_zero_counts_the_disk(quad, boundary):
    assert fatou_census(quad, 0, 0.1, boundary).counts == [1]
    assert fatou_census(quad, 0, 1.9, boundary).counts == [0]


def test_limits(quad, boundary):
    with pytest.raises(ValueError):
        fatou_census(quad, 21, 0.1, boundary)
    with pytest.raises(ValueError):
        fatou_census(quad, -1, 0.1, boundary)
    with pytest.raises(NodeCap):
        fatou_census(quad, 10, 0.1, boundary, node_cap=100)


def test_report_serialises(quad, boundary):
    d = json.loads(json.dumps(fatou_census(quad, 3, 0.1, boundary).to_dict()))
    assert d["depth"] == 3 and d["total_large"] == sum(d["counts"])
    assert "basin_of_infinity" in d


@given(st.lists(st.integers(0, 3), min_size=1, max_size=12))
def test_first_zero_definition(counts):
    rep = CensusReport(0.1, len(counts) - 1, counts, counts, [0.0] * len(counts), 16)
    fz = rep.first_zero
    if fz is None:
        assert counts[-1] != 0
    else:
        assert all(c == 0 for c in counts[fz:])
        assert fz == 0 or counts[fz - 1] != 0


@given(st.integers(0, 10**6), st.floats(0.01, 1.5))
def test_diameter_classification_is_exact(seed, eps):
    rng = np.random.default_rng(seed)
    rows = rng.normal(size=(6, 20)) * rng.uniform(0.05, 1.0, (6, 1)) + 1j * rng.normal(size=(6, 20)) * 0.3
    big, _ = _diameters(rows, eps)
    want = np.array([chordal_diameter(r) > eps for r in rows])
    assert np.array_equal(big, want)
