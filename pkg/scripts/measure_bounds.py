"""Measure the empirical constants that the test suite freezes as regression bounds.

Run once, inspect, and copy the printed values into tests/frozen.py.  Every
measurement uses fixed seeds, so a rerun on the same platform reproduces the
numbers exactly.

    python3 scripts/measure_bounds.py [--quick]
"""
from __future__ import annotations

import argparse
import json
import math
import time

import numpy as np

from siegel_lab.admissible import AdmissibleParams, deviation, generate
from siegel_lab.circle_dynamics import (
    CircleArc,
    CircleMap,
    InvariantMeasure,
    arc_with_sigma,
    random_arcs,
    return_stats,
    return_triple,
    tune_to_rotation,
)
from siegel_lab.hypgeo import sandwich_check
from siegel_lab.pullback.census import fatou_census
from siegel_lab.pullback.probe import contraction_probe
from siegel_lab.pullback.siegel import QuadSiegel, siegel_boundary
from siegel_lab.pullback.tree import max_diam_profile, pullback_tree, touching_disk
from siegel_lab.rotation import RotationNumber


def comparability(g: CircleMap, mu: InvariantMeasure, pairs: int, seed: int) -> dict:
    """sigma(I)/sigma(I') for adjacent arcs with length ratio in [1/2, 2]."""
    rng = np.random.default_rng(seed)
    ratios = []
    for _ in range(pairs):
        a = rng.uniform(0, 2 * math.pi)
        L = math.exp(rng.uniform(math.log(1e-3), math.log(0.2)))
        L2 = L * math.exp(rng.uniform(-math.log(2), math.log(2)))
        ratios.append(mu.sigma(CircleArc(a, a + L)) / mu.sigma(CircleArc(a + L, a + L + L2)))
    r = np.array(ratios)
    return {"lambda": float(max(r.max(), 1 / r.min())), "min": float(r.min()), "max": float(r.max())}


def critical_comparability(g: CircleMap, mu: InvariantMeasure) -> dict:
    """Arcs ``(0, h)`` at the critical point against the adjacent arc of equal length.

    The measure vanishes at the critical point like ``|x|^1.9``, so below
    ``h ~ 0.01`` a 10^6-point orbit leaves ``(0, h)`` empty.
    """
    out = []
    for h in np.geomspace(0.02, 0.2, 40):
        out.append(mu.sigma(CircleArc(0.0, h)) / mu.sigma(CircleArc(h, 2 * h)))
    r = np.array(out)
    return {"lambda": float(max(r.max(), 1 / r.min())), "min": float(r.min()), "max": float(r.max())}


def returns(g: CircleMap, mu: InvariantMeasure, count: int, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    ratio, triple = [], []
    for arc in random_arcs(rng, count, 1e-3, 0.5):
        ratio.append(return_stats(g, arc, 100).ratio)
        x = arc.a + arc.length * rng.uniform(0.01, 0.99)
        triple.append(return_triple(g, arc, x, mu).ratio)
    return {"max_return_ratio": max(ratio), "triple_min": min(triple), "triple_max": max(triple)}


def return_comparability(g: CircleMap, mu: InvariantMeasure, pairs: int, seed: int) -> dict:
    """N(I)/N(J) for arcs whose dynamical lengths are within a factor 2."""
    rng = np.random.default_rng(seed)
    worst = 1.0
    for I in random_arcs(rng, pairs, 1e-3, 0.5):
        target = mu.sigma(I) * math.exp(rng.uniform(-math.log(2), math.log(2)))
        J = arc_with_sigma(mu, rng.uniform(0, 2 * math.pi), "right", target)
        nI, nJ = return_stats(g, I, 100).max_return, return_stats(g, J, 100).max_return
        worst = max(worst, nI / nJ, nJ / nI)
    return {"lambda": worst}


def rigid_triples(count: int, seed: int) -> dict:
    g = CircleMap.rigid(RotationNumber.golden())
    rng = np.random.default_rng(seed)
    r = []
    for arc in random_arcs(rng, count, 1e-3, 0.5):
        x = arc.a + arc.length * rng.uniform(0.01, 0.99)
        r.append(return_triple(g, arc, x).ratio)
    return {"lambda0": float(max(max(r), 1 / min(r))), "min": min(r), "max": max(r)}


def deviation_constant(g: CircleMap, mu: InvariantMeasure, windows: int, seed: int) -> dict:
    """Largest deviation / sigma(I_n) over windows holding one to three critical steps.

    Random sequences almost never meet the critical value just outside an
    arc, so the start arcs are placed a fraction of ``delta sigma`` beside it
    and the whole successor tree is followed; every branch is a sequence.
    """
    p = AdmissibleParams()
    v = g.critical_values_on_circle[0]
    rng = np.random.default_rng(seed)
    seqs = []
    for side in ("left", "right"):
        for u in (0.2, 0.5, 0.8):
            s0 = 0.005
            x = arc_with_sigma(mu, v, side, u * p.delta * s0)
            x = x.a if side == "left" else x.b
            I0 = arc_with_sigma(mu, x, side, s0)
            seqs.extend(generate(g, mu, I0, p, 300, "exhaustive").sequences())
    worst, seen, kinds = 0.0, 0, {}
    while seen < windows:
        seq = seqs[int(rng.integers(len(seqs)))]
        m = len(seq.steps)
        pos = seq.critical_positions
        if not pos:
            continue
        # window (n, k) covering the critical step j, with at most three in total
        j = pos[int(rng.integers(len(pos)))]
        n = int(rng.integers(0, j + 1))
        k = int(rng.integers(j - n + 1, min(m - n, j - n + 200) + 1))
        if sum(n <= q < n + k for q in pos) > 3:
            continue
        for st in seq.steps[n : n + k]:
            kinds[st.kind.value] = kinds.get(st.kind.value, 0) + 1
        worst = max(worst, deviation(g, mu, seq, n, k) / seq.sigmas[n])
        seen += 1
    return {"K3": worst, "windows": seen, "sequences": len(seqs), "step_kinds": kinds}


def sandwich_constants(arcs: int) -> dict:
    d = math.log(1 / math.tan(math.pi / 32))
    cs = []
    for L in np.geomspace(0.05, 1e-3, arcs):
        cs.append(sandwich_check(CircleArc.centered(1.0, float(L)), d).constant)
    return {"C_max": max(cs), "C_min": min(cs), "d": d}


def shrink(seed_count: int) -> dict:
    f = QuadSiegel.golden()
    bd = siegel_boundary(f)
    v0, _, _ = touching_disk(bd, 0.25, 0.2)
    first, p25 = [], []
    for s in range(seed_count):
        prof = max_diam_profile(pullback_tree(f, v0, 25, "random", s, bd))
        first.append(next(n for n, x in enumerate(prof) if x < 0.05))
        p25.append(prof[25])
    allp = max_diam_profile(pullback_tree(f, v0, 12, "all", None, bd, keep_curves=False))
    return {"random_first_below_0.05": first, "random_profile25_max": max(p25), "all_branch_profile": allp}


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true", help="skip the pull-back, census and sandwich runs")
    args = ap.parse_args()
    t0 = time.time()
    g = tune_to_rotation(RotationNumber.golden())
    mu = InvariantMeasure.build(g)
    out = {
        "t_star": g.parameter,
        "comparability": comparability(g, mu, 1000, 11),
        "critical_comparability": critical_comparability(g, mu),
        "returns": returns(g, mu, 1000, 12),
        "return_comparability": return_comparability(g, mu, 1000, 15),
        "rigid_triples": rigid_triples(100, 13),
        "deviation": deviation_constant(g, mu, 1000, 14),
        "probe": contraction_probe(g).to_dict(),
    }
    if not args.quick:
        out["sandwich"] = sandwich_constants(50)
        out["shrink"] = shrink(10)
        out["census"] = fatou_census(QuadSiegel.golden(), 20, 0.1).to_dict()
    out["seconds"] = time.time() - t0
    print(json.dumps(out, indent=1, default=float))


if __name__ == "__main__":
    main()
