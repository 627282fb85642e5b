"""Admissible arc sequences: successor rules, generation and shortening checks.

An arc ``I`` is pulled back one step at a time.  Away from the critical
value the pull-back is the homeomorphic preimage; near it the successor is an
arc with the critical point as one endpoint whose dynamical length is a fixed
multiple of ``sigma(I)``:

* ``CritI``   -- ``(1 - eta/3) sigma(I)`` when the critical value sits well inside ``I``;
* ``CritII``  -- ``(1 + delta) sigma(I)`` when it sits near the far end;
* ``CritIII`` -- ``sigma(I) / 2`` when it lies just outside, in ``(1 + 2 delta) I``.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

import numpy as np

from .circle_dynamics import (
    TWO_PI,
    CircleArc,
    CircleMap,
    InvariantMeasure,
    arc_with_sigma,
    ccw,
    scale_arc,
)
from .errors import AmbiguousCriticalValue, ArcTooLong, IndexOutOfRange, NodeCap, SiegelLabError

MAX_TREE_NODES = 10**5


class StepKind(str, Enum):
    NON_CRITICAL = "NonCritical"
    CRIT_I = "CritI"
    CRIT_II = "CritII"
    CRIT_III = "CritIII"

    @property
    def critical(self) -> bool:
        return self is not StepKind.NON_CRITICAL


@dataclass(frozen=True)
class AdmissibleParams:
    delta: float = 0.01
    eta: float = 0.2
    d: float = 3.0
    r0p: float = 0.25
    r1: float = 0.1
    r2: float = 0.05
    r3: float = 0.0125

    def __post_init__(self) -> None:
        if not 0.0 < self.delta < self.eta < 0.5:
            raise ValueError("need 0 < delta < eta < 1/2")
        if self.delta > self.eta / 10.0:
            raise ValueError("delta must be at most eta/10")
        if self.d <= 0.0:
            raise ValueError("d must be positive")
        r = (self.r0p, self.r1, self.r2, self.r3)
        if min(r) <= 0.0 or any(x < y for x, y in zip(r, r[1:])):
            raise ValueError("thresholds must be positive and non-increasing")

    def target_ratio(self, kind: StepKind) -> float:
        return {
            StepKind.NON_CRITICAL: float("nan"),
            StepKind.CRIT_I: 1.0 - self.eta / 3.0,
            StepKind.CRIT_II: 1.0 + self.delta,
            StepKind.CRIT_III: 0.5,
        }[kind]


@dataclass(frozen=True)
class SuccessorStep:
    parent: CircleArc
    child: CircleArc
    kind: StepKind
    sigma_parent: float
    sigma_child: float
    tolerance: float
    branch_index: int = 0
    singular_points: tuple[float, ...] = ()
    critical_point: float | None = None
    side: str | None = None

    @property
    def ratio(self) -> float:
        return self.sigma_child / self.sigma_parent

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "parent": [self.parent.a, self.parent.b],
            "child": [self.child.a, self.child.b],
            "sigma_parent": self.sigma_parent,
            "sigma_child": self.sigma_child,
            "ratio": self.ratio,
            "tolerance": self.tolerance,
            "branch_index": self.branch_index,
            "singular_points": list(self.singular_points),
            "critical_point": self.critical_point,
            "side": self.side,
        }


def _closest_critical_value(g: CircleMap, arc: CircleArc, mu: InvariantMeasure) -> list[tuple[float, float]]:
    """(critical point, critical value) pairs with the value in ``2 I``."""
    cps = g.critical_points_on_circle
    if not cps:
        return []
    wide = scale_arc(mu, arc, 2.0) if 2.0 * mu.sigma(arc) < TWO_PI - mu.resolution else None
    hits = []
    for c, _ in cps:
        v = g(c)
        if wide is None or wide.contains_closed(v):
            hits.append((c, v))
    return hits


def successors(g: CircleMap, mu: InvariantMeasure, arc: CircleArc, p: AdmissibleParams) -> list[SuccessorStep]:
    """Every successor of ``arc`` the rules permit.

    Emission order: in the critical-value-inside case the right-hand
    ``(c, x)`` step precedes the left-hand ``(x, c)`` step; in the
    nearby-critical-value case the non-critical step precedes the
    type-(iii) step.
    """
    s = mu.sigma(arc)
    tol = mu.resolution
    if s >= p.r2 / 2.0:
        raise ArcTooLong(f"sigma(I) = {s:.6g} is not below r2/2 = {p.r2 / 2:.6g}")
    hits = _closest_critical_value(g, arc, mu)
    if len(hits) > 1:
        raise AmbiguousCriticalValue(f"{len(hits)} critical values lie in 2I")

    def non_critical() -> SuccessorStep:
        child = g.preimage_arc(arc)
        cvs = tuple(g.critical_values_on_circle)
        sing = (cvs[0], cvs[0]) if len(cvs) == 1 else ()
        return SuccessorStep(arc, child, StepKind.NON_CRITICAL, s, mu.sigma(child), tol, 0, sing)

    if not hits:
        return [non_critical()]
    c, v = hits[0]
    branches = max(1, g.branch_index - 1)
    out: list[SuccessorStep] = []
    if arc.contains(v):
        # right side (c, x): judged by how much of I lies beyond v
        for side, beyond in (("right", mu.sigma_between(v, arc.b)), ("left", mu.sigma_between(arc.a, v))):
            crit_i = beyond < (1.0 - p.eta) * s
            kind = StepKind.CRIT_I if crit_i else StepKind.CRIT_II
            for i in range(1, branches + 1):
                child = arc_with_sigma(mu, c, side, p.target_ratio(kind) * s)
                sing = (v, v) if i == 1 else (v,)
                out.append(SuccessorStep(arc, child, kind, s, mu.sigma(child), tol, i, sing, c, side))
        return out
    wide = scale_arc(mu, arc, 1.0 + 2.0 * p.delta)
    if wide.contains_closed(v):
        out.append(non_critical())
        # v to the right of I when it is closer to b than a going anticlockwise
        side = "right" if ccw(arc.b, v) <= ccw(v, arc.a) else "left"
        for i in range(1, branches + 1):
            child = arc_with_sigma(mu, c, side, p.target_ratio(StepKind.CRIT_III) * s)
            sing = (v, v) if i == 1 else (v,)
            out.append(SuccessorStep(arc, child, StepKind.CRIT_III, s, mu.sigma(child), tol, i, sing, c, side))
        return out
    return [non_critical()]


@dataclass
class AdmissibleSequence:
    """Chained successor steps ``I_0 -> I_1 -> ...``."""

    initial: CircleArc
    steps: list[SuccessorStep]
    params: AdmissibleParams
    source: CircleMap
    t0: int = 1
    findings: list[str] = field(default_factory=list)

    @property
    def arcs(self) -> list[CircleArc]:
        return [self.initial] + [st.child for st in self.steps]

    @property
    def sigmas(self) -> np.ndarray:
        if not self.steps:
            return np.array([])
        return np.array([self.steps[0].sigma_parent] + [st.sigma_child for st in self.steps])

    @property
    def critical_positions(self) -> list[int]:
        return [n for n, st in enumerate(self.steps) if st.kind.critical]

    def __len__(self) -> int:
        return len(self.steps) + 1

    def to_dict(self) -> dict:
        return {
            "map": self.source.to_dict(),
            "params": self.params.__dict__,
            "initial": [self.initial.a, self.initial.b],
            "steps": [st.to_dict() for st in self.steps],
            "critical_positions": self.critical_positions,
            "findings": self.findings,
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    def sigma_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "kind", "sigma"])
            w.writerow([0, "", self.sigmas[0] if self.steps else ""])
            for n, st in enumerate(self.steps, start=1):
                w.writerow([n, st.kind.value, st.sigma_child])


@dataclass
class TreeNode:
    arc: CircleArc
    depth: int
    parent: int
    step: SuccessorStep | None
    children: list[int] = field(default_factory=list)
    dead: str | None = None


@dataclass
class SequenceTree:
    """Every branch of the successor rules explored to a fixed depth."""

    nodes: list[TreeNode]
    params: AdmissibleParams
    source: CircleMap
    t0: int = 1

    def leaves(self) -> list[int]:
        return [i for i, nd in enumerate(self.nodes) if not nd.children]

    def path(self, leaf: int) -> AdmissibleSequence:
        steps = []
        i = leaf
        while self.nodes[i].parent >= 0:
            steps.append(self.nodes[i].step)
            i = self.nodes[i].parent
        steps.reverse()
        seq = AdmissibleSequence(self.nodes[0].arc, steps, self.params, self.source, self.t0)
        if self.nodes[leaf].dead:
            seq.findings.append(self.nodes[leaf].dead)
        return seq

    def sequences(self) -> Iterator[AdmissibleSequence]:
        for leaf in self.leaves():
            yield self.path(leaf)

    def to_dict(self) -> dict:
        return {
            "map": self.source.to_dict(),
            "params": self.params.__dict__,
            "nodes": [
                {
                    "depth": nd.depth,
                    "parent": nd.parent,
                    "arc": [nd.arc.a, nd.arc.b],
                    "step": nd.step.to_dict() if nd.step else None,
                    "dead": nd.dead,
                }
                for nd in self.nodes
            ],
        }


def critical_point_count(g: CircleMap) -> int:
    return max(1, len(g.critical_points_on_circle))


def generate(
    g: CircleMap,
    mu: InvariantMeasure,
    initial: CircleArc,
    p: AdmissibleParams,
    depth: int,
    policy: str = "random",
    seed: int = 0,
    max_nodes: int = MAX_TREE_NODES,
) -> AdmissibleSequence | SequenceTree:
    """Apply the successor rules ``depth`` times.

    ``policy`` is ``"random"`` (seeded uniform choice among the permitted
    successors), ``"first-branch"`` (always the first one) or
    ``"exhaustive"`` (the whole tree, at most ``max_nodes`` nodes).
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if mu.sigma(initial) >= p.r3:
        raise ArcTooLong(f"sigma(I_0) = {mu.sigma(initial):.6g} is not below r3 = {p.r3}")
    t0 = critical_point_count(g)
    if policy == "exhaustive":
        return _generate_tree(g, mu, initial, p, depth, max_nodes, t0)
    if policy not in ("random", "first-branch"):
        raise ValueError(f"unknown policy {policy!r}")
    rng = np.random.default_rng(seed)
    seq = AdmissibleSequence(initial, [], p, g, t0)
    arc = initial
    for n in range(depth):
        try:
            options = successors(g, mu, arc, p)
        except SiegelLabError as exc:
            seq.findings.append(f"step {n}: {exc.kind}: {exc}")
            break
        pick = options[0] if policy == "first-branch" or len(options) == 1 else options[int(rng.integers(len(options)))]
        seq.steps.append(pick)
        arc = pick.child
    return seq


def _generate_tree(g, mu, initial, p, depth, max_nodes, t0) -> SequenceTree:
    nodes = [TreeNode(initial, 0, -1, None)]
    stack = [0]
    while stack:
        i = stack.pop()
        nd = nodes[i]
        if nd.depth >= depth:
            continue
        try:
            options = successors(g, mu, nd.arc, p)
        except SiegelLabError as exc:
            nd.dead = f"depth {nd.depth}: {exc.kind}: {exc}"
            continue
        for st in options:
            if len(nodes) >= max_nodes:
                raise NodeCap(f"exhaustive tree exceeds {max_nodes} nodes")
            nodes.append(TreeNode(st.child, nd.depth + 1, i, st))
            nd.children.append(len(nodes) - 1)
            stack.append(len(nodes) - 1)
    return SequenceTree(nodes, p, g, t0)


# --------------------------------------------------------------------------
# measurements


@dataclass(frozen=True)
class ShorteningReport:
    max_ratio: float
    halving_count: int
    halving_found: bool
    critical_steps: int
    final_ratio: float

    @property
    def ratio_pass(self) -> bool:
        return self.max_ratio < 2.0


def max_growth_ratio(sigmas: np.ndarray) -> float:
    """``max_{s<t} sigma_t / sigma_s``."""
    if sigmas.size < 2:
        return 1.0
    running_min = np.minimum.accumulate(sigmas)
    return float(np.max(sigmas[1:] / running_min[:-1]))


def halving_count(sigmas: np.ndarray, critical: list[int]) -> tuple[int, bool]:
    """Smallest ``T`` such that every window holding ``T`` critical steps halves sigma.

    A window starting at arc ``s`` holds ``T`` critical steps once ``t``
    exceeds the ``T``-th critical step at or after ``s``.  When no count up to
    the total works the vacuous value (total + 1) is returned with ``False``.
    """
    n = sigmas.size
    crit = np.asarray(critical, dtype=np.int64)
    total = crit.size
    suffix_max = np.maximum.accumulate(sigmas[::-1])[::-1]
    first = np.searchsorted(crit, np.arange(n), side="left")
    for T in range(1, total + 1):
        ok = True
        for s in range(n - 1):
            j = first[s] + T - 1
            if j >= total:
                break
            t_min = crit[j] + 1
            if t_min < n and suffix_max[t_min] >= 0.5 * sigmas[s]:
                ok = False
                break
        if ok:
            return T, True
    return total + 1, False


def check_shortening(seq: AdmissibleSequence) -> ShorteningReport:
    sig = seq.sigmas
    if sig.size < 2:
        raise ValueError("sequence needs at least two arcs")
    T, found = halving_count(sig, seq.critical_positions)
    return ShorteningReport(max_growth_ratio(sig), T, found, len(seq.critical_positions), float(sig[-1] / sig[0]))


def critical_window_types(seq: AdmissibleSequence, j: int, t0: int | None = None) -> list[StepKind]:
    """Kinds of the critical steps ``n_j, ..., n_{j + 2 t0}``.

    A window with neither a type-(i) nor a type-(iii) step is appended to
    ``seq.findings``.
    """
    t0 = seq.t0 if t0 is None else t0
    pos = seq.critical_positions
    if j < 0 or j + 2 * t0 >= len(pos):
        raise IndexOutOfRange(f"window {j}..{j + 2 * t0} outside {len(pos)} critical steps")
    kinds = [seq.steps[pos[j + i]].kind for i in range(2 * t0 + 1)]
    if not any(k in (StepKind.CRIT_I, StepKind.CRIT_III) for k in kinds):
        seq.findings.append(f"critical window at j={j} has only type (ii) steps")
    return kinds


def arcs_gap(mu: InvariantMeasure, A: CircleArc, B: CircleArc) -> float:
    """sigma of the shorter complementary arc between A and B; 0 if they meet."""
    if A.contains_closed(B.a) or B.contains_closed(A.a):
        return 0.0
    return min(mu.sigma_between(A.b, B.a), mu.sigma_between(B.b, A.a))


def deviation(g: CircleMap, mu: InvariantMeasure, seq: AdmissibleSequence, n: int, k: int) -> float:
    """Gap between ``G^k(I_{n+k})`` and ``I_n`` in dynamical length."""
    arcs = seq.arcs
    if n < 0 or k < 0 or n + k >= len(arcs):
        raise IndexOutOfRange(f"n + k = {n + k} outside sequence of {len(arcs)} arcs")
    if k == 0:
        return 0.0
    pushed = arcs[n + k]
    # push the endpoints separately; arcs stay short so the image is (G^k a, G^k b)
    pushed = CircleArc(g.iterate(pushed.a, k), g.iterate(pushed.b, k))
    return arcs_gap(mu, pushed, arcs[n])
