"""Batch driver: ``siegel-lab <subcommand> --config <path> [--out <dir>] [--seed <u64>]``.

Every run writes ``report.json`` (config echo, versions, tolerances, results
and pass flags) plus side files into the output directory.  Exit codes: 0
pass, 1 a checked property failed, 2 usage or config error, 3 numerical
failure.
"""
from __future__ import annotations

import argparse
import json
import math
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .admissible import check_shortening, critical_window_types, generate
from .circle_dynamics import (
    CircleArc,
    CircleMap,
    InvariantMeasure,
    arc_with_sigma,
    random_arcs,
    return_stats,
    return_triple,
    rotation_number,
    tune_to_rotation,
    write_rows_csv,
)
from .config import ExperimentConfig, load_config
from .errors import ConfigError, IndexOutOfRange, SiegelLabError
from .hypgeo import dist_to_arc, half_nbhd_boundary, sandwich_check

SCHEMA_VERSION = 1
RESIDUAL_TOL = 1e-9
HALFNBHD_TOL = 1e-6
BOUNDED_PIXELS = 0.99

SUBCOMMANDS = ("tune", "sigma", "returns", "sequence", "halfnbhd", "shrink", "equipotential", "census", "render")


def _clean(x):
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats as strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def _versions() -> dict:
    import numba
    import scipy

    return {
        "siegel_lab": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "numba": numba.__version__,
    }


def circle_map(cfg: ExperimentConfig) -> CircleMap:
    alpha = cfg.rotation()
    if cfg.map == "rigid":
        return CircleMap.rigid(alpha)
    if cfg.map == "blaschke":
        if math.isnan(cfg.t):
            return tune_to_rotation(alpha, cfg.tune_tol)
        return CircleMap.blaschke(cfg.t)
    raise ConfigError("this subcommand needs map = rigid or blaschke")


# --------------------------------------------------------------------------
# subcommands; each returns (results, pass flags, tolerances)


def run_tune(cfg: ExperimentConfig, out: Path):
    if cfg.map != "blaschke":
        raise ConfigError("tune needs map = blaschke")
    alpha = cfg.rotation()
    g = tune_to_rotation(alpha, cfg.tune_tol)
    n = max(cfg.orbit, int(4 / cfg.tune_tol))
    rho, err = rotation_number(g, n)
    res = {"t": g.parameter, "rotation_number": rho, "error_bound": err, "target": alpha.value, "orbit": n}
    return res, {"rotation": abs(rho - alpha.value) <= cfg.tune_tol}, {"tune_tol": cfg.tune_tol}


def run_sigma(cfg: ExperimentConfig, out: Path):
    g = circle_map(cfg)
    mu = InvariantMeasure.build(g, cfg.orbit)
    rng = np.random.default_rng(cfg.seed or 0)
    rows = []
    for arc in random_arcs(rng, cfg.arcs, cfg.min_arc, cfg.max_arc):
        s = mu.sigma(arc)
        rows.append((arc.a, arc.b, arc.length, s, mu.sigma(g.image_arc(arc))))
    write_rows_csv(out / "sigma.csv", ["a", "b", "length", "sigma", "sigma_image"], rows)
    arr = np.array(rows)
    dev_len = float(np.max(np.abs(arr[:, 3] - arr[:, 2])))
    dev_inv = float(np.max(np.abs(arr[:, 4] - arr[:, 3])))
    inv_tol = 4 * math.pi / cfg.orbit
    flags = {"invariance": dev_inv <= inv_tol}
    if cfg.map == "rigid":
        flags["length"] = dev_len <= 1e-3
    res = {"map": g.to_dict(), "arcs": cfg.arcs, "max_length_deviation": dev_len, "max_invariance_deviation": dev_inv}
    return res, flags, {"invariance_tol": inv_tol, "length_tol": 1e-3, "orbit": cfg.orbit}


def return_measurements(g: CircleMap, mu: InvariantMeasure, count: int, min_arc: float, max_arc: float, samples: int, cap: int, seed: int):
    """Rows ``(a, b, n, N, N/n, triple ratio)`` over random arcs with a random start point each."""
    rng = np.random.default_rng(seed)
    rows = []
    for arc in random_arcs(rng, count, min_arc, max_arc):
        st = return_stats(g, arc, samples, cap)
        x = arc.a + arc.length * rng.uniform(0.01, 0.99)
        tr = return_triple(g, arc, x, mu, cap)
        rows.append((arc.a, arc.b, st.min_return, st.max_return, st.ratio, tr.ratio))
    return rows


def run_returns(cfg: ExperimentConfig, out: Path):
    g = circle_map(cfg)
    mu = InvariantMeasure.build(g, cfg.orbit)
    rows = return_measurements(g, mu, cfg.arcs, cfg.min_arc, cfg.max_arc, cfg.return_samples, cfg.return_cap, cfg.seed or 0)
    write_rows_csv(out / "returns.csv", ["a", "b", "n", "N", "ratio", "triple_ratio"], rows)
    arr = np.array(rows)
    res = {
        "arcs": len(rows),
        "max_return_ratio": float(arr[:, 4].max()),
        "triple_ratio_min": float(arr[:, 5].min()),
        "triple_ratio_max": float(arr[:, 5].max()),
    }
    flags = {
        "return_ratio": res["max_return_ratio"] <= cfg.return_ratio_bound,
        "triple_window": cfg.triple_low <= res["triple_ratio_min"] and res["triple_ratio_max"] <= cfg.triple_high,
    }
    tol = {"return_ratio_bound": cfg.return_ratio_bound, "triple_window": [cfg.triple_low, cfg.triple_high], "cap": cfg.return_cap}
    return res, flags, tol


def initial_arc(mu: InvariantMeasure, cfg: ExperimentConfig) -> CircleArc:
    return arc_with_sigma(mu, cfg.initial_centre, "right", cfg.initial_sigma)


def run_sequence(cfg: ExperimentConfig, out: Path):
    g = circle_map(cfg)
    mu = InvariantMeasure.build(g, cfg.orbit)
    p = cfg.admissible_params()
    I0 = initial_arc(mu, cfg)
    runs = []
    for k in range(cfg.seeds):
        seed = (cfg.seed or 0) + k
        seq = generate(g, mu, I0, p, cfg.depth, cfg.policy if cfg.policy != "all" else "random", seed)
        rep = check_shortening(seq)
        windows = 0
        j = 0
        while True:
            try:
                critical_window_types(seq, j)
            except IndexOutOfRange:
                break
            windows += 1
            j += 1
        seq.to_json(out / f"sequence_{seed}.json")
        seq.sigma_csv(out / f"sigma_{seed}.csv")
        runs.append({
            "seed": seed,
            "steps": len(seq.steps),
            "max_ratio": rep.max_ratio,
            "final_ratio": rep.final_ratio,
            "critical_steps": rep.critical_steps,
            "halving_count": rep.halving_count,
            "halving_found": rep.halving_found,
            "windows_checked": windows,
            "findings": list(seq.findings),
        })
    flags = {
        "shortening": all(r["max_ratio"] < 2.0 for r in runs),
        "contraction": all(r["final_ratio"] < 0.2 for r in runs),
        "complete": all(r["steps"] == cfg.depth for r in runs),
    }
    res = {"initial": I0.to_dict(), "initial_sigma": mu.sigma(I0), "runs": runs}
    tol = {"sigma_resolution": mu.resolution, "shortening_bound": 2.0, "contraction_target": 0.2}
    return res, flags, tol


def run_halfnbhd(cfg: ExperimentConfig, out: Path):
    arc = CircleArc.centered(cfg.arc_centre, cfg.arc_length)
    bd = half_nbhd_boundary(arc, cfg.d, cfg.samples)
    bd.to_csv(out / "halfnbhd.csv")
    err = float(np.max(np.abs(dist_to_arc(arc, bd.outer[1:-1]) - cfg.d)))
    sw = sandwich_check(arc, cfg.d, cfg.r_prime, cfg.samples)
    res = {
        "arc": arc.to_dict(),
        "beta": sw.beta,
        "boundary_distance_error": err,
        "sandwich": {"d_prime": sw.d_prime, "beta_hat": sw.beta_hat, "constant": sw.constant, "sector_gap": sw.sector_gap,
                     "boundary_max_dist": sw.boundary_max_dist},
    }
    return res, {"boundary_distance": err <= HALFNBHD_TOL, "sandwich": sw.passed}, {"distance_tol": HALFNBHD_TOL}


def _quadratic(cfg: ExperimentConfig):
    from .pullback.siegel import QuadSiegel

    return QuadSiegel(cfg.rotation())


def run_shrink(cfg: ExperimentConfig, out: Path):
    from .pullback.siegel import siegel_boundary
    from .pullback.tree import check_seed, max_diam_profile, pullback_tree, touching_disk

    f = _quadratic(cfg)
    bd = siegel_boundary(f, cfg.boundary_points)
    v0, centre, radius = touching_disk(bd, cfg.phase, cfg.seed_diameter)
    hyp = check_seed(v0, bd)
    policy = "all" if cfg.policy == "all" else "random"
    tree = pullback_tree(f, v0, cfg.tree_depth, policy, cfg.seed, bd, resolution=cfg.resolution, keep_curves=False)
    prof = max_diam_profile(tree)
    tree.profile_csv(out / "profile.csv")
    tree.to_json(out / "tree.json")
    v0.to_csv(out / "seed_curve.csv")
    residual = max(v.residual for v in tree.nodes)
    flags = {"hypotheses": hyp.passed, "residual": residual <= RESIDUAL_TOL}
    if cfg.tree_depth >= 5:
        flags["below_depth5"] = prof[-1] < prof[5]
        flags["below_target"] = prof[-1] < cfg.shrink_target
    res = {
        "seed_disk": {"centre": centre, "radius": radius, "chordal_diam": prof[0]},
        "hypotheses": hyp.to_dict(),
        "profile": prof,
        "level_sizes": tree.level_sizes(),
        "max_residual": residual,
        "findings": tree.findings,
    }
    return res, flags, {"touch_tol": hyp.tolerance, "residual_tol": RESIDUAL_TOL, "shrink_target": cfg.shrink_target}


def run_equipotential(cfg: ExperimentConfig, out: Path):
    from .pullback.basin import Equipotentials, non_increasing_within

    f = _quadratic(cfg)
    eq = Equipotentials.build(f, cfg.levels + 1, cfg.base_radius, cfg.grid)
    prof = eq.cauchy_profile(cfg.levels, cfg.angles)
    residual = max(eq.residual(n) for n in range(1, cfg.levels + 2))
    write_rows_csv(out / "cauchy.csv", ["n", "sup_gap"], list(enumerate(prof)))
    flags = {
        "non_increasing": non_increasing_within(prof[2:], cfg.noise),
        "converged": prof[-1] < 1e-2,
        "residual": residual <= RESIDUAL_TOL,
        "simple": eq.is_simple(cfg.levels),
    }
    return {"sup_gaps": prof, "max_residual": residual}, flags, {"noise": cfg.noise, "residual_tol": RESIDUAL_TOL, "final_gap": 1e-2}


def run_census(cfg: ExperimentConfig, out: Path):
    from .pullback.census import fatou_census
    from .pullback.siegel import siegel_boundary

    f = _quadratic(cfg)
    bd = siegel_boundary(f, cfg.boundary_points)
    rep = fatou_census(f, cfg.census_depth, cfg.epsilon, bd, cfg.resolution)
    write_rows_csv(out / "census.csv", ["depth", "large", "components", "max_diam"],
                   list(zip(range(rep.depth + 1), rep.counts, rep.components, rep.max_diam)))
    flags = {"reaches_zero": rep.first_zero is not None and rep.first_zero <= cfg.census_depth}
    return rep.to_dict(), flags, {"epsilon": cfg.epsilon}


def run_render(cfg: ExperimentConfig, out: Path):
    from . import render
    from .pullback.curves import pullback_curve
    from .pullback.siegel import siegel_boundary
    from .pullback.tree import touching_disk

    f = _quadratic(cfg)
    counts, dist = render.escape_data(f.lam, cfg.view, cfg.width, cfg.height, cfg.iterations)
    filled = render.filled_mask(counts, dist, cfg.iterations, cfg.view)
    img = render.shade(counts, cfg.iterations, filled)
    bd = siegel_boundary(f, cfg.boundary_points)
    frac = render.bounded_fraction(filled, bd.points, cfg.view)
    v0, _, _ = touching_disk(bd, cfg.phase, cfg.seed_diameter)
    level = [v0]
    render.draw_polyline(img, v0.vertices, cfg.view, render.COMPONENT)
    for _ in range(cfg.overlay_depth):
        level = [c.curve for v in level for c in pullback_curve(f, v, resolution=cfg.resolution)]
        for v in level:
            render.draw_polyline(img, v.vertices, cfg.view, render.COMPONENT)
    render.draw_points(img, bd.points, cfg.view, render.ORBIT)
    ext = cfg.image_format
    julia = render.write_image(out / f"julia.{ext}", img, ext)
    arc = CircleArc.centered(cfg.arc_centre, cfg.arc_length)
    side = render.half_nbhd_image(arc, cfg.d, [-1.6, 1.6, -1.6, 1.6], min(cfg.width, 512), min(cfg.height, 512))
    hd = render.write_image(out / f"halfnbhd.{ext}", side, ext)
    res = {"bounded_orbit_pixels": frac, "images": [Path(julia).name, Path(hd).name], "overlay_components": len(level)}
    return res, {"orbit_on_bounded": frac >= BOUNDED_PIXELS}, {"bounded_fraction": BOUNDED_PIXELS, "iterations": cfg.iterations}


RUNNERS = {
    "tune": run_tune,
    "sigma": run_sigma,
    "returns": run_returns,
    "sequence": run_sequence,
    "halfnbhd": run_halfnbhd,
    "shrink": run_shrink,
    "equipotential": run_equipotential,
    "census": run_census,
    "render": run_render,
}


def run(subcommand: str, cfg: ExperimentConfig) -> tuple[int, dict]:
    """Run one subcommand; returns the exit status and the report written to ``cfg.out``."""
    out = Path(cfg.out)
    try:
        if subcommand not in RUNNERS:
            raise ConfigError(f"unknown subcommand {subcommand!r}")
        cfg.validate(subcommand)
        out.mkdir(parents=True, exist_ok=True)
        results, flags, tol = RUNNERS[subcommand](cfg, out)
    except (ConfigError, SiegelLabError, ValueError) as exc:
        if not isinstance(exc, (ConfigError, SiegelLabError)):
            exc = ConfigError(f"{type(exc).__name__}: {exc}")
        report = {
            "schema_version": SCHEMA_VERSION,
            "subcommand": subcommand,
            "status": "error",
            "error": {"kind": exc.kind, "message": str(exc), "exit_code": exc.exit_code},
            "config": cfg.to_dict(),
            "versions": _versions(),
        }
        report = _clean(report)
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "report.json").write_text(json.dumps(report, indent=1, sort_keys=True))
        except OSError:
            pass
        return exc.exit_code, report
    ok = all(flags.values())
    report = _clean({
        "schema_version": SCHEMA_VERSION,
        "subcommand": subcommand,
        "status": "pass" if ok else "fail",
        "config": cfg.to_dict(),
        "versions": _versions(),
        "tolerances": tol,
        "pass": flags,
        "results": results,
    })
    (out / "report.json").write_text(json.dumps(report, indent=1, sort_keys=True))
    return (0 if ok else 1), report


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="siegel-lab", description=__doc__.splitlines()[0])
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("--out", help="output directory (overrides the config)")
    parser.add_argument("--seed", type=int, help="random seed (overrides the config)")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
    except ConfigError as exc:
        print(json.dumps({"schema_version": SCHEMA_VERSION, "status": "error",
                          "error": {"kind": exc.kind, "message": str(exc), "exit_code": exc.exit_code}}))
        return exc.exit_code
    if args.out:
        cfg.out = args.out
    if args.seed is not None:
        if args.seed < 0 or args.seed >= 2**64:
            print(json.dumps({"schema_version": SCHEMA_VERSION, "status": "error",
                              "error": {"kind": ConfigError.kind, "message": "seed must be a u64", "exit_code": 2}}))
            return 2
        cfg.seed = args.seed
    code, report = run(args.subcommand, cfg)
    summary = {"subcommand": args.subcommand, "status": report["status"], "out": str(Path(cfg.out) / "report.json")}
    if "pass" in report:
        summary["pass"] = report["pass"]
    if "error" in report:
        summary["error"] = report["error"]
    print(json.dumps(summary, sort_keys=True))
    return code


if __name__ == "__main__":
    sys.exit(main())
