"""Run every example config in scripts/configs through the CLI and tabulate the outcome.

    python3 scripts/run_experiments.py [--out runs] [--only shrink census]

Each config ``<name>.cfg`` is run with the subcommand named by the part of
``<name>`` before the first underscore, writing into ``<out>/<name>/``.
"""
from __future__ import annotations

import argparse
import json
import time
from pathlib import Path

from siegel_lab.cli import run
from siegel_lab.config import load_config

CONFIGS = Path(__file__).resolve().parent / "configs"


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs", help="directory for per-config output")
    ap.add_argument("--only", nargs="*", help="config names to run (default: all)")
    args = ap.parse_args()
    worst = 0
    for path in sorted(CONFIGS.glob("*.cfg")):
        name = path.stem
        if args.only and name not in args.only:
            continue
        cfg = load_config(path)
        cfg.out = str(Path(args.out) / name)
        t0 = time.perf_counter()
        code, report = run(name.split("_")[0], cfg)
        flags = report.get("pass", report.get("error"))
        print(f"{name:16s} exit {code}  {time.perf_counter() - t0:7.1f} s  {json.dumps(flags, sort_keys=True)}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    raise SystemExit(main())
