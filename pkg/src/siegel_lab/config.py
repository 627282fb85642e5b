"""Flat ``key = value`` experiment configuration.

One setting per line, ``#`` starts a comment.  Values are parsed against the
type of the field's default; lists are comma separated.  Example::

    experiment = shrink
    alpha = golden
    depth = 25
    policy = random
    seed = 7
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

from .admissible import AdmissibleParams
from .errors import ConfigError
from .rotation import RotationNumber, cf_expand

MAPS = ("blaschke", "rigid", "quadratic")


@dataclass
class ExperimentConfig:
    experiment: str = "run"
    map: str = "blaschke"
    # rotation number: "golden", "silver", a list of partial quotients, or a float
    alpha: str = "golden"
    t: float = math.nan  # Blaschke parameter; tuned from alpha when unset
    tune_tol: float = 1e-5

    # circle dynamics
    orbit: int = 10**6
    arcs: int = 100
    min_arc: float = 1e-3
    max_arc: float = 0.5
    return_samples: int = 100
    return_cap: int = 10**7
    return_ratio_bound: float = math.inf
    triple_low: float = 0.0
    triple_high: float = math.inf

    # admissible sequences
    delta: float = 0.01
    eta: float = 0.2
    d: float = 3.0
    r0p: float = 0.25
    r1: float = 0.1
    r2: float = 0.05
    r3: float = 0.0125
    depth: int = 2000
    policy: str = "random"
    seed: int | None = None
    seeds: int = 1
    initial_sigma: float = 0.01
    initial_centre: float = 1.0

    # half neighbourhoods
    arc_centre: float = 0.0
    arc_length: float = 0.1
    samples: int = 256
    r_prime: float = 2.0

    # pull-backs
    tree_depth: int = 25
    boundary_points: int = 10**5
    phase: float = 0.25
    seed_diameter: float = 0.2
    shrink_target: float = 0.05
    resolution: int = 256
    beta: float = math.pi / 8
    probe_radius: float = 0.01

    # basin of infinity
    base_radius: float = 4.0
    grid: int = 2**16
    angles: int = 512
    levels: int = 15
    census_depth: int = 20
    epsilon: float = 0.1
    noise: float = 0.1

    # rendering
    width: int = 1024
    height: int = 1024
    iterations: int = 2000
    view: list[float] = field(default_factory=lambda: [-1.25, 1.95, -1.25, 1.95])
    overlay_depth: int = 3
    image_format: str = "ppm"

    out: str = "out"

    # ------------------------------------------------------------------
    def rotation(self) -> RotationNumber:
        a = self.alpha.strip().lower()
        if a == "golden":
            return RotationNumber.golden()
        if a == "silver":
            return RotationNumber.silver()
        try:
            if "," in a or a.startswith("["):
                q = [int(x) for x in a.strip("[]").split(",") if x.strip()]
                return RotationNumber.from_quotients(q)
            return cf_expand(float(a))
        except (ValueError, ArithmeticError) as exc:
            raise ConfigError(f"alpha: cannot read {self.alpha!r} ({exc})") from exc

    def admissible_params(self) -> AdmissibleParams:
        try:
            return AdmissibleParams(self.delta, self.eta, self.d, self.r0p, self.r1, self.r2, self.r3)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def validate(self, subcommand: str | None = None) -> "ExperimentConfig":
        if self.map not in MAPS:
            raise ConfigError(f"map must be one of {MAPS}")
        self.rotation()
        self.admissible_params()
        if self.policy not in ("random", "first-branch", "exhaustive", "all"):
            raise ConfigError(f"unknown policy {self.policy!r}")
        if self.policy == "random" and self.seed is None and subcommand in ("sequence", "shrink"):
            raise ConfigError("a random policy needs a seed")
        for name in ("orbit", "arcs", "samples", "resolution", "grid", "angles", "width", "height", "iterations"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        if min(self.depth, self.levels, self.tree_depth, self.census_depth, self.overlay_depth) < 0:
            raise ConfigError("depths must be >= 0")
        if self.base_radius < 4.0:
            raise ConfigError("base_radius must be at least 4")
        if not (0.0 < self.seed_diameter < 2.0):
            raise ConfigError("seed_diameter must lie in (0, 2)")
        if len(self.view) != 4 or self.view[0] >= self.view[1] or self.view[2] >= self.view[3]:
            raise ConfigError("view must be xmin, xmax, ymin, ymax")
        if self.image_format not in ("ppm", "png"):
            raise ConfigError("image_format must be ppm or png")
        return self

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        for k, v in out.items():
            if isinstance(v, float) and not math.isfinite(v):
                out[k] = str(v)
        return out


def _coerce(name: str, raw: str, default):
    raw = raw.strip()
    try:
        if isinstance(default, bool):
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if isinstance(default, int) or name == "seed":
            if raw.lower() in ("none", ""):
                return None
            v = float(raw) if ("e" in raw.lower() or "." in raw) else int(raw)
            if isinstance(v, float):
                if not v.is_integer():
                    raise ValueError(raw)
                v = int(v)
            return v
        if isinstance(default, float):
            low = raw.lower()
            if low in ("pi", "pi/8", "pi/4", "pi/2"):
                return {"pi": math.pi, "pi/8": math.pi / 8, "pi/4": math.pi / 4, "pi/2": math.pi / 2}[low]
            return float(raw)
        if isinstance(default, list):
            return [float(x) for x in raw.strip("[]").split(",") if x.strip()]
        return raw
    except ValueError as exc:
        raise ConfigError(f"{name}: cannot read {raw!r}") from exc


def parse_config(text: str) -> ExperimentConfig:
    """Parse configuration text; unknown keys and malformed lines are errors."""
    cfg = ExperimentConfig()
    defaults = {f.name: getattr(cfg, f.name) for f in dataclasses.fields(cfg)}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in defaults:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        setattr(cfg, key, _coerce(key, value, defaults[key]))
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
