"""Run configuration: flat ``key = value`` files, CLI overrides, defaults.

Unknown keys are rejected.  The SDFOREST_THREADS environment variable caps
worker counts package-wide (0 or unset = auto).
"""

import os
from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    sampler_stride: int = 10
    forest_trees: int = 20
    forest_max_depth: int = 20
    linear_l2: float = 1e-4
    linear_tol: float = 1e-6
    linear_max_iters: int = 200
    ensemble_forest_weight: float = 0.8
    threshold: float = 0.5
    tracker_scale: float = 2.0
    slic_k: int = 400
    slic_compactness: float = 10.0
    slic_iters: int = 10
    pooling_blend: float = 0.5
    igf_radius: int = 8
    igf_eps: float = 1e-3

    def __post_init__(self):
        if not 0.0 <= self.ensemble_forest_weight <= 1.0:
            raise ValueError("ensemble.forest_weight must lie in [0, 1]")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")
        if not 0.0 <= self.pooling_blend <= 1.0:
            raise ValueError("pooling.blend must lie in [0, 1]")
        if self.igf_radius < 1:
            raise ValueError("igf.radius must be >= 1")
        if self.igf_eps < 0:
            raise ValueError("igf.eps must be >= 0")
        if self.tracker_scale <= 0:
            raise ValueError("tracker.scale must be positive")


CONFIG_KEYS = {
    "seed": ("seed", int),
    "sampler.stride": ("sampler_stride", int),
    "forest.trees": ("forest_trees", int),
    "forest.max_depth": ("forest_max_depth", int),
    "linear.l2": ("linear_l2", float),
    "linear.tol": ("linear_tol", float),
    "linear.max_iters": ("linear_max_iters", int),
    "ensemble.forest_weight": ("ensemble_forest_weight", float),
    "threshold": ("threshold", float),
    "tracker.scale": ("tracker_scale", float),
    "slic.k": ("slic_k", int),
    "slic.compactness": ("slic_compactness", float),
    "slic.iters": ("slic_iters", int),
    "pooling.blend": ("pooling_blend", float),
    "igf.radius": ("igf_radius", int),
    "igf.eps": ("igf_eps", float),
}

_FIELD_TO_KEY = {field: key for key, (field, _) in CONFIG_KEYS.items()}


def apply_overrides(config: RunConfig, overrides: dict) -> RunConfig:
    """Return a config with string key/value overrides applied."""
    updates = {}
    for key, raw in overrides.items():
        if key not in CONFIG_KEYS:
            raise ValueError(f"unknown config key: {key!r}")
        field, cast = CONFIG_KEYS[key]
        try:
            updates[field] = cast(raw)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"bad value for {key!r}: {raw!r}") from exc
    return replace(config, **updates)


def load_config(path, base: RunConfig | None = None) -> RunConfig:
    """Parse a flat ``key = value`` file ('#' comments and blank lines allowed)."""
    overrides = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, value = line.split("=", 1)
            overrides[key.strip()] = value.strip()
    return apply_overrides(base if base is not None else RunConfig(), overrides)


def config_to_text(config: RunConfig) -> str:
    lines = [f"{_FIELD_TO_KEY[f.name]} = {getattr(config, f.name)}" for f in fields(config)]
    return "\n".join(lines) + "\n"


def thread_count(requested=None) -> int:
    """Worker count: explicit request, capped by SDFOREST_THREADS (0 = auto)."""
    cap = os.environ.get("SDFOREST_THREADS", "0")
    try:
        cap = int(cap)
    except ValueError:
        cap = 0
    if cap <= 0:
        cap = os.cpu_count() or 1
    if requested is None or requested <= 0:
        return cap
    return min(int(requested), cap)
