"""Flat ``key = value`` run configuration.

Example::

    # train on a manifest
    manifest = data/train.tsv
    size = 64
    components = hbv_md, vlv_md, dfv_ed
    epsilon = 1e-5
    iterations = 20
    seed = 7
    out = runs/a

Relative paths resolve against the config file's directory.
"""

import os
from dataclasses import dataclass, field

from .dataset import DEFAULT_SIZE
from .metrics import DEFAULT_COMPONENTS, ComponentId
from .selection import STRATEGIES


class ConfigError(Exception):
    """Collects every validation problem found in one pass."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


PATH_KEYS = ("manifest", "synth_spec", "test_manifest", "test_synth_spec", "metric", "out")
KNOWN_KEYS = PATH_KEYS + (
    "size", "normalize", "components", "strategy", "theta", "budget_secs",
    "min_combo_size", "max_combo_size", "epsilon", "iterations", "seed",
    "max_iter", "workers", "timings",
)


@dataclass
class RunConfig:
    manifest: str = None
    synth_spec: str = None
    test_manifest: str = None
    test_synth_spec: str = None
    metric: str = None
    size: int = DEFAULT_SIZE
    normalize: bool = True
    components: list = field(default_factory=lambda: list(DEFAULT_COMPONENTS))
    strategy: str = "hybrid"
    theta: float = 0.55
    budget_secs: float = None
    min_combo_size: int = 2
    max_combo_size: int = None
    epsilon: float = 1e-5
    iterations: int = 20
    seed: int = 0
    max_iter: int = 100
    workers: int = 1
    timings: bool = False
    out: str = "out"
    size_given: bool = False


def parse_kv(text, source="<config>"):
    values = {}
    errors = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            errors.append(f"{source}:{lineno}: expected 'key = value'")
        elif key not in KNOWN_KEYS:
            errors.append(f"{source}:{lineno}: unknown key {key!r}")
        elif key in values:
            errors.append(f"{source}:{lineno}: duplicate key {key!r}")
        else:
            values[key] = value
    return values, errors


def _to_bool(v):
    low = v.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


_CASTS = {
    "size": int, "normalize": _to_bool, "theta": float, "budget_secs": float,
    "min_combo_size": int, "max_combo_size": int, "epsilon": float,
    "iterations": int, "seed": int, "max_iter": int, "workers": int, "timings": _to_bool,
}


def build_config(values, base_dir=".", errors=None):
    errors = list(errors or [])
    cfg = RunConfig()
    for key, raw in values.items():
        if key in PATH_KEYS:
            setattr(cfg, key, os.path.normpath(os.path.join(base_dir, raw)) if raw else None)
        elif key == "strategy":
            cfg.strategy = raw
        elif key == "components":
            comps = []
            for name in filter(None, (x.strip() for x in raw.split(","))):
                try:
                    comps.append(ComponentId.parse(name))
                except ValueError as exc:
                    errors.append(f"components: {exc}")
            cfg.components = comps
        else:
            try:
                setattr(cfg, key, _CASTS[key](raw) if raw != "" else None)
            except ValueError:
                errors.append(f"{key}: cannot parse {raw!r}")
    cfg.size_given = "size" in values
    return cfg, errors


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError([f"{path}: cannot read config: {exc.strerror}"]) from None
    values, errors = parse_kv(text, path)
    return build_config(values, os.path.dirname(os.path.abspath(path)), errors)


def validate(cfg, need_dataset=True, need_strategy=False, errors=()):
    """Return the list of problems with `cfg` (empty when valid)."""
    errors = list(errors)
    if need_dataset:
        sources = [s for s in (cfg.manifest, cfg.synth_spec) if s]
        if len(sources) != 1:
            errors.append("exactly one of 'manifest' or 'synth_spec' must be set")
        for s in sources:
            if not os.path.isfile(s):
                errors.append(f"dataset file not found: {s}")
    if cfg.size is None or cfg.size < 1:
        errors.append("size must be a positive integer")
    if not cfg.components:
        errors.append("components must name at least one component")
    elif len(set(cfg.components)) != len(cfg.components):
        errors.append("components contains duplicates")
    if cfg.epsilon is None or not cfg.epsilon > 0:
        errors.append("epsilon must be > 0")
    if cfg.iterations is None or cfg.iterations < 1:
        errors.append("iterations must be >= 1")
    if cfg.max_iter is None or cfg.max_iter < 1:
        errors.append("max_iter must be >= 1")
    if cfg.seed is None or not 0 <= cfg.seed < 2**64:
        errors.append("seed must be an unsigned 64-bit integer")
    if cfg.workers is None or cfg.workers < 1:
        errors.append("workers must be >= 1")
    if need_strategy:
        if cfg.strategy not in STRATEGIES:
            errors.append(f"strategy must be one of {', '.join(STRATEGIES)}")
        if cfg.theta is None or not 0.0 <= cfg.theta <= 1.0:
            errors.append("theta must lie in [0, 1]")
        if cfg.budget_secs is not None and not cfg.budget_secs > 0:
            errors.append("budget_secs must be > 0")
        if cfg.min_combo_size is None or cfg.min_combo_size < 2:
            errors.append("min_combo_size must be >= 2")
        if cfg.max_combo_size is not None and cfg.min_combo_size is not None \
                and cfg.max_combo_size < cfg.min_combo_size:
            errors.append("max_combo_size must be >= min_combo_size")
    return errors
