"""Command-line entry point: ``metchar {extract,train,select,eval,synth}``.

Exit codes: 0 success, 2 config/validation error, 3 data error,
4 budget exhausted (partial result written), 5 every component pruned.
"""

import argparse
import json
import os
import sys

from . import report
from .clustering import kmeans
from .config import ConfigError, build_config, load_config, validate
from .dataset import DataError, SynthSpec, generate_synthetic, glyph_to_pixels, load_manifest
from .features import FEATURE_IDS, extract_features, stack_features
from .metrics import WeightedMetric
from .optimizer import MetCharConfig, metchar, score_pairs
from .pgm import write_pgm
from .selection import STRATEGIES, SelectionConfig, run_selection

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_BUDGET, EXIT_ALL_PRUNED = 0, 2, 3, 4, 5


def _read_synth_spec(path, seed=None):
    try:
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
        if seed is not None:
            d["seed"] = seed
        return SynthSpec.from_dict(d)
    except OSError as exc:
        raise ConfigError([f"{path}: cannot read synth spec: {exc.strerror}"]) from None
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError([f"{path}: invalid synth spec: {exc}"]) from None


def _load_glyphs(cfg):
    """Return (glyphs, S) from whichever training source is set."""
    if cfg.synth_spec:
        spec = _read_synth_spec(cfg.synth_spec)
        if cfg.size_given and cfg.size != spec.grid_size:
            raise ConfigError([f"size = {cfg.size} but synth spec grid_size = {spec.grid_size}"])
        return generate_synthetic(spec), spec.grid_size
    return load_manifest(cfg.manifest, cfg.size, normalize_glyphs=cfg.normalize), cfg.size


def _dataset(cfg):
    glyphs, size = _load_glyphs(cfg)
    labels = [g.label for g in glyphs]
    if len(set(labels)) < 2:
        raise DataError("training needs at least 2 distinct labels")
    return stack_features([extract_features(g) for g in glyphs]), labels, size


def _metchar_cfg(cfg):
    return MetCharConfig(epsilon=cfg.epsilon, iterations=cfg.iterations, seed=cfg.seed,
                         max_iter=cfg.max_iter)


def _out(cfg, name):
    return os.path.join(cfg.out, name)


def cmd_extract(cfg):
    glyphs, _ = _load_glyphs(cfg)
    lines = []
    for g in glyphs:
        fs = extract_features(g)
        row = {"label": g.label}
        row.update((f, [int(v) for v in getattr(fs, f)]) for f in FEATURE_IDS)
        lines.append(json.dumps(row, ensure_ascii=False))
    path = _out(cfg, "features.jsonl")
    report.write_atomic(path, "".join(line + "\n" for line in lines))
    print(f"wrote {len(lines)} feature sets to {path}")
    return EXIT_OK


def cmd_train(cfg):
    stacked, labels, size = _dataset(cfg)
    mcfg = _metchar_cfg(cfg)
    tm = metchar(cfg.components, stacked, labels, mcfg)
    d = report.trained_metric_dict(tm, size, mcfg, len(labels))
    report.write_atomic(_out(cfg, "metric.json"), report.dumps(d))
    table = report.trained_metric_table(tm)
    report.write_atomic(_out(cfg, "metric.txt"), table)
    print(table, end="")
    return EXIT_OK


def cmd_select(cfg):
    stacked, labels, size = _dataset(cfg)
    strategies = STRATEGIES if cfg.strategy == "all" else (cfg.strategy,)
    reports = []
    for strategy in strategies:
        scfg = SelectionConfig(
            strategy=strategy, theta=cfg.theta, budget=cfg.budget_secs,
            metchar=_metchar_cfg(cfg), min_combo_size=cfg.min_combo_size,
            max_combo_size=cfg.max_combo_size, workers=cfg.workers,
        )
        rep = run_selection(cfg.components, stacked, labels, scfg)
        suffix = "" if len(strategies) == 1 else f"_{strategy}"
        report.write_atomic(_out(cfg, f"selection{suffix}.json"),
                            report.dumps(report.selection_dict(rep, scfg, size, cfg.timings)))
        table = report.selection_table(rep, cfg.timings)
        report.write_atomic(_out(cfg, f"selection{suffix}.txt"), table)
        print(f"== {strategy}\n{table}")
        reports.append(rep)
    if len(reports) > 1:
        table = report.comparison_table(reports)
        report.write_atomic(_out(cfg, "comparison.txt"), table)
        print(table, end="")
    if any(r.budget_exhausted for r in reports):
        return EXIT_BUDGET
    if any(r.all_pruned for r in reports):
        return EXIT_ALL_PRUNED
    return EXIT_OK


def _read_metric(path):
    try:
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
    except OSError as exc:
        raise ConfigError([f"{path}: cannot read metric file: {exc.strerror}"]) from None
    except ValueError as exc:
        raise ConfigError([f"{path}: invalid JSON: {exc}"]) from None
    errors = []
    if d.get("schema") != report.SCHEMA or d.get("kind") != "trained_metric":
        errors.append(f"{path}: not a schema-{report.SCHEMA} trained_metric report")
    for key in ("components", "weights", "size", "seed"):
        if key not in d:
            errors.append(f"{path}: missing field {key!r}")
    if errors:
        raise ConfigError(errors)
    try:
        metric = WeightedMetric(tuple(d["components"]), tuple(d["weights"]))
    except ValueError as exc:
        raise ConfigError([f"{path}: {exc}"]) from None
    return d, metric


def cmd_eval(cfg, seed_override=None):
    if not cfg.metric:
        raise ConfigError(["eval needs a metric file ('metric' key or --metric)"])
    d, metric = _read_metric(cfg.metric)
    size = int(d["size"])
    if cfg.size_given and cfg.size != size:
        raise ConfigError([f"size = {cfg.size} but the metric was trained at size {size}"])
    src = [s for s in (cfg.test_manifest, cfg.test_synth_spec) if s]
    if len(src) != 1:
        raise ConfigError(["exactly one of 'test_manifest' or 'test_synth_spec' must be set"])
    if cfg.test_synth_spec:
        spec = _read_synth_spec(cfg.test_synth_spec)
        if spec.grid_size != size:
            raise ConfigError([f"test grid_size {spec.grid_size} differs from metric size {size}"])
        glyphs = generate_synthetic(spec)
    else:
        glyphs = load_manifest(cfg.test_manifest, size, normalize_glyphs=cfg.normalize)
    if len(glyphs) < 2:
        raise DataError("test set needs at least 2 samples")
    labels = [g.label for g in glyphs]
    k = len(set(labels))
    seed = int(d["seed"]) if seed_override is None else seed_override
    result = kmeans([extract_features(g) for g in glyphs], k, metric, seed=seed,
                    max_iter=int(d.get("max_iter", cfg.max_iter)))
    conf = score_pairs(labels, result.assignments)
    out = report.eval_dict(d, conf, len(labels), k, seed)
    report.write_atomic(_out(cfg, "eval.json"), report.dumps(out))
    print(f"accuracy {conf.accuracy:.4f}  tp={conf.tp} tn={conf.tn} fp={conf.fp} fn={conf.fn}")
    return EXIT_OK


def cmd_synth(cfg, seed_override=None):
    if not cfg.synth_spec:
        raise ConfigError(["synth needs a synth spec ('synth_spec' key or --spec)"])
    spec = _read_synth_spec(cfg.synth_spec, seed_override)
    glyphs = generate_synthetic(spec)
    os.makedirs(cfg.out, exist_ok=True)
    width = max(5, len(str(len(glyphs) - 1)))
    lines = [f"# synthetic glyphs: k={spec.k} m={spec.samples_per_class} "
             f"S={spec.grid_size} jitter={spec.jitter} seed={spec.seed}"]
    for i, g in enumerate(glyphs):
        name = f"glyph_{i:0{width}d}.pgm"
        write_pgm(os.path.join(cfg.out, name), glyph_to_pixels(g))
        lines.append(f"{name}\t{g.label}")
    report.write_atomic(_out(cfg, "manifest.tsv"), "\n".join(lines) + "\n")
    print(f"wrote {len(glyphs)} glyphs to {cfg.out}")
    return EXIT_OK


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value run configuration")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--out", help="output directory")
    common.add_argument("--budget-secs", type=float, help="wall-clock budget for selection")
    common.add_argument("--workers", type=int, help="parallel trial workers")

    p = argparse.ArgumentParser(prog="metchar", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    ex = sub.add_parser("extract", parents=[common], help="dump feature vectors as JSON lines")
    ex.add_argument("--manifest")
    ex.add_argument("--size", type=int)
    sub.add_parser("train", parents=[common], help="learn weights for a fixed component list")
    sel = sub.add_parser("select", parents=[common], help="search component subsets")
    sel.add_argument("--strategy", choices=STRATEGIES + ("all",))
    sel.add_argument("--theta", type=float)
    sel.add_argument("--timings", action="store_true", help="record per-trial wall time")
    ev = sub.add_parser("eval", parents=[common], help="score a trained metric on a test set")
    ev.add_argument("--metric")
    ev.add_argument("--test-manifest")
    sy = sub.add_parser("synth", parents=[common], help="write a synthetic PGM dataset")
    sy.add_argument("--spec")
    return p


def _resolve(args):
    if args.config:
        cfg, errors = load_config(args.config)
    else:
        cfg, errors = build_config({})
    overrides = {
        "seed": args.seed, "out": args.out, "budget_secs": args.budget_secs,
        "workers": args.workers,
        "manifest": getattr(args, "manifest", None), "size": getattr(args, "size", None),
        "strategy": getattr(args, "strategy", None), "theta": getattr(args, "theta", None),
        "metric": getattr(args, "metric", None),
        "test_manifest": getattr(args, "test_manifest", None),
        "synth_spec": getattr(args, "spec", None),
    }
    for key, val in overrides.items():
        if val is not None:
            setattr(cfg, key, val)
            if key == "manifest":
                cfg.synth_spec = None
            if key == "test_manifest":
                cfg.test_synth_spec = None
            if key == "size":
                cfg.size_given = True
    if getattr(args, "timings", False):
        cfg.timings = True
    return cfg, errors


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        cfg, errors = _resolve(args)
        cmd = args.command
        if cmd == "synth":
            errors = validate(cfg, need_dataset=False, errors=errors)
        elif cmd == "eval":
            errors = validate(cfg, need_dataset=False, errors=errors)
        else:
            errors = validate(cfg, need_strategy=cmd == "select", errors=errors)
            if cmd == "select" and cfg.strategy == "all":
                errors = [e for e in errors if not e.startswith("strategy must")]
        if errors:
            raise ConfigError(errors)
        if cmd == "extract":
            return cmd_extract(cfg)
        if cmd == "train":
            return cmd_train(cfg)
        if cmd == "select":
            return cmd_select(cfg)
        if cmd == "eval":
            return cmd_eval(cfg, args.seed)
        return cmd_synth(cfg, args.seed)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
