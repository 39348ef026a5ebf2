"""JSON and text renderings of training, selection and evaluation results."""

import json
import os
import tempfile

SCHEMA = 1


def dumps(obj):
    return json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def write_atomic(path, text):
    """Write `text` to `path` via a temp file in the same directory and rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_table(headers, rows):
    widths = [len(h) for h in headers]
    for row in rows:
        widths = [max(w, len(cell)) for w, cell in zip(widths, row)]
    def line(cells):
        return " | ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    rule = "-+-".join("-" * w for w in widths)
    return "\n".join([line(headers), rule] + [line(r) for r in rows]) + "\n"


def _weights(ws):
    return "[" + ", ".join(f"{w:.4g}" for w in ws) + "]"


def _names(comps):
    return "[" + ", ".join(c.name if hasattr(c, "name") else str(c) for c in comps) + "]"


def trained_metric_dict(tm, size, cfg, n):
    d = {"schema": SCHEMA, "kind": "trained_metric", "size": size, "n": n}
    d.update(
        epsilon=cfg.epsilon,
        iterations=cfg.iterations,
        max_iter=cfg.max_iter,
    )
    d.update(tm.to_dict())
    return d


def trained_metric_table(tm):
    rows = [[c.name, f"{w:.4g}"] for c, w in zip(tm.components, tm.weights)]
    text = format_table(["Component", "Weight"], rows)
    return text + f"\nAccuracy: {tm.accuracy:.4f} (round {tm.best_round} of {len(tm.history)})\n"


def selection_dict(report, cfg, size, timings=False):
    return {
        "schema": SCHEMA,
        "kind": "selection_report",
        "strategy": report.strategy,
        "size": size,
        "theta": cfg.theta if report.strategy == "hybrid" else None,
        "budget_secs": cfg.budget,
        "min_combo_size": cfg.min_combo_size,
        "max_combo_size": cfg.max_combo_size,
        "epsilon": cfg.metchar.epsilon,
        "iterations": cfg.metchar.iterations,
        "max_iter": cfg.metchar.max_iter,
        "seed": cfg.metchar.seed,
        "budget_exhausted": report.budget_exhausted,
        "all_pruned": report.all_pruned,
        "best": report.best,
        "survivors": [c.name for c in report.survivors],
        "pruned": [{"component": c.name, "accuracy": a} for c, a in report.pruned],
        "trials": [t.to_dict(timings) for t in report.trials],
    }


def selection_table(report, timings=False):
    rows = []
    for i, t in enumerate(report.trials):
        acc = f"{t.accuracy:.4f}" + (" *" if i == report.best else "")
        rows.append([_names(t.components), _weights(t.weights),
                     f"{t.elapsed:.3f}" if timings else "-", acc])
    text = format_table(["Components", "Weights", "Time (s)", "Accuracy"], rows)
    notes = []
    if report.pruned:
        notes.append("pruned: " + ", ".join(f"{c.name} ({a:.4f})" for c, a in report.pruned))
    if report.all_pruned:
        notes.append("all components pruned")
    if report.budget_exhausted:
        notes.append("time budget exhausted")
    return text + "".join(f"\n{n}" for n in notes) + ("\n" if notes else "")


def comparison_table(reports):
    label = {"exhaustive": "ExhaustiveSelection", "greedy": "GreedySelection",
             "hybrid": "HybridSelection"}
    rows = [[label[r.strategy], "-" if r.best is None else f"{r.best_accuracy:.4f}"] for r in reports]
    return format_table(["Algorithm", "Accuracy"], rows)


def eval_dict(tm_dict, conf, n, k, seed):
    return {
        "schema": SCHEMA,
        "kind": "eval_result",
        "components": tm_dict["components"],
        "weights": tm_dict["weights"],
        "size": tm_dict["size"],
        "seed": seed,
        "n": n,
        "k": k,
        "accuracy": conf.accuracy,
        **conf.to_dict(),
    }
