import json
import os

import numpy as np
import pytest
from conftest import two_class_spec
from oracles import scan_features

from metchar import Stroke, SynthSpec, report
from metchar.cli import main
from metchar.pgm import write_pgm


def _spec_file(tmp_path, spec, name="spec.json"):
    path = tmp_path / name
    path.write_text(json.dumps(spec.to_dict()))
    return str(path)


def _conf(tmp_path, text, name="run.conf"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def _read(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


@pytest.fixture
def synth_conf(tmp_path):
    _spec_file(tmp_path, two_class_spec())
    _spec_file(tmp_path, two_class_spec(seed=99), "test_spec.json")
    return _conf(tmp_path, "synth_spec = spec.json\ntest_synth_spec = test_spec.json\n"
                 "iterations = 5\nepsilon = 1e-4\nseed = 3\nout = out\n")


def _three_components(conf_path):
    with open(conf_path, "a") as fh:
        fh.write("components = hbv_md, vfv_md, vlv_md\n")


# extract


def test_extract_two_samples_and_sentinels(tmp_path):
    empty = np.full((8, 8), 255, np.uint8)
    bar = empty.copy()
    bar[2:6, 3] = 0
    write_pgm(tmp_path / "a.pgm", empty)
    write_pgm(tmp_path / "b.pgm", bar)
    (tmp_path / "m.tsv").write_text("# two glyphs\na.pgm\tblank\nb.pgm\tbar\n")
    args = ["extract", "--manifest", str(tmp_path / "m.tsv"), "--size", "8",
            "--out", str(tmp_path / "o")]
    assert main(args) == 0
    text = _read(tmp_path / "o" / "features.jsonl")
    rows = [json.loads(line) for line in text.splitlines()]
    assert [r["label"] for r in rows] == ["blank", "bar"]
    want = scan_features(np.zeros((8, 8), np.uint8).tolist())
    for f, vec in want.items():
        assert rows[0][f] == list(vec)
    assert list(rows[0]) == ["label", "hbv", "hfv", "hlv", "vfv", "vlv", "dfv", "dlv"]
    assert main(args) == 0
    assert _read(tmp_path / "o" / "features.jsonl") == text


def test_extract_missing_image_is_data_error(tmp_path, capsys):
    (tmp_path / "m.tsv").write_text("nope.pgm\tx\n")
    assert main(["extract", "--manifest", str(tmp_path / "m.tsv"), "--out", str(tmp_path)]) == 3
    assert "nope.pgm" in capsys.readouterr().err


# train


def test_train_single_component(tmp_path, synth_conf):
    with open(synth_conf, "a") as fh:
        fh.write("components = hbv_md\n")
    assert main(["train", "--config", synth_conf]) == 0
    d = json.loads(_read(tmp_path / "out" / "metric.json"))
    assert d["schema"] == 1 and d["kind"] == "trained_metric"
    assert d["components"] == ["hbv_md"] and len(d["weights"]) == 1


def test_train_rerun_identical_and_separable(tmp_path, synth_conf):
    assert main(["train", "--config", synth_conf]) == 0
    first = _read(tmp_path / "out" / "metric.json"), _read(tmp_path / "out" / "metric.txt")
    assert main(["train", "--config", synth_conf]) == 0
    assert (_read(tmp_path / "out" / "metric.json"), _read(tmp_path / "out" / "metric.txt")) == first
    assert json.loads(first[0])["accuracy"] == 1.0


def test_config_errors_listed_together(tmp_path, capsys):
    conf = _conf(tmp_path, "epsilon = -1\niterations = 0\nbogus = 1\n")
    assert main(["train", "--config", conf]) == 2
    err = capsys.readouterr().err
    for needle in ("epsilon", "iterations", "bogus", "synth_spec"):
        assert needle in err


# select


def test_select_exhaustive_three_components(tmp_path, synth_conf):
    _three_components(synth_conf)
    assert main(["select", "--config", synth_conf, "--strategy", "exhaustive"]) == 0
    table = _read(tmp_path / "out" / "selection.txt")
    body = table.splitlines()[2:]
    assert len([r for r in body if r.startswith("[")]) == 7
    assert [h.strip() for h in table.splitlines()[0].split(" | ")] == ["Components", "Weights", "Time (s)", "Accuracy"]
    d = json.loads(_read(tmp_path / "out" / "selection.json"))
    assert len(d["trials"]) == 7 and d["kind"] == "selection_report"


def test_select_theta_out_of_range(tmp_path, synth_conf, capsys):
    assert main(["select", "--config", synth_conf, "--theta", "1.1"]) == 2
    assert "theta" in capsys.readouterr().err
    assert not os.path.exists(tmp_path / "out")


def test_select_all_strategies_comparison(tmp_path, synth_conf):
    _three_components(synth_conf)
    assert main(["select", "--config", synth_conf, "--strategy", "all"]) == 0
    for s in ("exhaustive", "greedy", "hybrid"):
        assert os.path.exists(tmp_path / "out" / f"selection_{s}.json")
    lines = _read(tmp_path / "out" / "comparison.txt").splitlines()
    assert [h.strip() for h in lines[0].split(" | ")] == ["Algorithm", "Accuracy"]
    assert [ln.split(" | ")[0].strip() for ln in lines[2:]] == [
        "ExhaustiveSelection", "GreedySelection", "HybridSelection"]


def test_select_budget_exit_code(tmp_path, synth_conf):
    assert main(["select", "--config", synth_conf, "--budget-secs", "1e-9"]) == 4
    d = json.loads(_read(tmp_path / "out" / "selection.json"))
    assert d["budget_exhausted"] and len(d["trials"]) == 1


def test_select_all_pruned_exit_code(tmp_path):
    same = [Stroke("vertical", 2, 5, 8)]
    _spec_file(tmp_path, SynthSpec([same, same], 6, 16, jitter=2, seed=1))
    conf = _conf(tmp_path, "synth_spec = spec.json\niterations = 3\ntheta = 1.0\n"
                 "components = hbv_md, vfv_md\nout = out\n")
    assert main(["select", "--config", conf]) == 5
    d = json.loads(_read(tmp_path / "out" / "selection.json"))
    assert d["all_pruned"] and len(d["trials"]) == 2


def test_select_timings_opt_in(tmp_path, synth_conf):
    _three_components(synth_conf)
    assert main(["select", "--config", synth_conf]) == 0
    d = json.loads(_read(tmp_path / "out" / "selection.json"))
    assert all("elapsed_secs" not in t for t in d["trials"])
    assert main(["select", "--config", synth_conf, "--timings"]) == 0
    d = json.loads(_read(tmp_path / "out" / "selection.json"))
    assert all(t["elapsed_secs"] >= 0 for t in d["trials"])


def test_select_workers_do_not_change_report(tmp_path, synth_conf):
    _three_components(synth_conf)
    outs = []
    for w in ("1", "2"):
        out = str(tmp_path / f"w{w}")
        assert main(["select", "--config", synth_conf, "--workers", w, "--out", out]) == 0
        outs.append(_read(os.path.join(out, "selection.json")))
    assert outs[0] == outs[1]


# eval


def test_eval_replay_matches_training(tmp_path, synth_conf):
    three = SynthSpec(
        [[Stroke("vertical", 2, 3, 9)], [Stroke("vertical", 4, 6, 9)], [Stroke("vertical", 3, 9, 5)]],
        8, 16, jitter=2, seed=4,
    )
    _spec_file(tmp_path, three, "three.json")
    conf = _conf(tmp_path, "synth_spec = three.json\ntest_synth_spec = three.json\n"
                 "iterations = 4\nepsilon = 1e-4\nseed = 8\nout = out\n", "three.conf")
    assert main(["train", "--config", conf]) == 0
    metric = str(tmp_path / "out" / "metric.json")
    assert main(["eval", "--config", conf, "--metric", metric]) == 0
    trained = json.loads(_read(metric))
    ev = json.loads(_read(tmp_path / "out" / "eval.json"))
    assert ev["accuracy"] == trained["accuracy"]
    assert ev["kind"] == "eval_result" and ev["n"] == 24 and ev["k"] == 3
    assert ev["tp"] + ev["tn"] + ev["fp"] + ev["fn"] == 24 * 23 // 2


def test_eval_held_out_perfect(tmp_path, synth_conf):
    assert main(["train", "--config", synth_conf]) == 0
    assert main(["eval", "--config", synth_conf, "--metric", str(tmp_path / "out" / "metric.json")]) == 0
    ev = json.loads(_read(tmp_path / "out" / "eval.json"))
    assert ev["accuracy"] == 1.0 and ev["fp"] == 0 and ev["fn"] == 0


def test_eval_single_sample_rejected(tmp_path, synth_conf, capsys):
    assert main(["train", "--config", synth_conf]) == 0
    img = np.full((16, 16), 255, np.uint8)
    img[3:9, 4] = 0
    write_pgm(tmp_path / "one.pgm", img)
    (tmp_path / "one.tsv").write_text("one.pgm\tlong\n")
    code = main(["eval", "--config", synth_conf, "--metric", str(tmp_path / "out" / "metric.json"),
                 "--test-manifest", str(tmp_path / "one.tsv")])
    assert code == 3
    assert "at least 2" in capsys.readouterr().err


def test_eval_size_mismatch_rejected(tmp_path, synth_conf):
    assert main(["train", "--config", synth_conf]) == 0
    big = two_class_spec()
    big = SynthSpec(big.classes, 4, 32, 1, 5, big.labels)
    _spec_file(tmp_path, big, "test_spec.json")
    assert main(["eval", "--config", synth_conf, "--metric", str(tmp_path / "out" / "metric.json")]) == 2


# synth


def test_synth_manifest_round_trip(tmp_path):
    spec_path = _spec_file(tmp_path, two_class_spec(m=3))
    out = tmp_path / "ds"
    assert main(["synth", "--spec", spec_path, "--out", str(out)]) == 0
    lines = _read(out / "manifest.tsv").splitlines()
    assert lines[0].startswith("#") and len(lines) == 7
    assert lines[1] == "glyph_00000.pgm\tlong"
    fx = tmp_path / "fx"
    assert main(["extract", "--manifest", str(out / "manifest.tsv"), "--size", "16",
                 "--out", str(fx)]) == 0
    conf = _conf(tmp_path, f"synth_spec = {spec_path}\nsize = 16\nout = fy\n")
    assert main(["extract", "--config", conf]) == 0
    # a manifest read unnormalized reproduces the generator exactly
    raw = _conf(tmp_path, f"manifest = {out / 'manifest.tsv'}\nsize = 16\nnormalize = false\n"
                "out = fz\n", "raw.conf")
    assert main(["extract", "--config", raw]) == 0
    assert _read(tmp_path / "fz" / "features.jsonl") == _read(tmp_path / "fy" / "features.jsonl")


def test_synth_seed_override(tmp_path):
    spec_path = _spec_file(tmp_path, two_class_spec(m=3))
    assert main(["synth", "--spec", spec_path, "--out", str(tmp_path / "a")]) == 0
    assert main(["synth", "--spec", spec_path, "--out", str(tmp_path / "b"), "--seed", "12"]) == 0
    assert "seed=12" in _read(tmp_path / "b" / "manifest.tsv").splitlines()[0]
    a = [(tmp_path / "a" / f"glyph_0000{i}.pgm").read_bytes() for i in range(6)]
    b = [(tmp_path / "b" / f"glyph_0000{i}.pgm").read_bytes() for i in range(6)]
    assert a != b


def test_synth_bad_spec_is_config_error(tmp_path):
    (tmp_path / "bad.json").write_text('{"classes": []}')
    assert main(["synth", "--spec", str(tmp_path / "bad.json"), "--out", str(tmp_path)]) == 2


# atomic writes


def test_write_atomic_leaves_no_temp_and_keeps_old_on_failure(tmp_path, monkeypatch):
    target = tmp_path / "r.json"
    report.write_atomic(target, "old\n")
    assert os.listdir(tmp_path) == ["r.json"]

    def boom(src, dst):
        raise OSError("rename failed")

    monkeypatch.setattr(os, "replace", boom)
    with pytest.raises(OSError):
        report.write_atomic(target, "new\n")
    assert _read(target) == "old\n"
    assert os.listdir(tmp_path) == ["r.json"]
