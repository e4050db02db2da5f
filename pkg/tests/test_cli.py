import csv
import hashlib
import io
import json
import subprocess
import sys

import pytest

from conftest import TABLE1_CSV, TABLE2_CSV
from stocktext.cli import main
from stocktext.market_data import serialize_ohlc_csv
from stocktext.synthetic import planted_corpus
from stocktext.textprep import write_messages_csv


@pytest.fixture(scope="module")
def planted_files(tmp_path_factory):
    root = tmp_path_factory.mktemp("planted")
    corpus = planted_corpus(600, n_days=30, seed=5)
    (root / "messages.csv").write_text(write_messages_csv(corpus.messages), encoding="utf-8")
    (root / "ohlc.csv").write_text(serialize_ohlc_csv(corpus.series), encoding="utf-8")
    return root


def run(*args):
    return main([str(a) for a in args])


def _label(files, out, *extra):
    return run("label", "--messages", files / "messages.csv", "--ohlc", files / "ohlc.csv", "--out", out, *extra)


def _digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _rows(path):
    return list(csv.DictReader(io.StringIO(path.read_text(encoding="utf-8"))))


@pytest.fixture(scope="module")
def labelled_run(planted_files, tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    assert _label(planted_files, out) == 0
    return out


def test_label_outputs(labelled_run):
    summary = json.loads((labelled_run / "summary.json").read_text())
    assert summary["n_messages"] == 600 == summary["n_labelled"]
    assert summary["n_excluded"] == 0
    assert abs(sum(summary["proportions"].values()) - 1) <= 1e-12
    balance = _rows(labelled_run / "balance.csv")
    assert [r["label"] for r in balance] == ["positive", "negative"]
    config = json.loads((labelled_run / "config.json").read_text())
    assert config["scheme"] == "binary" and config["output_dir"] == str(labelled_run)


def test_label_pct3_balance_sums_to_one(planted_files, tmp_path):
    assert _label(planted_files, tmp_path, "--scheme", "pct3") == 0
    rows = _rows(tmp_path / "balance.csv")
    assert len(rows) == 3
    assert abs(sum(float(r["proportion"]) for r in rows) - 1) <= 1e-12


def test_label_table_examples(tmp_path):
    (tmp_path / "m.csv").write_text(TABLE1_CSV, encoding="utf-8")
    (tmp_path / "o.csv").write_text(TABLE2_CSV, encoding="utf-8")
    code = run("label", "--messages", tmp_path / "m.csv", "--ohlc", tmp_path / "o.csv", "--date-format", "dmy",
               "--out", tmp_path / "out", "--tz-offset", "-4")
    assert code == 0
    rows = _rows(tmp_path / "out" / "labelled.csv")
    assert rows[0]["message"] == "$TSLA trash" and rows[0]["label_int"] == "1"


def test_label_empty_messages(tmp_path):
    (tmp_path / "m.csv").write_text("Symbol,Message,Datetime,User,Message_Id\n", encoding="utf-8")
    assert run("label", "--messages", tmp_path / "m.csv", "--out", tmp_path / "out") == 0
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["n_labelled"] == 0 and summary["proportions"] == {}
    assert (tmp_path / "out" / "labelled.csv").read_text().count("\n") == 1


def test_label_out_of_span(tmp_path, capsys):
    (tmp_path / "m.csv").write_text(
        TABLE1_CSV + 'TSLA,late,2020-09-01T10:00:00Z,u9,999000111\n', encoding="utf-8"
    )
    (tmp_path / "o.csv").write_text(TABLE2_CSV, encoding="utf-8")
    code = run("label", "--messages", tmp_path / "m.csv", "--ohlc", tmp_path / "o.csv", "--date-format", "dmy",
               "--out", tmp_path / "out")
    assert code == 1
    assert "999000111" in capsys.readouterr().err


def test_missing_input_is_validation_error(tmp_path):
    assert run("label", "--messages", tmp_path / "nope.csv", "--out", tmp_path) == 1


def test_bad_flag_exit_code(tmp_path):
    with pytest.raises(SystemExit) as info:
        run("label", "--scheme", "pct9")
    assert info.value.code == 1


def test_prep(planted_files, tmp_path):
    assert run("prep", "--messages", planted_files / "messages.csv", "--out", tmp_path) == 0
    lines = (tmp_path / "cleaned.txt").read_text().splitlines()
    assert len(lines) == 600 and all(line.startswith("syn ") for line in lines)
    assert _rows(tmp_path / "cleaned_ids.csv")[0] == {"message_id": "100000", "dropped": "0"}


def test_train_eval_signal_report(labelled_run):
    out = labelled_run
    assert run("train", "--out", out, "--model", "nb", "--vectorizer", "count") == 0
    assert run("eval", "--out", out, "--model", "nb") == 0
    report = json.loads((out / "report.json").read_text())
    assert report["n_test"] == 60
    assert report["report"]["macro_avg"]["f1"] >= 0.9
    assert "macro avg" in (out / "report.txt").read_text()
    assert len(_rows(out / "predictions.csv")) == 60

    assert run("signal", "--out", out) == 0
    signal = json.loads((out / "signal.json").read_text())
    assert signal["SYN"]["message"] == "Invest!"
    assert signal["SYN"]["n_overlap_with_train"] > 0

    assert run("report", "--runs", out, "--out", out / "agg") == 0
    comparison = _rows(out / "agg" / "comparison.csv")
    assert len(comparison) == 1 and comparison[0]["model"] == "nb"


def test_two_runs_aggregate(planted_files, labelled_run, tmp_path):
    runs = []
    for model in ("nb", "lr"):
        d = tmp_path / model
        assert run("train", "--labelled", labelled_run / "labelled.csv", "--out", d, "--model", model) == 0
        assert run("eval", "--labelled", labelled_run / "labelled.csv", "--out", d, "--model", model) == 0
        runs.append(d)
    assert run("report", "--runs", *runs, labelled_run, "--out", tmp_path / "agg") == 0
    rows = _rows(tmp_path / "agg" / "comparison.csv")
    assert {r["model"] for r in rows} >= {"nb", "lr"}
    assert all(float(r["macro_f1"]) > 0.9 for r in rows)
    assert list(rows[0]) == ["model", "vectorizer", "scheme", "alignment", "window", "macro_f1", "accuracy", "support"]


def test_report_without_runs(tmp_path):
    assert run("report", "--out", tmp_path) == 1
    assert run("report", "--runs", tmp_path / "empty", "--out", tmp_path) == 1


def test_cv(labelled_run, tmp_path):
    assert run("cv", "--labelled", labelled_run / "labelled.csv", "--out", tmp_path, "--folds", "3") == 0
    doc = json.loads((tmp_path / "cv.json").read_text())
    assert len(doc["fold_macro_f1"]) == 3 and doc["mean_macro_f1"] > 0.9


def test_grid_four_rows(labelled_run, tmp_path):
    assert run("grid", "--labelled", labelled_run / "labelled.csv", "--out", tmp_path) == 0
    rows = _rows(tmp_path / "grid.csv")
    assert len(rows) == 4
    assert [r["rank"] for r in rows] == ["1", "2", "3", "4"]
    assert {(r["vectorizer"], r["model"]) for r in rows} == {
        (v, m) for v in ("count", "tfidf") for m in ("nb", "lr")
    }


def test_grid_failed_cell_does_not_abort(labelled_run, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "labelled": str(labelled_run / "labelled.csv"),
        "grid": {"vectorizers": ["count"], "models": ["nb", "lr"],
                 "params": {"lr": {"step_size": [1e4], "clip_step": [False]}}},
    }))
    assert run("grid", "--config", cfg, "--out", tmp_path / "g") == 0
    doc = json.loads((tmp_path / "g" / "grid.json").read_text())
    assert doc["n_failed"] == 1 and doc["best"]["describe"] == "count/nb"


def test_train_divergence_exit_code(labelled_run, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"model_params": {"step_size": 1e4, "clip_step": False}}))
    code = run("train", "--config", cfg, "--labelled", labelled_run / "labelled.csv", "--model", "lr",
               "--out", tmp_path / "t")
    assert code == 2


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"learning_rate": 1}))
    assert run("label", "--config", cfg, "--out", tmp_path) == 1


def test_rerun_is_byte_identical(planted_files, tmp_path):
    names = ("labelled.csv", "balance.csv", "summary.json", "vocab.csv", "model.json", "report.json", "predictions.csv")
    digests = []
    for d in ("a", "b"):
        out = tmp_path / d
        assert _label(planted_files, out, "--seed", "7") == 0
        assert run("train", "--out", out, "--seed", "7", "--model", "lr") == 0
        assert run("eval", "--out", out, "--seed", "7", "--model", "lr") == 0
        digests.append([_digest(out / n) for n in names])
    assert digests[0] == digests[1]


def test_config_snapshot_reproduces_run(planted_files, tmp_path):
    """Each command's snapshot alone replays that command."""
    out, again = tmp_path / "first", tmp_path / "again"
    for command, args in (("label", ["--seed", "3"]), ("train", ["--seed", "3", "--model", "lr"])):
        if command == "label":
            assert _label(planted_files, out, *args) == 0
        else:
            assert run(command, "--out", out, *args) == 0
        snapshot = json.loads((out / "config.json").read_text())
        snapshot["output_dir"] = str(again)
        (tmp_path / f"{command}.json").write_text(json.dumps(snapshot))
        assert run(command, "--config", tmp_path / f"{command}.json") == 0
    for name in ("labelled.csv", "vocab.csv", "model.json"):
        assert _digest(out / name) == _digest(again / name)


def test_seed_changes_split(labelled_run, tmp_path):
    for seed in ("1", "2"):
        assert run("train", "--labelled", labelled_run / "labelled.csv", "--out", tmp_path / seed, "--seed", seed) == 0
    a = json.loads((tmp_path / "1" / "model.json").read_text())
    b = json.loads((tmp_path / "2" / "model.json").read_text())
    assert a["parameters"] != b["parameters"]


# ------------------------------------------------------------------ signal from predictions


def _write_predictions(path, tp, fp, fn, tn, symbol="AAPL", date="2020-07-30"):
    rows = [(1, 1)] * tp + [(0, 1)] * fp + [(1, 0)] * fn + [(0, 0)] * tn
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["symbol", "date", "message_id", "label", "pred_label"])
    for i, (t, p) in enumerate(rows):
        w.writerow([symbol, date, i, t, p])
    path.write_text(buf.getvalue())


def test_signal_reconstructed_avoid(tmp_path, capsys):
    _write_predictions(tmp_path / "p.csv", tp=2226, fp=840, fn=194, tn=115)
    assert run("signal", "--predictions", tmp_path / "p.csv", "--out", tmp_path) == 0
    doc = json.loads((tmp_path / "signal.json").read_text())["AAPL"]
    assert doc["message"] == "Avoid investing!"
    assert round(doc["precision"], 3) == 0.726
    assert "AAPL: Avoid investing!" in capsys.readouterr().out


def test_signal_all_correct_invests(tmp_path):
    _write_predictions(tmp_path / "p.csv", tp=10, fp=0, fn=2, tn=5)
    assert run("signal", "--predictions", tmp_path / "p.csv", "--out", tmp_path) == 0
    assert json.loads((tmp_path / "signal.json").read_text())["AAPL"]["message"] == "Invest!"


def test_signal_empty_window_skipped(tmp_path, caplog):
    _write_predictions(tmp_path / "p.csv", tp=3, fp=0, fn=0, tn=3)
    assert run("signal", "--predictions", tmp_path / "p.csv", "--symbol", "MSFT", "--out", tmp_path) == 0
    assert json.loads((tmp_path / "signal.json").read_text()) == {"MSFT": {"skipped": "empty window"}}


def test_console_script_help():
    proc = subprocess.run([sys.executable, "-m", "stocktext.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for name in ("fetch", "label", "prep", "train", "eval", "cv", "grid", "signal", "report"):
        assert name in proc.stdout


def test_label_multi_symbol_needs_symbol(tmp_path, capsys):
    other = TABLE1_CSV.splitlines()[1].replace("TSLA,", "AAPL,", 1).replace("228000001", "777")
    (tmp_path / "m.csv").write_text(TABLE1_CSV + other + "\n", encoding="utf-8")
    (tmp_path / "o.csv").write_text(TABLE2_CSV, encoding="utf-8")
    args = ["label", "--messages", tmp_path / "m.csv", "--ohlc", tmp_path / "o.csv", "--date-format", "dmy",
            "--out", tmp_path / "out"]
    assert run(*args) == 1
    assert "AAPL, TSLA" in capsys.readouterr().err
    assert run(*args, "--symbol", "TSLA") == 0
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["n_other_symbols"] == 1 and summary["n_messages"] == 4
