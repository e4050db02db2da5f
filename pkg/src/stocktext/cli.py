"""Command-line entry point: ``stocktext <command> [flags]``.

Exit codes: 0 success, 1 validation error, 2 runtime error (network,
divergence). Every command writes its resolved config to
``<output_dir>/config.json``.
"""
from __future__ import annotations

import argparse
import csv
import datetime as dt
import io
import json
import logging
import sys
from collections import Counter
from pathlib import Path
from typing import Sequence

import numpy as np

from . import labelling as lab
from .config import RunConfig
from .errors import PipelineRuntimeError, ValidationError
from .evaluation import (
    CvSpec,
    SplitSpec,
    class_report,
    confusion,
    investment_signal,
    kfold,
    last_days_window,
    macro_f1,
    train_test_split,
)
from .experiment import FittedPipeline, GridSpec, fit_pipeline, grid_search
from .features import Vocabulary, Weighting
from .market_data import fetch_ohlc, fill_calendar, parse_ohlc_csv
from .models import dump_model, load_model
from .textprep import PipelineConfig, preprocess, read_messages_csv, write_cleaned_corpus

log = logging.getLogger("stocktext")

COMMANDS = ("fetch", "label", "prep", "train", "eval", "cv", "grid", "signal", "report")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _read(path: str | None, what: str) -> str:
    if not path:
        raise ValidationError(f"no {what} path configured")
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {what} {path}: {exc.strerror or exc}") from None


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text, encoding="utf-8")
    return path


def _json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def _csv(rows: Sequence[Sequence], header: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _scheme(cfg: RunConfig) -> lab.LabelScheme:
    try:
        return lab.LabelScheme.parse(cfg.scheme, cfg.threshold)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None


def _pipeline_config(cfg: RunConfig) -> PipelineConfig:
    return PipelineConfig(disabled=frozenset(cfg.disabled_stages), squeeze_limit=cfg.squeeze_limit)


def _split_spec(cfg: RunConfig) -> SplitSpec:
    return SplitSpec(cfg.split_train, cfg.split_test, cfg.sub_seed("split"), cfg.stratify)


# ---------------------------------------------------------------- dataset


class Dataset:
    """Labelled messages after preprocessing; retweet-dropped rows removed."""

    def __init__(self, cfg: RunConfig):
        self.scheme = _scheme(cfg)
        path = cfg.labelled or str(Path(cfg.output_dir) / "labelled.csv")
        rows = lab.read_labelled_csv(_read(path, "labelled dataset"), self.scheme, cfg.tz_offset)
        pcfg = _pipeline_config(cfg)
        cleaned = [preprocess(r.message, pcfg) for r in rows]
        keep = [i for i, c in enumerate(cleaned) if not c.dropped]
        self.n_dropped = len(rows) - len(keep)
        self.rows = [rows[i] for i in keep]
        self.docs = [list(cleaned[i].tokens) for i in keep]
        self.y = np.asarray([r.outcome.to_int(self.scheme) for r in self.rows], dtype=np.int64)
        self.classes = self.scheme.codes

    def __len__(self) -> int:
        return len(self.rows)

    def split(self, cfg: RunConfig) -> tuple[np.ndarray, np.ndarray]:
        return train_test_split(len(self), _split_spec(cfg), labels=self.y)

    def subset(self, idx) -> tuple[list[list[str]], np.ndarray]:
        return [self.docs[i] for i in idx], self.y[idx]


def _load_fitted(cfg: RunConfig) -> tuple[FittedPipeline, dict]:
    model_path = cfg.model_path or str(Path(cfg.output_dir) / "model.json")
    model, doc = load_model(_read(model_path, "model artifact"))
    vocab_path = Path(model_path).with_name("vocab.csv")
    vocab = Vocabulary.from_csv(_read(str(vocab_path), "vocabulary"), n_docs=doc["extra"].get("n_docs"))
    if vocab.content_hash() != doc["vocabulary_sha256"]:
        raise ValidationError(f"{vocab_path} does not match the model's vocabulary hash")
    return FittedPipeline(vocab, Weighting(doc["extra"]["vectorizer"]), model), doc


# ---------------------------------------------------------------- commands


def cmd_fetch(cfg: RunConfig, out: Path) -> int:
    if not (cfg.symbol and cfg.endpoint and cfg.fetch_start and cfg.fetch_end):
        raise ValidationError("fetch needs symbol, endpoint, fetch_start and fetch_end")
    start, end = dt.date.fromisoformat(cfg.fetch_start), dt.date.fromisoformat(cfg.fetch_end)
    body = fetch_ohlc(cfg.symbol, start, end, cfg.endpoint, allow_network=cfg.allow_network)
    _write(out, "ohlc.csv", body)
    print(f"fetched {len(body.splitlines()) - 1} rows for {cfg.symbol}")
    return 0


def _is_tie(series, date: dt.date, alignment: lab.Alignment) -> bool:
    close, ref = lab.reference_prices(series, date, alignment, "close")
    return close == ref


def cmd_label(cfg: RunConfig, out: Path) -> int:
    scheme = _scheme(cfg)
    alignment = lab.Alignment(cfg.alignment)
    messages = read_messages_csv(_read(cfg.messages, "messages"))
    # one OHLC series prices one symbol
    n_read = len(messages)
    if cfg.symbol:
        messages = [m for m in messages if m.symbol == cfg.symbol]
    elif len({m.symbol for m in messages}) > 1:
        symbols = sorted({m.symbol for m in messages})
        raise ValidationError(f"messages cover several symbols ({', '.join(symbols)}); pick one with --symbol")
    labelled: list[lab.LabelledMessage] = []
    excluded = ties = 0
    if messages:
        series = parse_ohlc_csv(_read(cfg.ohlc, "OHLC"), symbol=cfg.symbol or "", date_format=cfg.ohlc_date_format)
        filled = fill_calendar(series)
        labelled, excluded = lab.join_messages(
            messages, filled, scheme, alignment, cfg.tz_offset, prev_reference=cfg.prev_reference
        )
        if scheme.kind is lab.SchemeKind.BINARY:
            ties = sum(1 for m in labelled if _is_tie(filled, m.date, alignment))
    _write(out, "labelled.csv", lab.write_labelled_csv(labelled, scheme))
    counts = Counter(m.outcome for m in labelled)
    total = len(labelled)
    shares = lab.class_balance(labelled) if labelled else {}
    balance_rows = [
        [cfg.scheme, cfg.window_label, label.value, label.to_int(scheme), counts[label], repr(shares.get(label, 0.0))]
        for label in lab.Label
        if scheme.kind is lab.SchemeKind.PCT_THREE or label is not lab.Label.NEUTRAL
    ]
    _write(out, "balance.csv", _csv(balance_rows, ["scheme", "window", "label", "label_int", "count", "proportion"]))
    summary = {
        "scheme": cfg.scheme,
        "alignment": cfg.alignment,
        "tz_offset": cfg.tz_offset,
        "n_messages": len(messages),
        "n_other_symbols": n_read - len(messages),
        "n_labelled": total,
        "n_excluded": excluded,
        "n_binary_ties": ties,
        "proportions": {label.value: shares.get(label, 0.0) for label in lab.Label if label in counts},
    }
    _write(out, "summary.json", _json(summary))
    shares_txt = ", ".join(f"{k} {v:.1%}" for k, v in summary["proportions"].items()) or "no messages"
    print(f"labelled {total} of {len(messages)} messages ({excluded} excluded): {shares_txt}")
    return 0


def cmd_prep(cfg: RunConfig, out: Path) -> int:
    messages = read_messages_csv(_read(cfg.messages, "messages"))
    pcfg = _pipeline_config(cfg)
    cleaned = [preprocess(m.message, pcfg) for m in messages]
    corpus, sidecar = write_cleaned_corpus([m.message_id for m in messages], cleaned)
    _write(out, "cleaned.txt", corpus)
    _write(out, "cleaned_ids.csv", sidecar)
    _write(out, "prep.json", _json(pcfg.describe()))
    print(f"cleaned {len(messages)} messages ({sum(c.dropped for c in cleaned)} dropped)")
    return 0


def cmd_train(cfg: RunConfig, out: Path) -> int:
    data = Dataset(cfg)
    train_idx, test_idx = data.split(cfg)
    docs, y = data.subset(train_idx)
    fitted = fit_pipeline(
        docs, y, cfg.vectorizer, cfg.model, cfg.model_params, data.classes,
        min_df=cfg.min_df, max_features=cfg.max_features, seed=cfg.sub_seed("train"),
    )
    vocab_csv = fitted.vocab.to_csv()
    _write(out, "vocab.csv", vocab_csv)
    artifact = dump_model(
        fitted.model, fitted.vocab.content_hash(),
        vectorizer=cfg.vectorizer, scheme=cfg.scheme, n_docs=fitted.vocab.n_docs,
        n_train=int(len(train_idx)), n_test=int(len(test_idx)),
    )
    _write(out, "model.json", artifact)
    train_f1 = macro_f1(y, fitted.predict(docs), data.classes)
    print(f"trained {cfg.model}/{cfg.vectorizer} on {len(train_idx)} messages; train macro-F1 {train_f1:.3f}")
    return 0


def cmd_eval(cfg: RunConfig, out: Path) -> int:
    data = Dataset(cfg)
    fitted, doc = _load_fitted(cfg)
    _, test_idx = data.split(cfg)
    if len(test_idx) == 0:
        raise ValidationError("held-out split is empty")
    docs, y = data.subset(test_idx)
    pred = fitted.predict(docs)
    report = class_report(confusion(y, pred, data.classes))
    meta = {
        "model": doc["kind"],
        "model_short": cfg.model,
        "vectorizer": doc["extra"]["vectorizer"],
        "scheme": cfg.scheme,
        "alignment": cfg.alignment,
        "window": cfg.window_label,
        "n_test": int(len(test_idx)),
    }
    _write(out, "report.json", _json({**meta, "report": report.to_dict()}))
    _write(out, "report.txt", report.to_text())
    rows = [
        [data.rows[i].symbol, data.rows[i].date.isoformat(), data.rows[i].message_id, int(t), int(p)]
        for i, t, p in zip(test_idx, y, pred)
    ]
    _write(out, "predictions.csv", _csv(rows, ["symbol", "date", "message_id", "label", "pred_label"]))
    print(report.to_text(), end="")
    return 0


def cmd_cv(cfg: RunConfig, out: Path) -> int:
    data = Dataset(cfg)
    spec = CvSpec(cfg.cv_folds, cfg.sub_seed("cv"))
    scores = []
    for train_idx, test_idx in kfold(len(data), spec):
        docs, y = data.subset(train_idx)
        fitted = fit_pipeline(
            docs, y, cfg.vectorizer, cfg.model, cfg.model_params, data.classes,
            min_df=cfg.min_df, max_features=cfg.max_features, seed=cfg.sub_seed("train"),
        )
        tdocs, ty = data.subset(test_idx)
        scores.append(macro_f1(ty, fitted.predict(tdocs), data.classes))
    mean = float(np.mean(scores))
    _write(out, "cv.json", _json({"k": cfg.cv_folds, "fold_macro_f1": scores, "mean_macro_f1": mean,
                                  "model": cfg.model, "vectorizer": cfg.vectorizer, "scheme": cfg.scheme}))
    print(f"{cfg.cv_folds}-fold macro-F1: {mean:.4f} ({', '.join(f'{s:.3f}' for s in scores)})")
    return 0


def cmd_grid(cfg: RunConfig, out: Path) -> int:
    data = Dataset(cfg)
    g = cfg.grid
    spec = GridSpec(
        tuple(g.get("vectorizers", ())), tuple(g.get("models", ())), g.get("params", {}), g.get("features", {})
    )
    cv = CvSpec(cfg.cv_folds, cfg.sub_seed("cv")) if cfg.grid_cv else None
    split = SplitSpec(cfg.split_train, cfg.split_test, cfg.sub_seed("split"), cfg.stratify)
    result = grid_search(
        spec, data.docs, data.y, data.classes, cv=cv, split=split,
        min_df=cfg.min_df, max_features=cfg.max_features, seed=cfg.sub_seed("grid"),
    )
    table = result.table()
    header = list(table[0]) if table else ["rank"]
    _write(out, "grid.csv", _csv([[r[k] for k in header] for r in table], header))
    best = result.best
    _write(out, "grid.json", _json({
        "best": None if best is None else {"cell": best.cell.index, "describe": best.cell.describe(), "macro_f1": best.score},
        "n_cells": len(table),
        "n_failed": sum(1 for r in result.results if r.failed),
        "cv_folds": cfg.cv_folds if cv else None,
    }))
    for r in result.ranked():
        status = f"{r.score:.4f}" if not r.failed else r.error
        print(f"{r.cell.describe():40s} {status}")
    return 0


def _signal_rows_from_predictions(cfg: RunConfig) -> list[tuple[str, dt.date, int, int, bool]]:
    reader = csv.DictReader(io.StringIO(_read(cfg.predictions, "predictions")))
    need = {"symbol", "date", "label", "pred_label"}
    if not reader.fieldnames or not need <= set(reader.fieldnames):
        raise ValidationError(f"predictions file needs columns {sorted(need)}")
    return [
        (r["symbol"], dt.date.fromisoformat(r["date"]), int(r["label"]), int(r["pred_label"]), False)
        for r in reader
    ]


def cmd_signal(cfg: RunConfig, out: Path) -> int:
    """Per-symbol invest/avoid decision on each symbol's final window.

    Rows come either from a predictions CSV or from running the trained
    model over the labelled dataset. The overlap between the window and the
    training split is reported, not removed.
    """
    scheme = _scheme(cfg)
    if cfg.predictions:
        rows = _signal_rows_from_predictions(cfg)
    else:
        data = Dataset(cfg)
        fitted, _ = _load_fitted(cfg)
        train_idx, _ = data.split(cfg) if len(data) >= 2 else (np.array([], dtype=np.int64), None)
        in_train = np.zeros(len(data), dtype=bool)
        in_train[train_idx] = True
        pred = fitted.predict(data.docs) if len(data) else np.array([], dtype=np.int64)
        rows = [(r.symbol, r.date, int(t), int(p), bool(tr)) for r, t, p, tr in zip(data.rows, data.y, pred, in_train)]

    symbols = sorted({r[0] for r in rows})
    if cfg.symbol:
        symbols = [cfg.symbol]
    windows = last_days_window([r[1] for r in rows], [r[0] for r in rows], cfg.window_days)
    results = {}
    for sym in symbols:
        idx = windows.get(sym)
        if idx is None or len(idx) == 0:
            log.warning("no messages in the final %d days for %s; skipped", cfg.window_days, sym)
            results[sym] = {"skipped": "empty window"}
            print(f"{sym}: skipped (no messages in window)")
            continue
        sel = [rows[i] for i in idx]
        report = class_report(confusion([r[2] for r in sel], [r[3] for r in sel], scheme.codes))
        start, end = min(r[1] for r in sel), max(r[1] for r in sel)
        window = f"{start.isoformat()}..{end.isoformat()}"
        sig = investment_signal(report, cfg.tau, window)
        results[sym] = {
            **sig.to_dict(),
            "n_messages": len(sel),
            "n_overlap_with_train": sum(r[4] for r in sel),
            "report": report.to_dict(),
        }
        print(f"{sym}: {sig.message} (positive precision {sig.precision:.3f}, tau {cfg.tau})")
    _write(out, "signal.json", _json(results))
    return 0


def cmd_report(cfg: RunConfig, out: Path) -> int:
    if not cfg.runs:
        raise ValidationError("report needs at least one run directory (--runs)")
    comparison, balance = [], []
    for run in cfg.runs:
        run_dir = Path(run)
        rep = run_dir / "report.json"
        if rep.exists():
            doc = json.loads(rep.read_text(encoding="utf-8"))
            r = doc["report"]
            comparison.append([
                doc["model_short"], doc["vectorizer"], doc["scheme"], doc["alignment"], doc["window"],
                repr(r["macro_avg"]["f1"]), repr(r["accuracy"]["value"]), r["accuracy"]["support"],
            ])
        bal = run_dir / "balance.csv"
        if bal.exists():
            reader = csv.DictReader(io.StringIO(bal.read_text(encoding="utf-8")))
            balance.extend([row["scheme"], row["window"], row["label"], row["count"], row["proportion"]] for row in reader)
    if not comparison and not balance:
        raise ValidationError("no eval or label outputs found in the given runs")
    comparison.sort(key=lambda row: (row[2], row[4], row[0], row[1], row[3]))
    _write(out, "comparison.csv", _csv(
        comparison, ["model", "vectorizer", "scheme", "alignment", "window", "macro_f1", "accuracy", "support"]
    ))
    _write(out, "class_balance.csv", _csv(balance, ["scheme", "window", "label", "count", "proportion"]))
    for row in comparison:
        print(f"{row[0]:>3} {row[1]:>6} {row[2]:>7} {row[4]:>4}  macro-F1 {float(row[5]):.3f}  accuracy {float(row[6]):.1%}")
    return 0


HELP = {
    "fetch": "download an OHLC CSV from an HTTP endpoint",
    "label": "label messages from price moves",
    "prep": "write the cleaned token corpus",
    "train": "fit a model on the training split",
    "eval": "evaluate a trained model on the held-out split",
    "cv": "k-fold cross-validation of the configured model",
    "grid": "grid search over vectorizers, models and hyperparameters",
    "signal": "per-symbol invest/avoid decision on the final window",
    "report": "aggregate runs into comparison and class-balance tables",
}

HANDLERS = {
    "fetch": cmd_fetch, "label": cmd_label, "prep": cmd_prep, "train": cmd_train, "eval": cmd_eval,
    "cv": cmd_cv, "grid": cmd_grid, "signal": cmd_signal, "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its values")
    common.add_argument("--scheme", choices=["binary", "pct2", "pct3"])
    common.add_argument("--alignment", choices=["same-day", "prev-day"])
    common.add_argument("--vectorizer", choices=["count", "tfidf"])
    common.add_argument("--model", choices=["nb", "lr"])
    common.add_argument("--seed", type=int)
    common.add_argument("--tau", type=float)
    common.add_argument("--tz-offset", dest="tz_offset", type=float)
    common.add_argument("--out", dest="output_dir", help="output directory")
    common.add_argument("--messages", help="StockTwits CSV")
    common.add_argument("--ohlc", help="OHLC CSV")
    common.add_argument("--date-format", dest="ohlc_date_format", choices=["iso", "dmy"])
    common.add_argument("--labelled", help="labelled dataset CSV")
    common.add_argument("--model-path", dest="model_path")
    common.add_argument("--predictions", help="CSV with symbol,date,label,pred_label (signal)")
    common.add_argument("--runs", nargs="+", help="run directories to aggregate (report)")
    common.add_argument("--symbol")
    common.add_argument("--endpoint")
    common.add_argument("--start", dest="fetch_start")
    common.add_argument("--end", dest="fetch_end")
    common.add_argument("--allow-network", dest="allow_network", action="store_true", default=None)
    common.add_argument("--cv", dest="grid_cv", action="store_true", default=None,
                        help="grid: score cells by k-fold CV instead of the held-out split")
    common.add_argument("--folds", dest="cv_folds", type=int)
    common.add_argument("--window", dest="window_label", help="window label for reports, e.g. 1y")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="stocktext", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=HELP[name])
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    overrides = {k: v for k, v in vars(args).items() if k not in ("config", "command", "verbose")}
    return cfg.override(**overrides)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
        out = Path(cfg.output_dir)
        _write(out, "config.json", cfg.to_json())
        return HANDLERS[args.command](cfg, out)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except PipelineRuntimeError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
