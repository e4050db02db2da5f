"""End-to-end run on a planted-signal corpus through the CLI commands.

Writes synthetic messages and prices, then runs label, prep, train, eval,
grid and signal for each model, and aggregates the runs with report.

    python scripts/run_planted_signal.py --out runs/planted --noise 0.1
"""
import argparse
import json
from pathlib import Path

from stocktext.cli import main as cli
from stocktext.market_data import serialize_ohlc_csv
from stocktext.synthetic import planted_corpus
from stocktext.textprep import write_messages_csv


def run(*args) -> None:
    code = cli([str(a) for a in args])
    if code != 0:
        raise SystemExit(f"stocktext {args[0]} failed with exit code {code}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path("runs/planted"))
    parser.add_argument("--messages", type=int, default=2000)
    parser.add_argument("--days", type=int, default=60)
    parser.add_argument("--noise", type=float, default=0.0)
    parser.add_argument("--seed", type=int, default=0)
    # planted days always move by at least 1%, so there is no neutral class for pct3
    parser.add_argument("--scheme", default="binary", choices=["binary", "pct2"])
    args = parser.parse_args()

    corpus = planted_corpus(args.messages, args.days, args.noise, args.seed)
    data = args.out / "data"
    data.mkdir(parents=True, exist_ok=True)
    (data / "messages.csv").write_text(write_messages_csv(corpus.messages), encoding="utf-8")
    (data / "ohlc.csv").write_text(serialize_ohlc_csv(corpus.series), encoding="utf-8")

    runs = []
    for model in ("nb", "lr"):
        out = args.out / model
        common = ["--out", out, "--model", model, "--scheme", args.scheme, "--seed", args.seed]
        run("label", "--messages", data / "messages.csv", "--ohlc", data / "ohlc.csv", *common)
        run("prep", "--messages", data / "messages.csv", *common)
        run("train", *common)
        run("eval", *common)
        run("signal", *common)
        runs.append(out)
    run("grid", "--labelled", runs[0] / "labelled.csv", "--out", args.out / "grid", "--scheme", args.scheme,
        "--seed", args.seed)
    run("report", "--runs", *runs, "--out", args.out / "report")

    summary = {
        model: json.loads((args.out / model / "report.json").read_text())["report"]["macro_avg"]["f1"]
        for model in ("nb", "lr")
    }
    print(json.dumps({"macro_f1": summary, "output": str(args.out)}, indent=1))


if __name__ == "__main__":
    main()
