"""Back-solve the AAPL two-week confusion matrix from its published metrics,
then print the classification report and the invest signal it implies.

    python scripts/reproduce_table9.py [--tau 0.75]
"""
import argparse

import numpy as np

from stocktext.evaluation import ConfusionMatrix, class_report, investment_signal

SUPPORT = {0: 955, 1: 2420}
# published values, rounded as printed
PUBLISHED = {
    "precision_1": (0.726, 3),
    "recall_1": (0.92, 2),
    "f1_1": (0.81, 2),
    "recall_0": (0.12, 2),
    "accuracy": (0.69, 2),
}


def candidates():
    """Every 2x2 matrix with the published supports whose metrics round to
    the published values."""
    n0, n1 = SUPPORT[0], SUPPORT[1]
    for tp in range(n1 + 1):
        fn = n1 - tp
        for tn in range(n0 + 1):
            fp = n0 - tn
            if tp + fp == 0:
                continue
            precision = tp / (tp + fp)
            recall = tp / n1
            values = {
                "precision_1": precision,
                "recall_1": recall,
                "f1_1": 2 * precision * recall / (precision + recall) if precision + recall else 0.0,
                "recall_0": tn / n0,
                "accuracy": (tp + tn) / (n0 + n1),
            }
            if all(round(values[k], d) == v for k, (v, d) in PUBLISHED.items()):
                yield np.array([[tn, fp], [fn, tp]])


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--tau", type=float, default=0.75)
    args = parser.parse_args()

    found = list(candidates())
    target = np.array([[115, 840], [194, 2226]])
    print(f"{len(found)} matrices match the published class-1 metrics, class-0 recall and accuracy")
    print(f"[[115, 840], [194, 2226]] among them: {any(np.array_equal(m, target) for m in found)}")
    precisions_0 = sorted({round(m[0, 0] / m[:, 0].sum(), 3) for m in found})
    print(f"class-0 precision across candidates: {precisions_0[0]} .. {precisions_0[-1]}")

    report = class_report(ConfusionMatrix(target, (0, 1)))
    print()
    print(report.to_text(), end="")
    print()
    signal = investment_signal(report, args.tau)
    print(f"positive precision {signal.precision:.3f} vs tau {signal.tau}: {signal.message}")


if __name__ == "__main__":
    main()
