#!/usr/bin/env python3
"""Accuracy, precision, recall and F1 with exact fractions and half-up
rounding to three decimals. None marks an undefined (0/0) metric.

    python3 metrics_oracle.py            # rewrite metrics_cases.json
    python3 metrics_oracle.py --check
"""

import json
import sys
from fractions import Fraction
from pathlib import Path

OUT = Path(__file__).with_name("metrics_cases.json")


def half_up(q, places=3):
    scaled = q * 10**places
    return int(scaled + Fraction(1, 2)) / 10**places  # floor(x + 1/2), x >= 0


def div(a, b):
    return None if b == 0 else Fraction(a, b)


def metrics(tp, fp, fn, tn):
    a = div(tp + tn, tp + fp + fn + tn)
    p = div(tp, tp + fp)
    r = div(tp, tp + fn)
    f1 = None
    if p is not None and r is not None and p + r > 0:
        f1 = 2 * p * r / (p + r)
    return {k: (None if v is None else half_up(v)) for k, v in
            {"accuracy": a, "precision": p, "recall": r, "f1": f1}.items()}


MATRICES = [
    (34, 4, 4, 58), (0, 0, 0, 10), (0, 5, 0, 5), (0, 0, 5, 5), (10, 0, 0, 0),
    (1, 0, 0, 0), (0, 1, 1, 0), (2, 1, 1, 6), (5, 3, 2, 90), (7, 0, 3, 0),
    (1, 2, 0, 0), (123, 45, 67, 890), (1, 1, 1, 1), (3, 5, 8, 13), (0, 3, 3, 94),
    (17, 1, 2, 0), (50, 50, 50, 50), (1, 7, 0, 2), (9, 0, 0, 1), (2, 0, 7, 1),
]


def build():
    return [{"matrix": {"tp": tp, "fp": fp, "fn": fn, "tn": tn}, "expected": metrics(tp, fp, fn, tn)}
            for tp, fp, fn, tn in MATRICES]


def main():
    data = build()
    if "--check" in sys.argv:
        if json.loads(OUT.read_text()) != data:
            print("metrics_cases.json is stale")
            return 1
        print("metrics oracle: OK")
        return 0
    OUT.write_text(json.dumps(data, indent=1) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
