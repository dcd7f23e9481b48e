#!/usr/bin/env python3
"""Brute-force Cohen's kappa and Krippendorff's alpha (nominal).

kappa: chance agreement by enumerating every (item of A, item of B) label
pair. alpha: disagreement by enumerating ordered pairs of pairable values,
within items (observed) and across the whole data (expected).

    python3 iaa_oracle.py            # rewrite iaa_cases.json
    python3 iaa_oracle.py --check    # recompute and compare
"""

import itertools
import json
import random
import sys
from pathlib import Path

OUT = Path(__file__).with_name("iaa_cases.json")


def kappa(a, b):
    pairs = [(x, y) for x, y in zip(a, b) if x is not None and y is not None]
    n = len(pairs)
    if n == 0:
        raise ValueError("no overlap")
    p_o = sum(1 for x, y in pairs if x == y) / n
    xs = [x for x, _ in pairs]
    ys = [y for _, y in pairs]
    p_e = sum(1 for x in xs for y in ys if x == y) / (n * n)
    if p_e == 1:
        return None
    return (p_o - p_e) / (1 - p_e)


def alpha(matrix):
    n_items = max(len(r) for r in matrix)
    units = []
    for i in range(n_items):
        vals = [r[i] for r in matrix if i < len(r) and r[i] is not None]
        if len(vals) >= 2:
            units.append(vals)
    if not units:
        raise ValueError("no pairable values")
    n = sum(len(u) for u in units)
    d_o = 0.0
    for u in units:
        m = len(u)
        d_o += sum(1 for i, j in itertools.permutations(range(m), 2) if u[i] != u[j]) / (m - 1)
    d_o /= n
    flat = [v for u in units for v in u]
    d_e = sum(1 for i, j in itertools.permutations(range(n), 2) if flat[i] != flat[j])
    d_e /= n * (n - 1)
    if d_e == 0:
        return None
    return 1 - d_o / d_e


def random_matrix(rng):
    annotators = rng.randint(2, 4)
    items = rng.randint(8, 40)
    p_missing = rng.choice([0.0, 0.15, 0.3])
    p_one = rng.uniform(0.2, 0.8)
    truth = [1 if rng.random() < p_one else 0 for _ in range(items)]
    noise = rng.uniform(0.05, 0.4)
    m = []
    for _ in range(annotators):
        row = []
        for t in truth:
            if rng.random() < p_missing:
                row.append(None)
            else:
                row.append(1 - t if rng.random() < noise else t)
        m.append(row)
    return m


def build():
    rng = random.Random(20240611)
    cases = []
    while len(cases) < 20:
        m = random_matrix(rng)
        kappas = {}
        ok = True
        for a, b in itertools.combinations(range(len(m)), 2):
            try:
                kappas[f"{a}-{b}"] = kappa(m[a], m[b])
            except ValueError:
                ok = False
        try:
            al = alpha(m)
        except ValueError:
            ok = False
        if ok:
            cases.append({"labels": m, "kappa": kappas, "alpha": al})
    perfect = [[1, 0, 1, 1, 0, 0, 1], [1, 0, 1, 1, 0, 0, 1]]
    fixed = [
        {"name": "perfect", "labels": perfect, "kappa": {"0-1": kappa(*perfect)}, "alpha": alpha(perfect)},
        {"name": "half", "labels": [[1, 1, 0, 0], [1, 0, 0, 0]],
         "kappa": {"0-1": kappa([1, 1, 0, 0], [1, 0, 0, 0])},
         "alpha": alpha([[1, 1, 0, 0], [1, 0, 0, 0]])},
    ]
    return {"random": cases, "fixed": fixed}


def main():
    data = build()
    if "--check" in sys.argv:
        frozen = json.loads(OUT.read_text())
        if frozen != data:
            print("iaa_cases.json is stale")
            return 1
        print("iaa oracle: OK")
        return 0
    OUT.write_text(json.dumps(data, indent=1) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
