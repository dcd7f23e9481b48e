#!/usr/bin/env python3
"""All-pairs top-k candidate oracle over random unit embeddings.

For every source chunk, every destination chunk is scored; those at or
above theta are sorted by (-similarity, index) and the first k kept.
Self mode skips a chunk paired with itself and treats pairs as unordered;
pairwise mode keeps (source, destination) order. The union over sources
is the expected candidate set.

    python3 topk_oracle.py            # rewrite topk_cases.json
    python3 topk_oracle.py --check
"""

import json
import math
import random
import sys
from pathlib import Path

OUT = Path(__file__).with_name("topk_cases.json")
KS = [1, 5, 10]
THETAS = [0.0, 0.55, 0.9]


def unit(v):
    n = math.sqrt(sum(x * x for x in v))
    return [x / n for x in v]


def dot(a, b):
    s = 0.0
    for x, y in zip(a, b):
        s += x * y
    return s


def centers_for(rng, n, dim=12):
    return [unit([rng.gauss(0, 1) for _ in range(dim)]) for _ in range(max(2, n // 15))]


def corpus(rng, n, centers):
    # Clustered vectors so every threshold keeps a different share.
    out = []
    for i in range(n):
        c = rng.choice(centers)
        spread = rng.choice([0.05, 0.2, 0.6])
        out.append(unit([x + rng.gauss(0, spread) for x in c]))
    return out


def expected(src, dst, mode, k, theta):
    pairs = set()
    for i, s in enumerate(src):
        hits = []
        for j, d in enumerate(dst):
            if mode == "self" and i == j:
                continue
            sim = dot(s, d)
            if sim >= theta:
                hits.append((-sim, j))
        hits.sort()
        for _, j in hits[:k]:
            pairs.add(tuple(sorted((i, j))) if mode == "self" else (i, j))
    return sorted([list(p) for p in pairs])


def build():
    rng = random.Random(7)
    cases = []
    for n_src, n_dst, mode in [(200, 200, "self"), (60, 60, "self"), (100, 100, "pairwise"),
                               (40, 150, "pairwise"), (15, 15, "self")]:
        centers = centers_for(rng, n_src)
        src = corpus(rng, n_src, centers)
        dst = src if mode == "self" else corpus(rng, n_dst, centers)
        runs = []
        for k in KS:
            for theta in THETAS:
                runs.append({"k": k, "theta": theta, "pairs": expected(src, dst, mode, k, theta)})
        cases.append({"mode": mode, "src": src, "dst": dst if mode != "self" else None, "runs": runs})
    return cases


def main():
    data = build()
    if "--check" in sys.argv:
        if json.loads(OUT.read_text()) != json.loads(json.dumps(data)):
            print("topk_cases.json is stale")
            return 1
        print("top-k oracle: OK")
        return 0
    OUT.write_text(json.dumps(data) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
