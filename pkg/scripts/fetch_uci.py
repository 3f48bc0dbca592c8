#!/usr/bin/env python3
"""Fetch UCI benchmark datasets and convert them to the harness CSV layout.

Writes data/<name>.csv with a header row and a label column.  Needs network
access to archive.ics.uci.edu for everything except wine, which can also be
exported offline from scikit-learn with --wine-from-sklearn.

Usage:
    python scripts/fetch_uci.py [--dest data] [names...]
    python scripts/fetch_uci.py --wine-from-sklearn
"""

from __future__ import annotations

import argparse
import csv
import sys
import urllib.request
from pathlib import Path

BASE = "https://archive.ics.uci.edu/ml/machine-learning-databases"

ECOLI_COLUMNS = ["mcg", "gvh", "lip", "chg", "aac", "alm1", "alm2"]
WINE_COLUMNS = [
    "alcohol", "malic_acid", "ash", "alcalinity_of_ash", "magnesium",
    "total_phenols", "flavanoids", "nonflavanoid_phenols", "proanthocyanins",
    "color_intensity", "hue", "od280_od315_of_diluted_wines", "proline",
]


def _fetch(url: str) -> list[str]:
    with urllib.request.urlopen(url, timeout=60) as resp:
        return resp.read().decode("utf-8").splitlines()


def fetch_ecoli(dest: Path) -> Path:
    # whitespace-separated: sequence name, 7 numeric features, class
    lines = _fetch(f"{BASE}/ecoli/ecoli.data")
    out = dest / "ecoli.csv"
    with out.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([*ECOLI_COLUMNS, "class"])
        for line in lines:
            parts = line.split()
            if not parts:
                continue
            # parts[0] is the sequence name, an identifier rather than a feature
            w.writerow([*parts[1:8], parts[8]])
    return out


def fetch_wine(dest: Path) -> Path:
    # comma-separated: class label first, then 13 numeric features
    lines = _fetch(f"{BASE}/wine/wine.data")
    out = dest / "wine.csv"
    with out.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([*WINE_COLUMNS, "class"])
        for line in lines:
            parts = line.strip().split(",")
            if len(parts) < 14:
                continue
            w.writerow([*parts[1:14], f"class_{int(parts[0]) - 1}"])
    return out


def wine_from_sklearn(dest: Path) -> Path:
    from sklearn.datasets import load_wine

    bundle = load_wine()
    out = dest / "wine.csv"
    with out.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([*WINE_COLUMNS, "class"])
        for x, y in zip(bundle.data, bundle.target):
            w.writerow([*(repr(float(v)) for v in x), bundle.target_names[y]])
    return out


FETCHERS = {"ecoli": fetch_ecoli, "wine": fetch_wine}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("names", nargs="*", default=[], help=f"datasets: {sorted(FETCHERS)}")
    ap.add_argument("--dest", default="data")
    ap.add_argument("--wine-from-sklearn", action="store_true",
                    help="export wine.csv from scikit-learn's bundled copy (offline)")
    args = ap.parse_args()
    dest = Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)
    if args.wine_from_sklearn:
        print(wine_from_sklearn(dest))
    names = args.names or (list(FETCHERS) if not args.wine_from_sklearn else [])
    for name in names:
        if name not in FETCHERS:
            print(f"unknown dataset {name!r}; have {sorted(FETCHERS)}", file=sys.stderr)
            return 1
        try:
            print(FETCHERS[name](dest))
        except OSError as e:
            print(f"fetching {name} failed: {e}", file=sys.stderr)
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
