#!/usr/bin/env python3
"""Download the Wine Quality (white) dataset into data/ as comma CSV.

The upstream file is semicolon-separated with quoted headers; this
normalizes it so the masking CLI can read it directly.  Needs network
access to archive.ics.uci.edu.
"""

import csv
import io
import sys
import urllib.request
from pathlib import Path

URL = ("https://archive.ics.uci.edu/ml/machine-learning-databases/"
       "wine-quality/winequality-white.csv")


def main() -> int:
    target = Path(__file__).resolve().parents[1] / "data" / \
        "winequality-white.csv"
    target.parent.mkdir(exist_ok=True)
    raw = urllib.request.urlopen(URL, timeout=60).read().decode("utf-8")
    reader = csv.reader(io.StringIO(raw), delimiter=";")
    rows = [[cell.strip().strip('"') for cell in row] for row in reader]
    with target.open("w", newline="", encoding="utf-8") as fh:
        csv.writer(fh).writerows(rows)
    print(f"wrote {target} ({len(rows) - 1} rows)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
