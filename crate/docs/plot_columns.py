#!/usr/bin/env python3
"""Merge the files of a `mood1d run` into whitespace-separated columns.

    python3 docs/plot_columns.py out/burgers > burgers.dat

Columns: x, then phi/exact/abs_err for every component, then degree,
left_count and right_count of the cell. Suitable for gnuplot, pandas or
numpy.loadtxt.
"""

import csv
import sys
from pathlib import Path


def main(argv):
    if len(argv) != 2:
        sys.exit(f"usage: {argv[0]} RUN_DIR")
    run = Path(argv[1])
    with open(run / "solution.csv", newline="") as f:
        solution = list(csv.DictReader(f))
    with open(run / "cpd.csv", newline="") as f:
        cpd = {row["i"]: row for row in csv.DictReader(f)}

    value_cols = [c for c in solution[0] if c not in ("i", "x_center")]
    cell_cols = ["degree", "left_count", "right_count"]
    print("# x " + " ".join(value_cols + cell_cols))
    for row in solution:
        cell = cpd[row["i"]]
        fields = [row["x_center"]] + [row[c] for c in value_cols] + [cell[c] for c in cell_cols]
        print(" ".join(fields))


if __name__ == "__main__":
    main(sys.argv)
