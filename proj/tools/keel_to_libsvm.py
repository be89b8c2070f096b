#!/usr/bin/env python3
"""One-hot encode a KEEL categorical .dat file (class in the last column) as libsvm.

Categories are sorted per attribute; the label is +1 for --positive, else -1.
"""
import argparse
import sys


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("input")
    ap.add_argument("output")
    ap.add_argument("--positive", default="p")
    args = ap.parse_args()

    with open(args.input) as f:
        rows = [line.strip().split(",") for line in f
                if line.strip() and not line.startswith("@")]
    width = len(rows[0]) - 1
    if any(len(r) != width + 1 for r in rows):
        sys.exit("ragged rows")

    index = {}
    next_col = 1
    for a in range(width):
        for value in sorted({r[a] for r in rows}):
            index[(a, value)] = next_col
            next_col += 1

    with open(args.output, "w") as out:
        for r in rows:
            label = "+1" if r[-1] == args.positive else "-1"
            cols = sorted(index[(a, r[a])] for a in range(width))
            out.write(label + "".join(f" {c}:1" for c in cols) + "\n")
    print(f"{len(rows)} rows, {next_col - 1} features", file=sys.stderr)


if __name__ == "__main__":
    main()
