"""Recomputes per-cell summaries of a records CSV and compares them with aggregate_fixture."""
import csv
import math
import subprocess
import sys
from collections import defaultdict


def summaries(path):
    cells = defaultdict(list)
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            cells[row["config_hash"]].append((float(row["estimate"]), float(row["exact"])))
    out = {}
    for h, rows in cells.items():
        r = len(rows)
        errs = [e - x for e, x in rows]
        ests = [e for e, _ in rows]
        mean = sum(ests) / r
        var = sum((e - mean) ** 2 for e in ests) / (r - 1) if r > 1 else 0.0
        out[h] = (r, sum(errs) / r, var, sum(d * d for d in errs) / r, math.sqrt(var / r))
    return out


def main():
    binary, records = sys.argv[1], sys.argv[2]
    got = subprocess.run([binary, records], check=True, capture_output=True, text=True).stdout
    expected = summaries(records)
    seen = set()
    ok = True
    for line in got.strip().splitlines():
        h, count, *vals = line.split(",")
        seen.add(h)
        want = expected[h]
        if int(count) != want[0]:
            print(f"{h}: count {count} != {want[0]}")
            ok = False
        for name, a, b in zip(("bias", "variance", "mse", "std_error"), map(float, vals), want[1:]):
            if not math.isclose(a, b, rel_tol=1e-10, abs_tol=1e-14):
                print(f"{h}: {name} {a!r} != {b!r}")
                ok = False
    if seen != set(expected):
        print("cell sets differ")
        ok = False
    print("ok" if ok else "mismatch")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
