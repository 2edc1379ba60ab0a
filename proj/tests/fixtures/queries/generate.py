#!/usr/bin/env python3
"""Writes dataset.csv, queries.tsv and the expected CLI output of each query.

Expected outputs come from plain Python evaluation over the CSV rows; nothing
here touches the C++ code. Float formatting follows the shortest round-trip
form the CLI prints (repr without a trailing ".0"); the data stays in a range
where the two agree.
"""

import math
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))

rng = random.Random(7)
GROUPS = ["north", "south", "east", "west", "näcken, the 2nd"]
ROWS = []
for i in range(57):
    ROWS.append({
        "id": i,
        "grp": GROUPS[rng.randrange(len(GROUPS))],
        "val": rng.randrange(-400, 400) / 8,
        "qty": rng.randrange(0, 25),
    })
COLS = ["id", "grp", "val", "qty"]


def fmt(v):
    if isinstance(v, float):
        r = repr(v)
        return r[:-2] if r.endswith(".0") else r
    return str(v)


def select(cols, pred):
    out = ["\t".join(cols)]
    for r in ROWS:
        if pred(r):
            out.append("\t".join(fmt(r[c]) for c in cols))
    return "\n".join(out) + "\n"


def agg(fn, col, pred):
    vals = [r[col] for r in ROWS if pred(r)]
    if fn == "count":
        v = len(vals)
    elif fn == "sum":
        v = math.fsum(vals) if col == "val" else sum(vals)
    elif fn == "avg":
        v = math.fsum(vals) / len(vals)
    elif fn == "min":
        v = min(vals)
    elif fn == "max":
        v = max(vals)
    elif fn == "median":
        s = sorted(float(x) for x in vals)
        n = len(s)
        v = s[n // 2] if n % 2 else (s[n // 2 - 1] + s[n // 2]) / 2
    return fmt(v) + "\n"


ALL = lambda r: True
QUERIES = [
    ("SELECT * FROM golden", select(COLS, ALL)),
    ("SELECT qty, id FROM golden WHERE val > 10", select(["qty", "id"], lambda r: r["val"] > 10)),
    ("SELECT * FROM golden WHERE grp = 'north' AND qty >= 12", select(COLS, lambda r: r["grp"] == "north" and r["qty"] >= 12)),
    ("SELECT id FROM golden WHERE grp = 'näcken, the 2nd' OR id < 3", select(["id"], lambda r: r["grp"] == "näcken, the 2nd" or r["id"] < 3)),
    ("SELECT id, val FROM golden WHERE NOT (val <= 0 OR qty != 7)", select(["id", "val"], lambda r: not (r["val"] <= 0 or r["qty"] != 7))),
    ("SELECT * FROM golden WHERE id > 1000", select(COLS, lambda r: r["id"] > 1000)),
    ("SELECT grp FROM golden WHERE val >= -2 AND val < 2", select(["grp"], lambda r: -2 <= r["val"] < 2)),
    ("SELECT count(id) FROM golden", agg("count", "id", ALL)),
    ("SELECT count(grp) FROM golden WHERE grp != 'east'", agg("count", "grp", lambda r: r["grp"] != "east")),
    ("SELECT sum(qty) FROM golden", agg("sum", "qty", ALL)),
    ("SELECT sum(val) FROM golden WHERE qty < 10", agg("sum", "val", lambda r: r["qty"] < 10)),
    ("SELECT avg(val) FROM golden", agg("avg", "val", ALL)),
    ("SELECT avg(qty) FROM golden WHERE grp = 'west'", agg("avg", "qty", lambda r: r["grp"] == "west")),
    ("SELECT min(val) FROM golden", agg("min", "val", ALL)),
    ("SELECT max(qty) FROM golden WHERE val < 0", agg("max", "qty", lambda r: r["val"] < 0)),
    ("SELECT median(val) FROM golden", agg("median", "val", ALL)),
    ("SELECT median(qty) FROM golden WHERE id >= 10", agg("median", "qty", lambda r: r["id"] >= 10)),
    ("SELECT count(id) FROM golden WHERE id = 1000", agg("count", "id", lambda r: r["id"] == 1000)),
]


def csv_cell(v):
    s = fmt(v)
    return '"' + s.replace('"', '""') + '"' if any(c in s for c in ',"\n') else s


def main():
    with open(os.path.join(HERE, "dataset.csv"), "w", encoding="utf-8", newline="") as f:
        f.write(",".join(COLS) + "\n")
        for r in ROWS:
            f.write(",".join(csv_cell(r[c]) for c in COLS) + "\n")
    with open(os.path.join(HERE, "queries.tsv"), "w", encoding="utf-8") as f:
        for i, (q, _) in enumerate(QUERIES):
            f.write(f"{i:02d}\t{q}\n")
    for i, (_, out) in enumerate(QUERIES):
        with open(os.path.join(HERE, f"{i:02d}.out"), "w", encoding="utf-8", newline="") as f:
            f.write(out)


if __name__ == "__main__":
    main()
