#!/usr/bin/env python3
"""Build the Splice train/test split in SVMlight format.

Source: the UCI "Molecular Biology (Splice-junction Gene Sequences)" data as
bundled by the `keel-ds` package (keel_ds/data/balanced/raw/splice.dat).

- rows containing ambiguous bases (D, N, S, R) are dropped -> 3175 rows
- label +1 for a splice junction (EI or IE), -1 for neither (N)
- each of the 60 positions is encoded +1 for a purine (A, G), -1 for a
  pyrimidine (C, T)
- a seeded permutation (seed 0) assigns the first 1000 rows to train and
  the remaining 2175 to test

Usage: make_splice.py [path/to/keel_ds.whl|splice.dat] [out_dir]
"""
import random
import sys
import zipfile
from pathlib import Path

RAW_MEMBER = "keel_ds/data/balanced/raw/splice.dat"
PURINE = {"A": 1, "G": 1, "C": -1, "T": -1}


def read_rows(src: Path):
    if src.suffix == ".whl":
        text = zipfile.ZipFile(src).read(RAW_MEMBER).decode()
    else:
        text = src.read_text()
    for line in text.splitlines():
        fields = [f.strip() for f in line.split(",") if f.strip()]
        if len(fields) != 61:
            continue
        bases, cls = fields[:60], fields[60]
        if all(b in PURINE for b in bases):
            yield [PURINE[b] for b in bases], (1 if cls in ("EI", "IE") else -1)


def write(path: Path, rows):
    with path.open("w") as out:
        for feats, label in rows:
            body = " ".join(f"{i + 1}:{v}" for i, v in enumerate(feats))
            out.write(f"{label:+d} {body}\n")


def main():
    src = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("splice.dat")
    out = Path(sys.argv[2]) if len(sys.argv) > 2 else Path("data/splice")
    rows = list(read_rows(src))
    assert len(rows) == 3175, len(rows)
    order = list(range(len(rows)))
    random.Random(0).shuffle(order)
    out.mkdir(parents=True, exist_ok=True)
    write(out / "splice.train", [rows[i] for i in order[:1000]])
    write(out / "splice.test", [rows[i] for i in order[1000:]])


if __name__ == "__main__":
    main()
