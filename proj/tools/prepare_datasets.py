#!/usr/bin/env python3
"""Build the logistic-regression CSVs in data/ from their raw sources.

Pima: MASS::Pima.tr and MASS::Pima.te (200 + 332 complete cases).
German credit: the 20-attribute UCI file (german.data, space separated).

The output files are plain comma-separated tables with a header row and a
0/1 response column, ready for `load_csv_dataset`.  Numeric columns are
treated as continuous by the loader and string columns are one-hot encoded,
so the encoding choices for German credit are made here:

  * ordered (or loosely ordered) categoricals become integer codes,
  * the nominal attributes personal_status, other_debtors,
    installment_plans, telephone and foreign_worker stay as strings.

That gives 7 + 8 + (3 + 2 + 2 + 1 + 1) = 24 covariates, 25 with the
intercept.

Usage: prepare_datasets.py <dir with Pima.tr.csv, Pima.te.csv, german.data> <out dir>
"""

import csv
import sys
from pathlib import Path

PIMA_COLUMNS = ["npreg", "glu", "bp", "skin", "bmi", "ped", "age"]

GERMAN_ATTRIBUTES = [
    ("status", "ordinal"),
    ("duration", "numeric"),
    ("credit_history", "ordinal"),
    ("purpose", "ordinal"),
    ("amount", "numeric"),
    ("savings", "ordinal"),
    ("employment", "ordinal"),
    ("installment_rate", "numeric"),
    ("personal_status", "nominal"),
    ("other_debtors", "nominal"),
    ("residence_since", "numeric"),
    ("property", "ordinal"),
    ("age", "numeric"),
    ("installment_plans", "nominal"),
    ("housing", "ordinal"),
    ("existing_credits", "numeric"),
    ("job", "ordinal"),
    ("people_liable", "numeric"),
    ("telephone", "nominal"),
    ("foreign_worker", "nominal"),
]


def ordinal_code(prefix_len, value):
    # "A43" -> 3, "A410" -> 10, "A121" -> 1 (attribute prefix stripped)
    return int(value[prefix_len:])


def prepare_pima(src: Path, out: Path) -> int:
    rows = []
    for name in ("Pima.tr.csv", "Pima.te.csv"):
        with open(src / name, newline="") as f:
            for rec in csv.DictReader(f):
                y = {"Yes": 1, "No": 0}[rec["type"]]
                rows.append([rec[c] for c in PIMA_COLUMNS] + [y])
    with open(out / "pima.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(PIMA_COLUMNS + ["diabetes"])
        w.writerows(rows)
    return len(rows)


def prepare_german(src: Path, out: Path) -> int:
    rows = []
    with open(src / "german.data") as f:
        for line in f:
            fields = line.split()
            if not fields:
                continue
            assert len(fields) == 21, line
            row = []
            for (name, kind), value in zip(GERMAN_ATTRIBUTES, fields[:20]):
                if kind == "ordinal":
                    # codes look like A<attribute index><level>
                    attr_index = GERMAN_ATTRIBUTES.index((name, kind)) + 1
                    row.append(ordinal_code(1 + len(str(attr_index)), value))
                else:
                    row.append(value)
            row.append(1 if fields[20] == "2" else 0)  # 2 = bad credit
            rows.append(row)
    with open(out / "german_credit.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow([n for n, _ in GERMAN_ATTRIBUTES] + ["bad_credit"])
        w.writerows(rows)
    return len(rows)


def main(argv):
    if len(argv) != 3:
        print(__doc__)
        return 2
    src, out = Path(argv[1]), Path(argv[2])
    out.mkdir(parents=True, exist_ok=True)
    print("pima rows:", prepare_pima(src, out))
    print("german credit rows:", prepare_german(src, out))
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
