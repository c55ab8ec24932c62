#!/usr/bin/env python3
"""Convert the raw Adult, COMPAS and German credit files into headered CSVs.

The raw files are taken from the `responsibly` wheel on PyPI, which bundles
the UCI and ProPublica originals unmodified. Output goes to data/.

    python3 scripts/prepare_datasets.py [--wheel path/to/responsibly.whl] [--out data]
"""

import argparse
import csv
import io
import subprocess
import sys
import tempfile
import zipfile
from pathlib import Path

ADULT_COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education-num",
    "marital-status", "occupation", "relationship", "race", "sex",
    "capital-gain", "capital-loss", "hours-per-week", "native-country",
    "income",
]

GERMAN_COLUMNS = [
    "status", "duration", "credit_history", "purpose", "credit_amount",
    "savings", "present_employment", "installment_rate", "status_sex",
    "other_debtors", "residence_since", "property", "age",
    "installment_plans", "housing", "existing_credits", "job",
    "people_liable", "telephone", "foreign_worker", "credit",
]

COMPAS_COLUMNS = [
    "sex", "age", "age_cat", "race", "juv_fel_count", "juv_misd_count",
    "juv_other_count", "priors_count", "c_charge_degree", "two_year_recid",
]


def fetch_wheel(dest: Path) -> Path:
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "--no-deps",
         "responsibly==0.1.2", "-d", str(dest)],
        check=True)
    return next(dest.glob("responsibly-*.whl"))


def read_member(wheel: zipfile.ZipFile, name: str) -> str:
    return wheel.read("responsibly/dataset/" + name).decode("utf-8")


def write_csv(path: Path, header, rows):
    with path.open("w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {path} ({len(rows)} rows)")


def adult(wheel, out: Path):
    rows = []
    for member in ("adult/adult.data", "adult/adult.test"):
        for line in read_member(wheel, member).splitlines():
            line = line.strip()
            if not line or line.startswith("|"):
                continue
            cells = [c.strip() for c in line.split(",")]
            if len(cells) != len(ADULT_COLUMNS):
                continue
            cells[-1] = cells[-1].rstrip(".")
            # "?" marks a missing value in the UCI files.
            rows.append(["" if c == "?" else c for c in cells])
    write_csv(out / "adult.csv", ADULT_COLUMNS, rows)


def german(wheel, out: Path):
    rows = []
    female = {"A92", "A95"}
    header = [c for c in GERMAN_COLUMNS if c != "status_sex"]
    header.insert(header.index("credit"), "sex")
    for line in read_member(wheel, "german/german.data").splitlines():
        cells = line.split()
        if len(cells) != len(GERMAN_COLUMNS):
            continue
        record = dict(zip(GERMAN_COLUMNS, cells))
        record["sex"] = "female" if record["status_sex"] in female else "male"
        rows.append([record[c] for c in header])
    write_csv(out / "german.csv", header, rows)


def compas(wheel, out: Path):
    # ProPublica's own filtering of the two-year file.
    text = read_member(wheel, "compas/compas-scores-two-years.csv")
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    index = {}
    for i, name in enumerate(header):
        index.setdefault(name, i)
    rows = []
    for cells in reader:
        get = lambda name: cells[index[name]]
        if get("days_b_screening_arrest") == "":
            continue
        if abs(int(get("days_b_screening_arrest"))) > 30:
            continue
        if get("is_recid") == "-1" or get("c_charge_degree") == "O":
            continue
        if get("score_text") == "N/A":
            continue
        rows.append([get(c) for c in COMPAS_COLUMNS])
    write_csv(out / "compas.csv", COMPAS_COLUMNS, rows)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--wheel", type=Path)
    parser.add_argument("--out", type=Path,
                        default=Path(__file__).resolve().parent.parent / "data")
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        wheel_path = args.wheel or fetch_wheel(Path(tmp))
        with zipfile.ZipFile(wheel_path) as wheel:
            adult(wheel, args.out)
            german(wheel, args.out)
            compas(wheel, args.out)


if __name__ == "__main__":
    main()
