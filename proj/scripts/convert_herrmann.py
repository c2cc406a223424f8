"""Converts a per-iteration export of the Herrmann et al. (2020) survival
benchmark into the benchfold input files.

The original results are R objects. Export them to a CSV with one row per
(dataset, method, iteration) holding both measures, and a second CSV with
the dataset characteristics; a missing measure marks a failed iteration.
Column names are configurable:

    python scripts/convert_herrmann.py \
        --results export/results.csv --datasets export/datasets.csv \
        --out herrmann/

Method names are normalised to lower case with non-alphanumerics replaced
by "_", so "Kaplan-Meier" becomes "kaplan_meier". Iterations are renumbered
from 0 within each (dataset, method) in their file order.
"""

import argparse
import re
import sys
from pathlib import Path

import pandas as pd


def normalise(name: str) -> str:
    return re.sub(r"[^0-9a-z]+", "_", str(name).strip().lower()).strip("_")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--results", required=True, type=Path)
    ap.add_argument("--datasets", required=True, type=Path)
    ap.add_argument("--out", required=True, type=Path)
    ap.add_argument("--dataset-col", default="dataset")
    ap.add_argument("--method-col", default="learner")
    ap.add_argument("--iteration-col", default="iter")
    ap.add_argument("--ibrier-col", default="ibrier")
    ap.add_argument("--cindex-col", default="cindex")
    ap.add_argument("--clin-col", default="clin")
    ap.add_argument("--n-col", default="n")
    ap.add_argument("--n-eff-col", default="n_eff")
    ap.add_argument("--p-col", default="p")
    args = ap.parse_args()

    res = pd.read_csv(args.results)
    meta = pd.read_csv(args.datasets)
    missing = [c for c in (args.dataset_col, args.method_col, args.ibrier_col, args.cindex_col) if c not in res]
    missing += [c for c in (args.dataset_col, args.clin_col, args.n_col, args.n_eff_col, args.p_col) if c not in meta]
    if missing:
        print(f"missing columns: {', '.join(missing)}", file=sys.stderr)
        return 1

    res["method_id"] = res[args.method_col].map(normalise)
    res["dataset_id"] = res[args.dataset_col].astype(str)
    if args.iteration_col in res:
        res = res.sort_values(["dataset_id", "method_id", args.iteration_col], kind="stable")
    res["iteration"] = res.groupby(["dataset_id", "method_id"]).cumcount()

    long = res.melt(
        id_vars=["dataset_id", "method_id", "iteration"],
        value_vars=[args.ibrier_col, args.cindex_col],
        var_name="measure_id",
        value_name="value",
    )
    long["measure_id"] = long["measure_id"].map({args.ibrier_col: "ibrier", args.cindex_col: "cindex"})
    long = long[["dataset_id", "method_id", "measure_id", "iteration", "value"]]

    args.out.mkdir(parents=True, exist_ok=True)
    long.to_csv(args.out / "results.csv", index=False, float_format="%.17g")

    ds = pd.DataFrame(
        {
            "dataset_id": meta[args.dataset_col].astype(str),
            "clin": meta[args.clin_col].astype(int),
            "n": meta[args.n_col].astype(int),
            "n_eff": meta[args.n_eff_col].astype(int),
            "p": meta[args.p_col].astype(int),
        }
    )
    ds.to_csv(args.out / "datasets.csv", index=False)
    print(f"{len(ds)} datasets, {long['method_id'].nunique()} methods, {len(long)} rows -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
