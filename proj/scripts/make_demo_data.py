"""Writes the synthetic demo study in data/demo/.

Eighteen datasets, six methods, two measures and ten resampling iterations.
Method quality differs by dataset size so that filters and measures change
the rankings, and a few cells contain failed iterations.
"""

import csv
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parent.parent / "data" / "demo"
METHODS = ["coxph", "glmnet", "rfsrc", "ranger", "xgboost", "kaplan_meier"]
ITERATIONS = 10


def main() -> None:
    rng = np.random.default_rng(20200101)
    OUT.mkdir(parents=True, exist_ok=True)

    datasets = []
    for i in range(18):
        n = int(rng.integers(80, 1200))
        n_eff = int(n * rng.uniform(0.1, 0.6))
        p = int(rng.integers(1000, 60000))
        clin = int(rng.integers(2, 12))
        datasets.append((f"ds{i + 1:02d}", clin, n, n_eff, p))

    with open(OUT / "datasets.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["dataset_id", "clin", "n", "n_eff", "p"])
        w.writerows(datasets)

    # Per-method skill on small and large datasets.
    skill_small = {"coxph": 0.55, "glmnet": 0.66, "rfsrc": 0.62, "ranger": 0.63, "xgboost": 0.58, "kaplan_meier": 0.5}
    skill_large = {"coxph": 0.6, "glmnet": 0.69, "rfsrc": 0.7, "ranger": 0.71, "xgboost": 0.67, "kaplan_meier": 0.5}
    fail_rate = {"coxph": 0.25, "glmnet": 0.0, "rfsrc": 0.05, "ranger": 0.0, "xgboost": 0.12, "kaplan_meier": 0.0}

    rows = []
    for ds, _, n, _, _ in datasets:
        w_large = min(1.0, n / 1000)
        for m in METHODS:
            c_mean = (1 - w_large) * skill_small[m] + w_large * skill_large[m] + rng.normal(0, 0.02)
            fails = rng.random(ITERATIONS) < fail_rate[m]
            for it in range(ITERATIONS):
                if fails[it]:
                    rows.append((ds, m, "cindex", it, ""))
                    rows.append((ds, m, "ibrier", it, ""))
                    continue
                c = float(np.clip(c_mean + rng.normal(0, 0.03), 0.3, 0.98))
                b = float(np.clip(0.25 - 0.45 * (c - 0.5) + rng.normal(0, 0.01), 0.05, 0.3))
                rows.append((ds, m, "cindex", it, f"{c:.6f}"))
                rows.append((ds, m, "ibrier", it, f"{b:.6f}"))

    rows.sort(key=lambda r: (r[0], METHODS.index(r[1]), r[2], r[3]))
    with open(OUT / "results.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["dataset_id", "method_id", "measure_id", "iteration", "value"])
        w.writerows(rows)


if __name__ == "__main__":
    main()
