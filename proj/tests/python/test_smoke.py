import json
import os
from pathlib import Path

import numpy as np
import pytest

import benchfold

SOURCE = Path(os.environ.get("BENCHFOLD_SOURCE_DIR", Path(__file__).resolve().parents[2]))


def test_impute_weighted():
    cell = [None] * 5 + [0.15] * 5
    assert benchfold.impute_cell(cell, "lower_better", 0.25, 0.0, "weighted") == pytest.approx(0.20)
    assert benchfold.impute_cell([None, None], "lower_better", 0.25, 0.0, "weighted") == 0.25


def test_midranks_and_isotonic():
    assert benchfold.midranks([0.1, 0.2, 0.2, 0.3]) == [1, 2.5, 2.5, 4]
    assert benchfold.monotone_regress([1, 2, 3], [3, 1, 2]) == pytest.approx([2, 2, 2])


def test_errors_map_to_value_error():
    with pytest.raises(ValueError):
        benchfold.impute_cell([], "lower_better", 0.25, 0.0, "weighted")
    with pytest.raises(benchfold.DataError):
        benchfold.impute_cell([0.1], "sideways", 0.25, 0.0, "weighted")


def test_unfold_shapes():
    rng = np.random.default_rng(0)
    delta = np.array([rng.permutation(4) + 1 for _ in range(8)], dtype=float)
    sol = benchfold.unfold(delta, dim=2, n_starts=1, seed=3)
    assert sol["ideal"].shape == (8, 2)
    assert sol["objects"].shape == (4, 2)
    d = np.linalg.norm(sol["ideal"][:, None, :] - sol["objects"][None, :, :], axis=2)
    assert np.allclose(d, sol["distances"], atol=1e-9)


def test_prefix_groups():
    groups = benchfold.sample_prefix_groups(18, 50, 35)
    assert len(groups) == 774
    assert groups[-1] == list(range(18))


def test_cli_in_process(tmp_path):
    status, out, err = benchfold.run_cli(["--help"])
    assert status == 0
    assert "unfold" in out
    config = SOURCE / "data" / "demo" / "demo.config"
    status, out, err = benchfold.run_cli(["--config", str(config), "--out", str(tmp_path), "multiverse"])
    assert status == 0, err
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert [f["name"] for f in manifest["files"]] == ["rankings.csv"]
    assert len((tmp_path / "rankings.csv").read_text().splitlines()) == 289
