import json
import math
import os
import pathlib
import tempfile

import numpy as np
import pytest

import ecl

TINY = {
    "fractions": [0.5],
    "n_seeds": 1,
    "generator": {
        "num_scenes": 3,
        "feature_dim": 8,
        "train_counts": [120, 60, 60],
        "num_unseen_devices": 1,
        "test_count_per_device": 30,
    },
    "model": {"hidden": [8], "feature_dim": 6},
    "domain_probe": {"hidden_width": 8, "epochs": 3, "warm_up_epochs": 1},
    "training": {"batch_size": 8, "stage1_max_epochs": 3, "stage2_epochs": 3},
}


def test_entropy_and_plan():
    assert ecl.entropy([1 / 6] * 6) == pytest.approx(math.log(6), abs=1e-12)
    assert ecl.entropy([0.0, 1.0, 0.0]) == 0.0
    assert ecl.plan_batch(32) == (25, 7)
    assert ecl.plan_batch(1) == (0, 1)
    with pytest.raises(ecl.ValidationError):
        ecl.plan_batch(0)


def test_partition_and_metric():
    inv, spec = ecl.build_partition([0, 1, 2, 3], [0.1, 0.9, 0.5, 0.7])
    assert inv == [1, 3] and spec == [2, 0]
    mean, per_class = ecl.class_wise_accuracy([0, 1, 1, 1], [0, 0, 1, 1], 2)
    assert mean == pytest.approx(0.75)
    assert per_class == [0.5, 1.0]
    with pytest.raises(ecl.ValidationError, match="class 1"):
        ecl.class_wise_accuracy([0, 0], [0, 0], 2)


def test_config_round_trip_and_errors():
    text = json.dumps(ecl.config(seed=5))
    assert json.loads(ecl.normalize_config(text))["seed"] == 5
    with pytest.raises(ecl.ValidationError, match="unknown key"):
        ecl.normalize_config('{"sed": 1}')
    with pytest.raises(ecl.ParseError):
        ecl.normalize_config("{")


def test_generate_shapes():
    train, test = ecl.generate(json.dumps(TINY))
    assert train["features"].shape == (240, 8)
    assert train["features"].dtype == np.float64
    assert set(np.unique(train["devices"])) == {0, 1, 2}
    assert set(np.unique(test["devices"])) == {0, 1, 2, 3}
    assert test["unseen_devices"] == [3]
    again, _ = ecl.generate(json.dumps(TINY))
    assert np.array_equal(train["features"], again["features"])


def test_run_pair_matches_budget():
    r = ecl.run_pair(json.dumps(TINY), 0.5, 0)
    assert r["steps"] > r["stage1_steps"] > 0
    for system in ("baseline", "curriculum"):
        rep = r[system]
        assert 0.0 <= rep["overall_classwise_acc"] <= 1.0
        assert rep["unseen_acc"] is not None
        assert sum(map(sum, rep["confusion"])) == rep["n_evaluated"]


def test_file_commands():
    base = os.environ.get("ECL_TEST_TMP")
    if base:
        pathlib.Path(base).mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory(dir=base) as tmp:
        cfg = dict(TINY, output_dir=str(pathlib.Path(tmp) / "out"))
        path = pathlib.Path(tmp) / "cfg.json"
        path.write_text(json.dumps(cfg))
        log = ecl.gen_data(str(path))
        assert "total" in log
        with pytest.raises(ecl.Error, match="--force"):
            ecl.gen_data(str(path))
        ecl.compare(str(path))
        out = pathlib.Path(cfg["output_dir"])
        manifest = json.loads((out / "manifest.json").read_text())
        assert len(manifest["runs"]) == 2
        data = ecl.load_dataset(str(out / "data" / "train.ecld"))
        assert data["features"].shape == (240, 8)
