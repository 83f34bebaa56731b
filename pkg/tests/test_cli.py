import json

import numpy as np
import pytest

from fmmnn.cli import main


def write_cfg(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


TRAIN_CFG = {
    "target": "runge100",
    "model": {"kind": "mmnn", "width": 16, "rank": 4, "depth": 2,
              "activation": "sine"},
    "data": {"train_n": 200, "test_n": 100, "mode": "uniform-random"},
    "train": {"epochs": 2, "batch_size": 100, "lr_base": 1e-3,
              "lr_decay": 0.9, "lr_step": 100},
    "seed": 5,
}


class TestParams:
    def test_table_value(self, capsys):
        rc = main(["params", "--kind", "mmnn", "--width", "434", "--rank",
                   "16", "--depth", "6"])
        assert rc == 0
        assert capsys.readouterr().out.strip() == "35235 / 72993"

    def test_fcnn(self, capsys):
        rc = main(["params", "--kind", "fcnn", "--width", "120", "--depth",
                   "6"])
        assert rc == 0
        assert capsys.readouterr().out.strip() == "72961 / 72961"


class TestTrain:
    def test_artifacts(self, tmp_path):
        cfg = write_cfg(tmp_path, "c.json", TRAIN_CFG)
        rc = main(["--config", cfg, "--out", str(tmp_path / "o"), "train"])
        assert rc == 0
        out = tmp_path / "o"
        assert (out / "report.csv").exists()
        assert (out / "model.json").exists()
        summary = json.loads((out / "summary.json").read_text())
        assert summary["params_trainable"] == 16 * 4 + 4 + 16 + 1
        assert summary["epochs"] == 2
        lines = (out / "report.csv").read_text().strip().split("\n")
        assert lines[0] == "epoch,lr,train_mse,test_mse,test_max"
        assert len(lines) == 4  # header + epoch-0 row + 2 epochs

    def test_epochs_zero_single_row(self, tmp_path):
        cfg = dict(TRAIN_CFG, train=dict(TRAIN_CFG["train"], epochs=0))
        p = write_cfg(tmp_path, "c.json", cfg)
        rc = main(["--config", p, "--out", str(tmp_path / "o"), "train"])
        assert rc == 0
        lines = (tmp_path / "o" / "report.csv").read_text().strip().split("\n")
        assert len(lines) == 2

    def test_determinism_bit_identical(self, tmp_path):
        cfg = write_cfg(tmp_path, "c.json", TRAIN_CFG)
        main(["--config", cfg, "--out", str(tmp_path / "a"), "train"])
        main(["--config", cfg, "--out", str(tmp_path / "b"), "train"])
        assert (tmp_path / "a" / "report.csv").read_bytes() == \
            (tmp_path / "b" / "report.csv").read_bytes()
        assert (tmp_path / "a" / "model.json").read_bytes() == \
            (tmp_path / "b" / "model.json").read_bytes()

    def test_bad_activation_exit_2(self, tmp_path, capsys):
        cfg = dict(TRAIN_CFG,
                   model=dict(TRAIN_CFG["model"], activation="sintu:abc"))
        p = write_cfg(tmp_path, "c.json", cfg)
        rc = main(["--config", p, "--out", str(tmp_path / "o"), "train"])
        assert rc == 2
        assert "activation" in capsys.readouterr().err

    def test_missing_field_exit_2(self, tmp_path, capsys):
        cfg = {k: v for k, v in TRAIN_CFG.items() if k != "target"}
        p = write_cfg(tmp_path, "c.json", cfg)
        rc = main(["--config", p, "--out", str(tmp_path / "o"), "train"])
        assert rc == 2
        assert "target" in capsys.readouterr().err

    def test_divergence_exit_3(self, tmp_path, capsys):
        cfg = dict(TRAIN_CFG, target="s32.f1",
                   train=dict(TRAIN_CFG["train"], epochs=50, lr_base=1e12))
        p = write_cfg(tmp_path, "c.json", cfg)
        rc = main(["--config", p, "--out", str(tmp_path / "o"), "train"])
        assert rc == 3
        assert "epoch" in capsys.readouterr().err


class TestEval:
    def test_round_trip(self, tmp_path):
        cfg = write_cfg(tmp_path, "c.json", TRAIN_CFG)
        main(["--config", cfg, "--out", str(tmp_path / "o"), "train"])
        ecfg = write_cfg(tmp_path, "e.json", {
            "target": "runge100",
            "model_file": str(tmp_path / "o" / "model.json"),
            "data": {"train_n": 10, "test_n": 100,
                     "mode": "uniform-random"},
            "seed": 5,
        })
        rc = main(["--config", ecfg, "--out", str(tmp_path / "e"), "eval"])
        assert rc == 0
        summary = json.loads((tmp_path / "e" / "summary.json").read_text())
        train_summary = json.loads(
            (tmp_path / "o" / "summary.json").read_text())
        assert summary["mse"] == pytest.approx(
            train_summary["final_test_mse"])


class TestLandscape:
    def test_analytic_case(self, tmp_path):
        cfg = write_cfg(tmp_path, "l.json", {
            "case": "L2", "wstar": [1, 2],
            "ranges": [[-3, 3], [-3, 3]], "resolution": 4,
        })
        rc = main(["--config", cfg, "--out", str(tmp_path / "o"),
                   "landscape"])
        assert rc == 0
        lines = (tmp_path / "o" / "grid.csv").read_text().strip().split("\n")
        assert lines[0] == "w1,w2,loss"
        assert len(lines) == 1 + 16
        meta = json.loads((tmp_path / "o" / "grid_meta.json").read_text())
        assert meta["case"] == "L2"

    def test_model_slice_random_pick(self, tmp_path):
        cfg = write_cfg(tmp_path, "l.json", {
            "target": "runge100",
            "model": {"kind": "mmnn", "width": 8, "rank": 2, "depth": 2},
            "data": {"train_n": 32, "test_n": 2, "mode": "grid"},
            "pick": "random:3", "resolution": 3,
        })
        rc = main(["--config", cfg, "--out", str(tmp_path / "o"),
                   "landscape"])
        assert rc == 0
        meta = json.loads((tmp_path / "o" / "grid_meta.json").read_text())
        assert len(meta["coords"]) == 2
        assert "model_hash" in meta


class TestConstruct:
    def test_floor_verification_csv(self, tmp_path):
        rc = main(["--out", str(tmp_path / "o"), "construct", "floor",
                   "--N", "2", "--L", "2", "--delta", "0.1"])
        assert rc == 0
        lines = (tmp_path / "o" / "verify.csv").read_text().strip().split("\n")
        assert lines[0] == "x,value,oracle,abs_error"
        errs = [float(ln.split(",")[3]) for ln in lines[1:]]
        assert max(errs) < 1e-9

    def test_sintu_relu(self, tmp_path):
        rc = main(["--out", str(tmp_path / "o"), "construct", "sintu-relu",
                   "--s", "0", "--eps", "1e-3"])
        assert rc == 0
        summary = json.loads((tmp_path / "o" / "summary.json").read_text())
        assert summary["sup_error"] <= 2e-7

    def test_sinematch_success(self, tmp_path):
        cfg = write_cfg(tmp_path, "s.json",
                        {"y": [0.9, -0.4, 0.2], "eps": 0.1})
        rc = main(["--config", cfg, "--out", str(tmp_path / "o"),
                   "construct", "sinematch"])
        assert rc == 0
        summary = json.loads((tmp_path / "o" / "summary.json").read_text())
        assert summary["success"] and summary["achieved_eps"] < 0.1

    def test_sinematch_budget_exhaustion_exit_4(self, tmp_path):
        cfg = write_cfg(tmp_path, "s.json", {
            "y": [0.9, -0.85, 0.7, -0.6, 0.5], "eps": 1e-9, "budget": 2000,
        })
        rc = main(["--config", cfg, "--out", str(tmp_path / "o"),
                   "construct", "sinematch"])
        assert rc == 4

    def test_theorem1d(self, tmp_path):
        rc = main(["--out", str(tmp_path / "o"), "construct", "theorem1d",
                   "--target", "abs-half", "--N", "2", "--L", "2"])
        assert rc == 0
        summary = json.loads((tmp_path / "o" / "summary.json").read_text())
        assert summary["within_bound"]


class TestInitCompare:
    def test_paired_reports(self, tmp_path):
        cfg = write_cfg(tmp_path, "c.json", dict(TRAIN_CFG))
        rc = main(["--config", cfg, "--out", str(tmp_path / "o"),
                   "init-compare"])
        assert rc == 0
        out = tmp_path / "o"
        assert (out / "report_default.csv").exists()
        assert (out / "report_scaled.csv").exists()
        summary = json.loads((out / "summary.json").read_text())
        assert summary["scaled_better"] == (
            summary["final_test_mse_scaled"]
            < summary["final_test_mse_default"])

    def test_epochs_zero_differs_only_via_first_layer(self, tmp_path):
        cfg = dict(TRAIN_CFG, train=dict(TRAIN_CFG["train"], epochs=0))
        p = write_cfg(tmp_path, "c.json", cfg)
        rc = main(["--config", p, "--out", str(tmp_path / "o"),
                   "init-compare"])
        assert rc == 0
        from fmmnn.models import load_model

        md = load_model(tmp_path / "o" / "model_default.json")
        ms = load_model(tmp_path / "o" / "model_scaled.json")
        for a, b in zip(md.trainable_arrays(), ms.trainable_arrays()):
            assert np.array_equal(a, b)
        assert not np.array_equal(md.layers[0].W, ms.layers[0].W)
        assert np.array_equal(md.layers[1].W, ms.layers[1].W)
