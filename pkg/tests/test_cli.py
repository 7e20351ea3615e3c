import json

import numpy as np
import pytest

from wenonn import output
from wenonn.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, main
from wenonn.nn import init_network, save_checkpoint


def manifest(path, command):
    return json.loads((path / f"manifest-{command}.json").read_text())


def test_adr_command(tmp_path):
    assert main(["adr", "--scheme", "weno5-js", "--N", "32", "--out-dir", str(tmp_path)]) == EXIT_OK
    cols, data = output.read_csv(tmp_path / "spectrum-weno5-js.csv")
    assert cols == list(output.SPECTRUM_COLUMNS) and len(data) == 17
    cols, data = output.read_csv(tmp_path / "bound-weno5-js.csv")
    assert np.all(data[:, 1] <= data[:, 2] + 1e-12)
    m = manifest(tmp_path, "adr")
    assert m["status"] == "ok" and m["scheme_kind"] == "weno5-js" and m["grid"] == [32]


def test_run_command_1d(tmp_path):
    code = main(["run", "lax", "--scheme", "weno5-z", "--nx", "50", "--tfinal", "0.02",
                 "--snapshot", "0.01", "--out-dir", str(tmp_path)])
    assert code == EXIT_OK
    m = manifest(tmp_path, "run")
    assert len(m["output_paths"]) == 2 and m["grid"] == [50] and m["t_final"] == 0.02
    cols, data = output.read_csv(m["output_paths"][-1])
    assert data.shape == (50, 7)


def test_run_command_2d(tmp_path):
    code = main(["run", "riemann-2d", "--nx", "12", "--ny", "12", "--tfinal", "0.01",
                 "--out-dir", str(tmp_path)])
    assert code == EXIT_OK
    bounds, prim = output.read_snapshot_2d(manifest(tmp_path, "run")["output_paths"][0])
    assert prim.shape == (12, 12, 4)


def test_convergence_and_weights(tmp_path):
    assert main(["convergence", "--scheme", "weno5-z", "--resolutions", "20", "40",
                 "--out-dir", str(tmp_path)]) == EXIT_OK
    cols, data = output.read_csv(tmp_path / "convergence-weno5-z.csv")
    assert data[1, 3] > 4.5
    assert main(["weights", "--scheme", "weno5-js", "--nx", "50", "--out-dir", str(tmp_path)]) == EXIT_OK
    cols, data = output.read_csv(tmp_path / "weights-jump-weno5-js.csv")
    assert np.allclose(data[:, 1:].sum(axis=1), 1.0)


def test_dataset_command(tmp_path):
    assert main(["dataset", "--n-samples", "8", "--seed", "1", "--out-dir", str(tmp_path)]) == EXIT_OK
    d = np.load(tmp_path / "dataset.npz")
    assert d["grid_values"].shape == (8, 101) and d["reference_fluxes"].shape == (8, 100)


def test_train_command(tmp_path):
    cfg = tmp_path / "tiny.cfg"
    cfg.write_text("n_samples = 8\nbatch_size = 4\nepochs = 1\n")
    assert main(["train", "--config", str(cfg), "--out-dir", str(tmp_path)]) == EXIT_OK
    m = manifest(tmp_path, "train")
    assert m["checkpoint_id"] and m["scheme_kind"] == "weno5-z-nn"
    lines = (tmp_path / "history.csv").read_text().splitlines()
    assert lines[0].startswith("epoch,") and len(lines) == 3
    # the checkpoint drives an NN scheme run
    assert main(["adr", "--scheme", "weno5-z-nn", "--checkpoint", str(tmp_path / "checkpoint.json"),
                 "--N", "16", "--out-dir", str(tmp_path)]) == EXIT_OK
    assert manifest(tmp_path, "adr")["checkpoint_id"] == m["checkpoint_id"]


@pytest.mark.parametrize("argv", [
    ["adr", "--scheme", "weno5-z-nn"],
    ["adr", "--scheme", "nope"],
    ["train"],
    ["run", "lax", "--nx", "-3"],
    ["convergence", "--resolutions", "40", "20"],
    ["frobnicate"],
])
def test_configuration_errors(argv, tmp_path):
    assert main(argv + ["--out-dir", str(tmp_path)]) == EXIT_CONFIG


def test_config_error_manifest(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("epochs = 2\nspeed = 9\n")
    assert main(["train", "--config", str(bad), "--out-dir", str(tmp_path)]) == EXIT_CONFIG
    m = manifest(tmp_path, "train")
    assert m["status"] == "config-error" and "bad.cfg:2" in m["message"]


def test_checkpoint_base_mismatch(tmp_path):
    ck = tmp_path / "js.json"
    save_checkpoint(ck, init_network(), "JS")
    assert main(["adr", "--scheme", "weno5-z-nn", "--checkpoint", str(ck), "--out-dir", str(tmp_path)]) == EXIT_CONFIG


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_numeric_failure_exit_code(tmp_path):
    # the blast problem blows up at an CFL number of one
    code = main(["run", "blast", "--nx", "40", "--cfl", "1", "--out-dir", str(tmp_path)])
    assert code == EXIT_NUMERIC
    assert manifest(tmp_path, "run")["status"] == "numeric-error"
