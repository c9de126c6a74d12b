import hashlib
import json
import subprocess
import sys
from pathlib import Path

import pytest

from spinlattice.cli import format_number, main, to_json
from spinlattice.experiments import load_schema, validate_config

SMALL_SWEEP = {
    "experiment": "lr-sweep",
    "model": {"model": "xxz", "Jx": 1.0, "Jy": 1.0, "Jz": 0.5, "h": 0.3, "L": 5},
    "grid": {"t": [0.0, 0.25, 0.5, 0.75], "dist": [1, 2, 3, 4]},
    "seed": 3,
    "options": {"lambda": 1.0, "N": 2},
    "output": {"path": "sweep.csv", "format": "csv"},
}


def write_config(tmp_path, config, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(config))
    return str(path)


def test_toric_degeneracy_on_stdout(capsys):
    assert main(["toric", "--L", "2", "--degeneracy"]) == 0
    assert json.loads(capsys.readouterr().out) == {"degeneracy": 4}


def test_toric_query(capsys):
    assert main(["toric", "--L", "3", "--query", "Z@(h,0,0)*Z@(h,0,1)*Z@(v,0,0)*Z@(v,1,0)", "--query", "Y@(h,0,0)"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert list(out["queries"].values()) == [1.0, 0.0]


def test_bad_query_is_rejected(capsys):
    assert main(["toric", "--L", "2", "--query", "Q@(h,0,0)"]) == 2


def test_lr_sweep_csv_and_manifest(tmp_path):
    assert main(["run", write_config(tmp_path, SMALL_SWEEP), "--out-dir", str(tmp_path), "--jobs", "1"]) == 0
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == "t,dist,empirical,bound_rough,bound_sharp"
    assert len(lines) == 1 + 4 * 4
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["status"] == "ok"
    assert manifest["output"] == "sweep.csv"
    assert manifest["output_sha256"] == hashlib.sha256((tmp_path / "sweep.csv").read_bytes()).hexdigest()
    assert manifest["seed"] == 3
    for row in lines[1:]:
        t, dist, emp, rough, _ = row.split(",")
        assert float(emp) <= float(rough)


def test_reruns_are_byte_identical_across_jobs(tmp_path):
    outputs = []
    for jobs in ("1", "2"):
        out_dir = tmp_path / f"jobs{jobs}"
        assert main(["run", write_config(tmp_path, SMALL_SWEEP), "--out-dir", str(out_dir), "--jobs", jobs]) == 0
        outputs.append((out_dir / "sweep.csv").read_bytes())
    assert outputs[0] == outputs[1]


def test_seeded_samples_identical_across_jobs(tmp_path):
    config = {
        "experiment": "passivity",
        "model": {"model": "xxz", "Jx": 1.0, "Jy": 1.0, "Jz": 0.5, "h": 0.3, "L": 4},
        "grid": {"beta": [0.5]},
        "options": {"samples": 12},
        "seed": 11,
        "output": {"path": "p.csv"},
    }
    texts = []
    for jobs in ("1", "3"):
        out_dir = tmp_path / jobs
        assert main(["run", write_config(tmp_path, config), "--out-dir", str(out_dir), "--jobs", jobs]) == 0
        texts.append((out_dir / "p.csv").read_text())
    assert texts[0] == texts[1]


def test_schema_rejection_exit_code(tmp_path, capsys):
    bad = dict(SMALL_SWEEP, unexpected=True)
    assert main(["run", write_config(tmp_path, bad), "--out-dir", str(tmp_path)]) == 2
    assert not (tmp_path / "sweep.csv").exists()
    wrong = dict(SMALL_SWEEP, model={"model": "xxz", "L": 99})
    assert main(["run", write_config(tmp_path, wrong)]) == 2
    assert main(["run", str(tmp_path / "missing.json")]) == 2


def test_guard_exit_code_leaves_no_files(tmp_path):
    config = {
        "experiment": "kms-check",
        "model": {"model": "xxz", "L": 3},
        "grid": {"beta": [5000.0], "t": [0.0]},
        "options": {"samples": 2},
        "output": {"path": "kms.csv"},
    }
    assert main(["run", write_config(tmp_path, config), "--out-dir", str(tmp_path / "out")]) == 3
    assert not (tmp_path / "out").exists() or not any((tmp_path / "out").iterdir())


def test_invariant_exit_code(tmp_path):
    config = {
        "experiment": "kms-check",
        "model": {"model": "xxz", "L": 3},
        "grid": {"beta": [1.0], "t": [0.3]},
        "options": {"samples": 3},
        "tolerances": {"kms": 0.0},
        "output": {"path": "kms.csv"},
    }
    assert main(["run", write_config(tmp_path, config), "--out-dir", str(tmp_path)]) == 4
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["status"] == "invariant-failed"


def test_json_only_experiment_rejects_csv(tmp_path):
    config = {"experiment": "gns", "model": {"model": "none"}, "output": {"path": "g.csv", "format": "csv"}}
    assert main(["run", write_config(tmp_path, config), "--out-dir", str(tmp_path)]) == 2
    assert not (tmp_path / "g.csv").exists()


def test_gns_subcommand(capsys):
    assert main(["gns"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert set(out) >= {"gns_dim", "commutant_dim", "is_pure", "reconstruction_residual"}


def test_shipped_configs_validate():
    for path in sorted((Path(__file__).parents[1] / "configs").glob("*.json")):
        validate_config(json.loads(path.read_text()))
    assert load_schema()["additionalProperties"] is False


def test_number_formatting():
    assert format_number(0.1) == "0.10000000000000001"
    assert format_number(3) == "3"
    assert format_number(None) == ""
    assert to_json({"a": float("inf"), "b": [1, 0.5]}) == '{"a": "inf", "b": [1, 0.5]}\n'


@pytest.mark.slow
def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "spinlattice.cli", "toric", "--L", "2", "--degeneracy"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout == '{"degeneracy": 4}\n'
