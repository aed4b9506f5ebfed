import csv
import io
import json
import pathlib
import subprocess
import sys

import pytest

from kinemetrica import bodies as B
from kinemetrica import cli
from kinemetrica import theory as T

EXAMPLES = pathlib.Path(__file__).resolve().parent.parent / "examples_configs"


def _write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(cfg if isinstance(cfg, str) else json.dumps(cfg))
    return str(path)


SEGMENTS = {
    "experiment_id": "seg",
    "estimator": "mean_length",
    "body": {"shape": "ball", "radius": 1.0},
    "process": {"curve": "segment", "length": 2.0},
    "n_samples": 5000,
    "seed": 3,
}


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_run_segments_writes_csv(tmp_path, capsys):
    out = tmp_path / "out.csv"
    assert cli.main(["run", "--config", _write(tmp_path, SEGMENTS), "--out", str(out)]) == 0
    rows = _rows(out.read_text())
    assert list(rows[0]) == list(cli.COLUMNS)
    row = rows[0]
    assert row["experiment_id"] == "seg" and row["seed"] == "3"
    fresh = T.harmonic_mean_length(2.0, B.ball(1.0)).value
    assert abs(float(row["theory"]) - fresh) < 1e-12
    assert float(row["theory"]) == pytest.approx(0.879802, abs=1e-6)
    est, se = float(row["estimate"]), float(row["std_error"])
    assert float(row["z_score"]) == pytest.approx((est - fresh) / se)


def test_run_is_reproducible(tmp_path, capsys):
    path = _write(tmp_path, SEGMENTS)
    texts = []
    for _ in range(2):
        assert cli.main(["run", "--config", path]) == 0
        texts.append(capsys.readouterr().out)
    strip = [[{k: v for k, v in r.items() if k != "wall_time_s"} for r in _rows(t)] for t in texts]
    assert strip[0] == strip[1]


def test_flags_override_config(tmp_path, capsys):
    assert cli.main(["run", "--config", _write(tmp_path, SEGMENTS), "--seed", "9", "--samples", "2000",
                     "--format", "jsonl"]) == 0
    rec = json.loads(capsys.readouterr().out.splitlines()[0])
    assert rec["seed"] == 9 and rec["n_accepted"] >= 2000


def test_multi_result_estimators_suffix_ids(tmp_path, capsys):
    cfg = dict(SEGMENTS, estimator="small_loop", body={"shape": "ball", "radius": 2.0},
               process={"curve": "circle", "radius": 0.25})
    assert cli.main(["run", "--config", _write(tmp_path, cfg)]) == 0
    ids = [r["experiment_id"] for r in _rows(capsys.readouterr().out)]
    assert ids == ["seg/mean_length", "seg/inclusion_p", "seg/mean_arc", "seg/mean_chi", "seg/mean_chi_open_loop"]


def test_malformed_json_exits_2(tmp_path, capsys):
    assert cli.main(["run", "--config", _write(tmp_path, '{"body": ')]) == 2
    diag = json.loads(capsys.readouterr().err.splitlines()[0])
    assert diag["error"] == "json" and diag["line"] == 1


def test_unknown_keys_exit_2(tmp_path, capsys):
    cfg = dict(SEGMENTS, colour="red")
    cfg["body"] = {"shape": "ball", "radius": 1.0, "centre": [0, 0]}
    assert cli.main(["run", "--config", _write(tmp_path, cfg)]) == 2
    diags = [json.loads(line) for line in capsys.readouterr().err.splitlines()]
    fields = {d["field"] for d in diags}
    assert {"<root>", "body"} <= fields


def test_bad_values_exit_2(tmp_path, capsys):
    for patch in ({"n_samples": 10}, {"estimator": "median"}, {"process": {"curve": "pearson", "length": 5}},
                  {"body": {"shape": "annulus", "r_in": 0.5}}):
        assert cli.main(["run", "--config", _write(tmp_path, dict(SEGMENTS, **patch))]) == 2
    capsys.readouterr()


def test_missing_seed_exits_2(tmp_path, capsys):
    cfg = {k: v for k, v in SEGMENTS.items() if k != "seed"}
    assert cli.main(["run", "--config", _write(tmp_path, cfg)]) == 2
    assert "seed" in capsys.readouterr().err


def test_regime_violation_exits_3(tmp_path, capsys):
    cfg = dict(SEGMENTS, estimator="small_loop", process={"curve": "circle", "radius": 1.5})
    assert cli.main(["run", "--config", _write(tmp_path, cfg)]) == 3
    assert json.loads(capsys.readouterr().err)["error"] == "regime"


def test_verify_passes_and_fails(capsys):
    assert cli.main(["verify", "ocd", "--scale", "0.02", "--seed", "7"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 3 and all(line.startswith("PASS") for line in lines)
    # an impossible tolerance turns every line into a statistical failure
    assert cli.main(["verify", "--suite", "ocd", "--scale", "0.02", "--tol-sigma", "1e-9"]) == 4
    assert "FAIL" in capsys.readouterr().out


def test_verify_invariance_prints_matrix(capsys):
    assert cli.main(["verify", "invariance", "--scale", "0.01"]) == 0
    out = capsys.readouterr().out
    assert "constant_walk vs segment" in out
    assert out.strip().splitlines()[-1].startswith("segment")


def test_verify_unknown_suite(capsys):
    assert cli.main(["verify", "galaxies"]) == 2


def test_listings(capsys):
    assert cli.main(["list-shapes"]) == 0
    shapes = capsys.readouterr().out
    for name in ("ball", "box", "annulus"):
        assert name in shapes
    assert cli.main(["list-processes"]) == 0
    procs = capsys.readouterr().out
    for name in ("segment", "pearson", "circle"):
        assert name in procs


@pytest.mark.parametrize("path", sorted(EXAMPLES.glob("*.json")), ids=lambda p: p.name)
def test_example_configs_validate(path):
    cfg = cli.load_config(str(path))
    assert cfg["experiment_id"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "kinemetrica", "list-shapes"], capture_output=True, text=True,
                          check=True)
    assert "polygon" in proc.stdout
