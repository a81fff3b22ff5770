import csv
import json
from fractions import Fraction

import numpy as np
import pytest

from cat0lab import cli
from cat0lab.config import load_config, validate_config
from cat0lab.errors import SchemaError
from cat0lab.records import RunRecord, content_version, jsonable


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


# -- configuration -------------------------------------------------------------------------

def test_schema_rejects_unknown_and_malformed_fields(tmp_path):
    with pytest.raises(SchemaError, match="params"):
        validate_config({"group": {"kind": "free", "rank": 2}, "params": {"bogus": 1}}, "drift")
    with pytest.raises(SchemaError):
        validate_config({"group": {"kind": "free", "rank": 2}, "colour": "red"}, "drift")
    with pytest.raises(SchemaError, match="needs"):
        validate_config({}, "drift")
    with pytest.raises(SchemaError):
        validate_config({"operation": "shalom", "group": {"kind": "free", "rank": 2}}, "drift")
    with pytest.raises(SchemaError):
        validate_config({"group": {"kind": "free"}, "params": {"n_max": 0}}, "drift")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(SchemaError):
        load_config(bad, "drift")


def test_overrides_replace_params(tmp_path):
    path = write(tmp_path, {"group": {"kind": "lattice", "rank": 1}, "params": {"seed": 1, "n_max": 3}})
    cfg = load_config(path, "drift", {"seed": 9})
    assert cfg.get("seed") == 9 and cfg.get("n_max") == 3
    assert cfg.hash != load_config(path, "drift").hash


def test_jsonable_and_record_fields():
    x = jsonable({"f": Fraction(3, 2), "z": 1 + 2j, "a": np.arange(3), "n": np.float64(np.inf),
                  "t": (np.int64(2), np.bool_(True))})
    assert x == {"f": "3/2", "z": [1.0, 2.0], "a": [0, 1, 2], "n": "inf", "t": [2, True]}
    rec = RunRecord("drift", "abc").finish()
    d = rec.to_dict()
    assert set(d) == {"subcommand", "config_hash", "version", "content_version", "started",
                      "finished", "passed", "warnings", "payload"}
    assert d["content_version"] == content_version() and len(d["content_version"]) == 12


# -- command line ----------------------------------------------------------------------------

def test_drift_writes_csv_and_record(tmp_path, capsys):
    cfg = write(tmp_path, {"group": {"kind": "lattice", "rank": 1}, "params": {"n_max": 10}})
    out = tmp_path / "out"
    code, stdout, _ = run(["drift", "--config", cfg, "--out", str(out)], capsys)
    assert code == 0 and "PASS" in stdout
    rows = list(csv.DictReader(open(out / "drift.csv")))
    assert list(rows[0]) == ["n", "Ln", "Ltilde", "Ln_over_n", "stderr"]
    assert float(rows[3]["Ln"]) == 1.5
    rec = json.loads((out / "drift.json").read_text())
    assert rec["passed"] and rec["payload"]["subadditivity_violations"] == []


def test_runs_are_deterministic_given_a_seed(tmp_path, capsys):
    cfg = write(tmp_path, {"group": {"kind": "free", "rank": 2}, "params": {"n_max": 20}})
    args = ["drift", "--config", cfg, "--monte-carlo", "--samples", "500", "--seed", "4"]
    _, first, _ = run(args, capsys)
    _, second, _ = run(args, capsys)
    a, b = json.loads(first), json.loads(second)
    assert a["payload"] == b["payload"] and a["config_hash"] == b["config_hash"]
    _, third, _ = run(args[:-1] + ["5"], capsys)
    assert json.loads(third)["payload"]["Ln"] != a["payload"]["Ln"]


@pytest.mark.parametrize("sub,cfg", [
    ("conv-comb", {"group": {"kind": "free", "rank": 2}, "params": {"n_max": 4}}),
    ("fixed-point", {"example": "z4_rotation_plane"}),
    ("fixed-point", {"group": {"kind": "cyclic", "order": 4}, "space": {"kind": "euclidean", "dim": 2},
                     "action": {"generators": [{"matrix": [[0, -1], [1, 0]], "translation": [0, 0]}]},
                     "params": {"start": [1.0, 2.0]}}),
    ("shalom", {"example": "parabolic_h2", "params": {"n_max": 3}}),
    ("grigorchuk-audit", {"params": {"radius": 3, "spot_checks": 100}}),
    ("space-check", {"spaces": [{"kind": "euclidean", "dim": 3}, {"kind": "hyperbolic_plane"}],
                     "params": {"samples": 300}}),
])
def test_subcommands_pass(tmp_path, capsys, sub, cfg):
    code, stdout, err = run([sub, "--config", write(tmp_path, cfg)], capsys)
    assert code == 0, err
    rec = json.loads(stdout)
    assert rec["subcommand"] == sub and rec["passed"]


def test_fixed_point_payload(tmp_path, capsys):
    _, stdout, _ = run(["fixed-point", "--config", write(tmp_path, {"example": "z_translation_line"})],
                       capsys)
    payload = json.loads(stdout)["payload"]
    assert payload["found"] is False and payload["delta_inf"] == 1.5


def test_errors_exit_one(tmp_path, capsys):
    bad = write(tmp_path, {"group": {"kind": "free", "rank": 2}, "params": {"bogus": 1}})
    code, _, err = run(["drift", "--config", bad], capsys)
    assert code == 1 and "error" in err
    code, _, err = run(["drift", "--config", str(tmp_path / "missing.json")], capsys)
    assert code == 1
    code, _, _ = run(["fixed-point", "--config", write(tmp_path, {"example": "nope"})], capsys)
    assert code == 1
    with pytest.raises(SystemExit):
        cli.main(["drift"])


def test_violation_exits_two(tmp_path, capsys, monkeypatch):
    class Failing:
        passed = False

        def to_dict(self):
            return {"passed": False}

    monkeypatch.setattr(cli, "check_space", lambda *a, **k: Failing())
    cfg = write(tmp_path, {"space": {"kind": "euclidean", "dim": 2}})
    code, stdout, _ = run(["space-check", "--config", cfg, "--out", str(tmp_path / "o")], capsys)
    assert code == 2 and "VIOLATION" in stdout


def test_cache_dir_from_environment(tmp_path, capsys, monkeypatch):
    cache = tmp_path / "cache"
    monkeypatch.setenv(cli.CACHE_ENV, str(cache))
    cfg = write(tmp_path, {"params": {"radius": 2, "spot_checks": 10}})
    code, stdout, _ = run(["grigorchuk-audit", "--config", cfg], capsys)
    assert code == 0
    assert json.loads(stdout)["payload"]["cache_dir"] == str(cache)
    assert any(cache.iterdir())
    flag = tmp_path / "flag"
    run(["grigorchuk-audit", "--config", cfg, "--cache-dir", str(flag)], capsys)
    assert any(flag.iterdir())


def test_tol_flag_reaches_space_check(tmp_path, capsys):
    cfg = write(tmp_path, {"space": {"kind": "hyperbolic_plane"}, "params": {"samples": 100}})
    _, stdout, _ = run(["space-check", "--config", cfg, "--tol", "1e-7"], capsys)
    rep = json.loads(stdout)["payload"]["reports"][0]
    assert rep["tol"] == 1e-7
