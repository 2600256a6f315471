import hashlib
import json
import subprocess
import sys

import pytest

from latenttree.cli import main
from latenttree.io import read_json, write_json
from latenttree.model import GroundTruthModel, exact_distance_matrix


def digest(*paths):
    return [hashlib.sha256(p.read_bytes()).hexdigest() for p in paths]


@pytest.fixture
def hmm_files(tmp_path):
    model, data = tmp_path / "m.json", tmp_path / "x.csv"
    assert main(["generate", "--archetype", "hmm", "--diameter", "6", "--l-max", "2", "--rho-edge", "0.3",
                 "--n", "20000", "--seed", "3", "--model-out", str(model), "--data-out", str(data)]) == 0
    return model, data


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "generate" in capsys.readouterr().out
    r = subprocess.run([sys.executable, "-m", "latenttree", "learn", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "--algo" in r.stdout


def test_odd_n1_is_usage_error(tmp_path, hmm_files, capsys):
    _, data = hmm_files
    code = main(["corrupt", "--data", str(data), "--pattern", "uniform", "--n1", "3", "--out", str(tmp_path / "y.csv")])
    assert code == 2
    assert "even" in capsys.readouterr().err


def test_missing_input_and_unknown_flag(tmp_path, capsys):
    assert main(["eval", "--tree", str(tmp_path / "nope.json"), "--truth", str(tmp_path / "nope.json")]) == 2
    assert "not found" in capsys.readouterr().err
    assert main(["learn", "--bogus"]) == 2


def test_malformed_json_reports_location(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"a": 1,\n  oops}')
    assert main(["bounds", "--params", str(bad), "--out", str(tmp_path / "b.json")]) == 2
    assert "line 2" in capsys.readouterr().err


def test_runtime_failure_exits_one(tmp_path, hmm_files):
    _, data = hmm_files
    assert main(["learn", "--algo", "rg", "--data", str(data), "--l-max", "3", "--out", str(tmp_path / "t.json")]) == 1


def test_learn_from_exact_distances(tmp_path, hmm_files):
    model, _ = hmm_files
    m = GroundTruthModel.from_dict(read_json(model))
    D = tmp_path / "D.json"
    write_json(D, exact_distance_matrix(m).to_dict())
    out, rep = tmp_path / "T.json", tmp_path / "rf.json"
    assert main(["learn", "--algo", "rclrg", "--distances", str(D), "--out", str(out)]) == 0
    assert out.with_suffix(".nwk").exists()
    assert main(["eval", "--tree", str(out), "--truth", str(model), "--out", str(rep)]) == 0
    assert read_json(rep)["rf"] == 0


def test_corrupt_learn_pipeline_deterministic_and_read_only(tmp_path, hmm_files):
    model, data = hmm_files
    before = digest(model, data)
    y, audit = tmp_path / "y.csv", tmp_path / "audit.json"
    args = ["corrupt", "--data", str(data), "--model", str(model), "--pattern", "constant_magnitude", "--n1", "60",
            "--seed", "5", "--out", str(y), "--audit", str(audit)]
    assert main(args) == 0
    first = digest(y)
    assert main(args) == 0
    assert digest(y) == first
    a = read_json(audit)
    assert a["max"] == 30 and a["budget_per_column"] == 30
    outs = []
    for k in range(2):
        t = tmp_path / f"t{k}.json"
        assert main(["learn", "--algo", "rclrg", "--data", str(y), "--n1", "60", "--out", str(t)]) == 0
        outs.append(t.read_bytes())
    assert outs[0] == outs[1]
    rep = tmp_path / "rf.json"
    assert main(["eval", "--tree", str(tmp_path / "t0.json"), "--truth", str(model), "--out", str(rep)]) == 0
    assert read_json(rep)["rf"] == 0
    plain = tmp_path / "p.json"
    assert main(["learn", "--algo", "clrg", "--data", str(y), "--out", str(plain)]) == 0
    assert read_json(plain)["provenance"]["distance_flag"] == "plain_estimate"
    assert digest(model, data) == before


def test_bounds_subcommand(tmp_path):
    out = tmp_path / "b.json"
    args = ["bounds", "--set", "l_max=1", "--set", "rho_min=1.0", "--set", "rho_max=1.0", "--set", "delta_min=1.0",
            "--set", "sigma_max_sq=1.0", "--set", "V_obs=4", "--set", "eta=0.1", "--set", "delta=0.1",
            "--out", str(out)]
    assert main(args) == 0
    doc = read_json(out)
    assert doc["sample_complexity"]["rnj"]["n2_required"] == pytest.approx(2727.8366, rel=1e-6)
    assert "skipped" in doc["sample_complexity"]["rrg"]
    assert "fano_lower_bound" in doc and "snj_gap_g" in doc
    assert main(args[:-2] + ["--algorithm", "rrg", "--out", str(out)]) == 2


def test_experiment_seed_env(tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"model": {"archetype": "hmm", "diameter": 4}, "sample_counts": [200, 400],
                               "algorithms": ["rg", "nj"], "trials": 2, "base_seed": 1,
                               "corruption": {"pattern": "uniform", "n1": 10}}))
    runs = []
    for k, seed in enumerate([None, None, "99"]):
        if seed is None:
            monkeypatch.delenv("EXPERIMENT_SEED", raising=False)
        else:
            monkeypatch.setenv("EXPERIMENT_SEED", seed)
        csv, summary = tmp_path / f"r{k}.csv", tmp_path / f"s{k}.json"
        assert main(["experiment", "--config", str(cfg), "--csv", str(csv), "--summary", str(summary)]) == 0
        runs.append(csv.read_bytes())
    assert runs[0] == runs[1] != runs[2]
    assert read_json(tmp_path / "s2.json")["config"]["base_seed"] == 99
    monkeypatch.setenv("EXPERIMENT_SEED", "abc")
    assert main(["experiment", "--config", str(cfg), "--csv", str(tmp_path / "z.csv")]) == 2
