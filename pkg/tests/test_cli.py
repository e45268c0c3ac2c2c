import json
import re
import subprocess
import sys

import jsonschema
import pytest

from gafoundry import instances_csv
from gafoundry.cli import TUNING_REPORT_SCHEMA, _parse_fid_list, main

EA_STRING = "P5 C0 s0 c0 a0 M0 u0 m1 r0 O0"


def invoke(args, env=None):
    return subprocess.run(
        [sys.executable, "-m", "gafoundry.cli", *args],
        capture_output=True,
        env=env,
    )


def test_fid_list_parser():
    assert _parse_fid_list("1-4") == [1, 2, 3, 4]
    assert _parse_fid_list("1,5,9") == [1, 5, 9]
    assert _parse_fid_list("1-3,7") == [1, 2, 3, 7]
    with pytest.raises(ValueError):
        _parse_fid_list(",")


# --------------------------------------------------------------------------- run


def test_run_prints_auc_and_writes_artifacts(tmp_path):
    code = main(["run", EA_STRING, "--fid", "1", "--seed", "3", "--out", str(tmp_path)])
    assert code == 0
    traj = tmp_path / "trajectory_fid1_seed3.csv"
    art = tmp_path / "run_fid1_seed3.json"
    assert traj.exists() and art.exists()
    artifact = json.loads(art.read_text())
    assert 0.0 <= artifact["auc"] <= 10_000.0
    assert artifact["evals_used"] == 100
    assert len(traj.read_text().strip().splitlines()) == 1 + len(artifact["trajectory"])


def test_run_is_byte_identical(tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    r1 = invoke(["run", EA_STRING, "--fid", "1", "--seed", "3", "--out", str(out_a)])
    r2 = invoke(["run", EA_STRING, "--fid", "1", "--seed", "3", "--out", str(out_b)])
    assert r1.returncode == r2.returncode == 0
    assert re.fullmatch(rb"auc=[0-9.]+\n", r1.stdout)
    assert r1.stdout == r2.stdout
    for name in ("trajectory_fid1_seed3.csv", "run_fid1_seed3.json"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_run_rejects_malformed_config(tmp_path):
    result = invoke(["run", "P5 Cx s0 c0 a0 M0 u0 m1 r0 O0", "--fid", "1", "--out", str(tmp_path)])
    assert result.returncode == 2
    assert b"Cx" in result.stderr


def test_run_rejects_unknown_fid(tmp_path):
    code = main(["run", EA_STRING, "--fid", "99", "--out", str(tmp_path)])
    assert code == 2


def test_output_dir_env_default(tmp_path):
    import os

    env = dict(os.environ)
    env["GAFOUNDRY_OUT"] = str(tmp_path / "fromenv")
    result = invoke(["run", EA_STRING, "--fid", "1", "--seed", "0"], env=env)
    assert result.returncode == 0
    assert (tmp_path / "fromenv" / "run_fid1_seed0.json").exists()


# --------------------------------------------------------------------------- target runner


def test_target_runner_prints_negated_auc(tmp_path):
    runner = invoke(
        [
            "target-runner", "7", "1", "3", "1",
            "--pc", "0", "--selc", "0", "--cross", "0", "--pm", "0",
            "--selm", "0", "--mut", "1", "--repl", "0",
        ]
    )
    assert runner.returncode == 0
    line = runner.stdout.decode().strip()
    assert re.fullmatch(r"-?[0-9]+(\.[0-9]+)?", line)
    direct = invoke(["run", EA_STRING, "--fid", "1", "--seed", "3", "--out", str(tmp_path)])
    auc = float(direct.stdout.decode().strip().split("=")[1])
    assert float(line) == -auc


def test_target_runner_rejects_unknown_slot():
    result = invoke(["target-runner", "7", "1", "3", "1", "--bogus", "0"])
    assert result.returncode == 1
    assert b"bogus" in result.stderr


def test_target_runner_requires_all_slots():
    result = invoke(["target-runner", "7", "1", "3", "1", "--pc", "0"])
    assert result.returncode == 1


def test_target_runner_handles_bad_instance():
    result = invoke(
        [
            "target-runner", "7", "1", "3", "99",
            "--pc", "0", "--selc", "0", "--cross", "0", "--pm", "0",
            "--selm", "0", "--mut", "1", "--repl", "0",
        ]
    )
    assert result.returncode == 1


# --------------------------------------------------------------------------- baselines


def test_baselines_parallel_matches_serial(tmp_path):
    args = ["baselines", "--fids", "1,3", "--runs", "2", "--seed", "5"]
    assert main(args + ["--jobs", "1", "--out", str(tmp_path / "serial")]) == 0
    assert main(args + ["--jobs", "2", "--out", str(tmp_path / "pool")]) == 0
    assert (tmp_path / "serial" / "baselines.csv").read_bytes() == (
        tmp_path / "pool" / "baselines.csv"
    ).read_bytes()


def test_campaign_accepts_explicit_configurations():
    from gafoundry import Configuration, instances
    from gafoundry.cli import ExperimentSpec, run_baseline_campaign

    spec = ExperimentSpec(
        fids=[1],
        configs=["EA", Configuration(pc_idx=0, selm_idx=0, mut_idx=6, repl_idx=0)],
        runs=2,
        seed=3,
    )
    rows = run_baseline_campaign(spec)
    assert [r["algo"] for r in rows] == ["EA", "P5 C0 s0 c0 a0 M0 u0 m6 r0 O0"]
    assert len({r["best"] for r in rows}) == 1


def test_tune_parallel_matches_serial(tmp_path):
    args = [
        "tune", "--fid", "3", "--seed", "21", "--total-runs", "400",
        "--validation-runs", "5",
    ]
    assert main(args + ["--jobs", "1", "--out", str(tmp_path / "serial")]) == 0
    assert main(args + ["--jobs", "2", "--out", str(tmp_path / "pool")]) == 0
    assert (tmp_path / "serial" / "tuning_fid3.json").read_bytes() == (
        tmp_path / "pool" / "tuning_fid3.json"
    ).read_bytes()


def test_baselines_csv_shape(tmp_path):
    code = main(
        [
            "baselines", "--fids", "1,3", "--runs", "3", "--seed", "1",
            "--jobs", "1", "--out", str(tmp_path),
        ]
    )
    assert code == 0
    lines = (tmp_path / "baselines.csv").read_text().strip().splitlines()
    assert lines[0] == "fid,algo,runs,mean_auc,std_auc,best"
    assert len(lines) == 1 + 2 * 4
    for line in lines[1:]:
        fid, algo, runs, mean_auc, std_auc, best = line.split(",")
        assert fid in ("1", "3") and runs == "3"
        assert algo in ("EA", "fEA", "xGA", "1ptGA")
        assert best in ("EA", "fEA", "xGA", "1ptGA")
        assert 0.0 <= float(mean_auc) <= 10_000.0


# --------------------------------------------------------------------------- tune


def test_tune_report_validates_and_is_deterministic(tmp_path):
    args = [
        "tune", "--fid", "3", "--seed", "11", "--total-runs", "400",
        "--validation-runs", "5", "--jobs", "1",
    ]
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    r1 = invoke(args + ["--out", str(out_a)])
    r2 = invoke(args + ["--out", str(out_b)])
    assert r1.returncode == 0, r1.stderr.decode()
    assert r1.stdout == r2.stdout
    report = json.loads((out_a / "tuning_fid3.json").read_text())
    jsonschema.validate(report, TUNING_REPORT_SCHEMA)
    assert (out_a / "tuning_fid3.json").read_bytes() == (out_b / "tuning_fid3.json").read_bytes()
    assert (out_a / "validation_fid3.csv").read_bytes() == (out_b / "validation_fid3.csv").read_bytes()
    lines = (out_a / "validation_fid3.csv").read_text().strip().splitlines()
    assert lines[0] == "config,run,auc"
    assert len(lines) == 1 + len(report["elites"]) * 5
    assert report["best_baseline"]["name"] in ("EA", "fEA", "xGA", "1ptGA")


# --------------------------------------------------------------------------- export


def test_export_round_trips_run_artifacts(tmp_path):
    main(["run", EA_STRING, "--fid", "1", "--seed", "3", "--out", str(tmp_path)])
    art = tmp_path / "run_fid1_seed3.json"
    code = main(["export", "trajectories", str(art), "--out", str(tmp_path / "exp")])
    assert code == 0
    exported = (tmp_path / "exp" / "trajectory_run_fid1_seed3.csv").read_text()
    assert exported == (tmp_path / "trajectory_fid1_seed3.csv").read_text()
    artifact = json.loads(art.read_text())
    assert len(exported.strip().splitlines()) == 1 + len(artifact["trajectory"])

    code = main(["export", "histograms", str(art), "--out", str(tmp_path / "exp")])
    assert code == 0
    hist_csv = (tmp_path / "exp" / "histogram_run_fid1_seed3.csv").read_text()
    assert len(hist_csv.strip().splitlines()) == 1 + artifact["target_buckets"]
    # re-export is byte-identical
    code = main(["export", "histograms", str(art), "--out", str(tmp_path / "exp2")])
    assert code == 0
    assert (tmp_path / "exp2" / "histogram_run_fid1_seed3.csv").read_text() == hist_csv


def test_export_maximal_run_is_all_ones(tmp_path):
    artifact = {
        "fid": 1,
        "config": EA_STRING,
        "seed": 0,
        "n": 20,
        "v_max": 10,
        "budget": 100,
        "target_buckets": 10,
        "budget_buckets": 10,
        "auc": 100.0,
        "evals_used": 100,
        "best_value": 10,
        "trajectory": [[1, 10]],
        "attainment": {"run_count": 1, "counts": [[1] * 10 for _ in range(10)]},
    }
    src = tmp_path / "run_max.json"
    src.write_text(json.dumps(artifact))
    code = main(["export", "histograms", str(src), "--out", str(tmp_path)])
    assert code == 0
    lines = (tmp_path / "histogram_run_max.csv").read_text().strip().splitlines()
    for row in lines[1:]:
        assert all(float(cell) == 1.0 for cell in row.split(","))


def test_export_missing_artifact_fails(tmp_path):
    code = main(["export", "histograms", str(tmp_path / "nope.json"), "--out", str(tmp_path)])
    assert code == 1


# --------------------------------------------------------------------------- instances


def test_instances_subcommand_emits_suite(tmp_path, capsys):
    assert main(["instances"]) == 0
    assert capsys.readouterr().out == instances_csv()
    target = tmp_path / "suite.csv"
    assert main(["instances", "--out", str(target)]) == 0
    assert target.read_text() == instances_csv()


def test_custom_instances_file(tmp_path):
    suite = "fid,dim,neutrality_mu,epistasis_nu,ruggedness_gamma,v_max\n42,10,1,2,3,10\n"
    path = tmp_path / "custom.csv"
    path.write_text(suite)
    code = main(
        ["run", EA_STRING, "--fid", "42", "--seed", "1", "--instances", str(path), "--out", str(tmp_path)]
    )
    assert code == 0
    assert (tmp_path / "run_fid42_seed1.json").exists()
