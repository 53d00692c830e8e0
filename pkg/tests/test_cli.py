import contextlib
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

jsonschema = pytest.importorskip("jsonschema")

from mbpre.cli import main

SCHEMA_DIR = Path(__file__).resolve().parents[1] / "schemas"
ENVELOPE_SCHEMA = json.loads((SCHEMA_DIR / "cli_output.schema.json").read_text())
MODEL_SCHEMA = json.loads((SCHEMA_DIR / "model.schema.json").read_text())


def run_cli(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue(), err.getvalue()


def run_json(argv):
    code, out, err = run_cli(argv + ["--json"])
    assert code == 0, err
    envelope = json.loads(out)
    jsonschema.validate(envelope, ENVELOPE_SCHEMA)
    return envelope


def test_model_files_validate_against_schema(carpet_p04_file):
    doc = json.loads(Path(carpet_p04_file).read_text())
    jsonschema.validate(doc, MODEL_SCHEMA)


def test_check(carpet_p04_file):
    env = run_json(["check", "--model", carpet_p04_file])
    report_schema = {**ENVELOPE_SCHEMA["$defs"]["condition_report"],
                     "$defs": ENVELOPE_SCHEMA["$defs"]}
    jsonschema.validate(env["result"], report_schema)
    assert env["result"]["positive_word"] == [1]
    assert env["result"]["strongly_regular"] is True


def test_lyapunov_envelope(carpet_p1_file):
    env = run_json(
        ["lyapunov", "--model", carpet_p1_file, "--kind", "sum",
         "--steps", "1000", "--batches", "4", "--seed", "7", "--threads", "1"]
    )
    est_schema = {**ENVELOPE_SCHEMA["$defs"]["lyapunov_estimate"],
                  "$defs": ENVELOPE_SCHEMA["$defs"]}
    jsonschema.validate(env["result"], est_schema)
    assert env["seed"] == 7
    assert env["params"]["steps"] == 1000
    assert env["version"]


def test_extinction_modes(carpet_p04_file):
    env = run_json(
        ["extinction", "--model", carpet_p04_file, "--mode", "fixed",
         "--word", "0,1,2", "--seed", "0", "--threads", "1"]
    )
    assert env["result"]["depth"] == 3
    env = run_json(
        ["extinction", "--model", carpet_p04_file, "--mode", "converged",
         "--tol", "1e-9", "--seed", "1", "--threads", "1"]
    )
    assert env["result"]["converged"] is True
    env = run_json(
        ["extinction", "--model", carpet_p04_file, "--mode", "annealed",
         "--envs", "5", "--seed", "1", "--threads", "1"]
    )
    assert len(env["result"]["mean_q"]) == 2


def test_simulate_with_growth(carpet_p04_file):
    env = run_json(
        ["simulate", "--model", carpet_p04_file, "--start-type", "0",
         "--trials", "400", "--horizon", "30", "--cap", "100000",
         "--seed", "2", "--growth", "--threads", "1"]
    )
    assert 0.0 <= env["result"]["survival"] <= 1.0
    assert env["result"]["surviving_trials"] > 0


def test_classify_verdict(carpet_p04_file, carpet_p015_file):
    env = run_json(
        ["classify", "--model", carpet_p04_file, "--steps", "5000",
         "--batches", "8", "--seed", "3", "--threads", "1"]
    )
    verdict_schema = {**ENVELOPE_SCHEMA["$defs"]["verdict"], "$defs": ENVELOPE_SCHEMA["$defs"]}
    jsonschema.validate(env["result"]["verdict"], verdict_schema)
    assert env["result"]["verdict"]["kind"] == "survives_positively"
    env = run_json(
        ["classify", "--model", carpet_p015_file, "--steps", "5000",
         "--batches", "8", "--seed", "3", "--threads", "1"]
    )
    assert env["result"]["verdict"]["kind"] == "almost_sure_extinction"


def test_carpet_subcommands():
    env = run_json(
        ["carpet", "lambda-b", "--steps", "1000", "--batches", "4",
         "--seed", "7", "--threads", "1"]
    )
    assert env["command"] == "carpet lambda-b"
    env = run_json(
        ["carpet", "critical", "--steps", "1000", "--batches", "4",
         "--seed", "7", "--threads", "1"]
    )
    assert 0 < env["result"]["p_low"] < env["result"]["p_high"] < 1
    env = run_json(
        ["carpet", "project", "--p", "0.6", "--depth", "4",
         "--samples", "10", "--seed", "5", "--threads", "1"]
    )
    assert len(env["result"]["measures"]) == 10
    env = run_json(
        ["carpet", "offspring", "--p", "0.5", "--column", "1", "--type", "0",
         "--samples", "20000", "--seed", "6", "--threads", "1"]
    )
    assert env["result"]["tv_distance"] < 0.05


def test_carpet_critical_bisect_mode():
    env = run_json(
        ["carpet", "critical", "--bisect", "--iterations", "6",
         "--trials", "100", "--horizon", "60", "--seed", "8", "--threads", "1"]
    )
    assert env["result"]["method"] == "bisect"
    assert 0.05 <= env["result"]["p_low"] < env["result"]["p_high"] <= 0.95


def test_proofkit(carpet_p04_file):
    env = run_json(
        ["proofkit", "--model", carpet_p04_file, "--lambda", "0.057",
         "--samples", "1000", "--seed", "4", "--threads", "1"]
    )
    check_schema = {**ENVELOPE_SCHEMA["$defs"]["oracle_check"], "$defs": ENVELOPE_SCHEMA["$defs"]}
    for check in env["result"]["checks"]:
        jsonschema.validate(check, check_schema)
    assert env["result"]["all_passed"] is True


def test_human_mode_carries_the_same_numbers(carpet_p1_file):
    args = ["lyapunov", "--model", carpet_p1_file, "--steps", "1000",
            "--batches", "4", "--seed", "7", "--threads", "1"]
    envelope = run_json(args)
    code, human, _ = run_cli(args)
    assert code == 0
    assert json.dumps(envelope["result"]["point"]) in human
    assert "--json" not in human


def test_byte_identical_reruns(carpet_p1_file):
    args = ["lyapunov", "--model", carpet_p1_file, "--steps", "1000",
            "--batches", "4", "--seed", "42", "--threads", "1", "--json"]
    _, out1, _ = run_cli(args)
    _, out2, _ = run_cli(args)
    assert out1.encode() == out2.encode()


def test_exit_code_usage():
    code, _, err = run_cli(["lyapunov"])  # missing --model
    assert code == 2
    code, _, err = run_cli(["extinction", "--model", "x", "--mode", "fixed"])
    assert code == 2  # nonexistent model path is a usage problem


def test_exit_code_model_invariant(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(
        json.dumps(
            {
                "n_types": 2,
                "letters": [
                    {
                        "name": "x",
                        "laws": [[{"z": [0, 0], "p": 0.9}], [{"z": [0, 0], "p": 1.0}]],
                    }
                ],
                "environment": {"kind": "iid", "probs": [1.0]},
            }
        )
    )
    code, _, err = run_cli(["check", "--model", str(bad), "--json"])
    assert code == 3
    assert "sum" in err


def test_exit_code_schema_violation(tmp_path):
    doc = tmp_path / "unknown.json"
    doc.write_text('{"n_types": 2, "letters": [], "environment": {}, "bogus": 1}')
    code, _, err = run_cli(["check", "--model", str(doc), "--json"])
    assert code == 3
    assert "bogus" in err


def test_exit_code_budget():
    code, _, err = run_cli(
        ["carpet", "project", "--p", "1.0", "--depth", "12", "--samples", "1",
         "--seed", "0", "--json"]
    )
    assert code == 4


def test_console_entry_point(carpet_p1_file):
    proc = subprocess.run(
        [sys.executable, "-m", "mbpre.cli", "lyapunov", "--model", carpet_p1_file,
         "--steps", "1000", "--batches", "4", "--seed", "7", "--threads", "1", "--json"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    envelope = json.loads(proc.stdout)
    jsonschema.validate(envelope, ENVELOPE_SCHEMA)
