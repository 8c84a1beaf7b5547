import json
import subprocess
import sys
from pathlib import Path

import pytest

from twoq.cli import main

CIRCUITS = Path(__file__).resolve().parents[1] / "demos" / "circuits"


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def payload_of(out):
    return json.loads(out)["payload"]


def test_run_bell(capsys):
    code, out, _ = run_cli(capsys, "run", str(CIRCUITS / "bell.2wqc"), "--shots", "1000", "--seed", "4")
    assert code == 0
    report = json.loads(out)
    assert set(report["metadata"]) == {"artifact", "version", "seed", "timestamp", "command"}
    p = report["payload"]
    hist = {h["outcome"]: h["count"] for h in p["histogram"]}
    assert set(hist) == {"00", "11"} and sum(hist.values()) == 1000
    assert abs(hist["00"] - 500) < 80
    assert p["success_probability"] == 1.0
    probs = [a["probability"] for a in p["amplitudes"]]
    assert probs == pytest.approx([0.5, 0, 0, 0.5])


def test_run_clone_attempt_against_reference(capsys):
    code, out, _ = run_cli(
        capsys, "run", str(CIRCUITS / "clone_attempt.2wqc"), "--reference", str(CIRCUITS / "plus_plus.2wqc")
    )
    assert code == 0
    p = payload_of(out)
    assert p["success_probability"] == pytest.approx(0.5, abs=1e-12)
    assert p["fidelity"] == pytest.approx(0.5, abs=1e-12)
    assert len(p["postselect_log"]) == 1


def test_missing_file_is_io_error(capsys, tmp_path):
    code, out, err = run_cli(capsys, "run", str(tmp_path / "nope.2wqc"))
    assert code == 6 and out == "" and "cannot read" in err


def test_parse_error_reports_span(capsys, tmp_path):
    bad = tmp_path / "bad.2wqc"
    bad.write_text("qubits 2\nh q0\ncx q0 q7\n")
    code, out, err = run_cli(capsys, "run", str(bad))
    assert code == 3 and out == ""
    assert "line 3" in err and "column" in err


def test_annihilated_postselection_exit_code(capsys, tmp_path):
    f = tmp_path / "dead.2wqc"
    f.write_text("qubits 1\nx q0\npostselect q0 0\n")
    code, out, err = run_cli(capsys, "run", str(f))
    assert code == 4 and out == ""
    assert "instruction 1" in err


def test_noclone_verify_default(capsys):
    code, out, _ = run_cli(capsys, "noclone", "verify", "--samples", "20", "--seed", "1")
    assert code == 0
    p = payload_of(out)
    assert p["all_within_bound"] and len(p["instances"]) == 21
    for row in p["instances"]:
        assert row["witness_fidelity"] <= 0.5 + 1e-9
        if "closed_form_joint_fidelity" in row:
            assert row["witness_joint_fidelity"] == pytest.approx(row["closed_form_joint_fidelity"], abs=1e-10)


def test_noclone_verify_broken_instance(capsys):
    code, out, err = run_cli(capsys, "noclone", "verify", "--samples", "2", "--inject-broken")
    assert code == 5
    p = payload_of(out)
    assert not p["all_within_bound"]
    assert p["instances"][-1]["failed_basis_state"] == "|1>"
    assert "failed" in err


def test_optimize_budget_one(capsys):
    code, out, _ = run_cli(capsys, "noclone", "optimize", "--mode", "1wqc", "--budget", "1", "--final-samples", "100")
    assert code == 0
    p = payload_of(out)
    assert len(p["trace"]) == 1
    assert p["num_params"] == len(p["best_params"]) == 36


def test_bb84_variants(capsys):
    code, out, _ = run_cli(capsys, "bb84", "--pulses", "4000", "--eve", "none", "--seed", "2")
    assert code == 0 and payload_of(out)["qber"] == 0
    code, out, _ = run_cli(capsys, "bb84", "--pulses", "10000", "--eve", "intercept-resend", "--seed", "2")
    p = payload_of(out)
    assert code == 0 and abs(p["qber"] - 0.25) <= 0.02 and p["exact_qber"] == "1/4"
    code, out, _ = run_cli(capsys, "bb84", "--pulses", "4000", "--eve", "postselect-clone", "--seed", "2")
    p = payload_of(out)
    assert code == 0 and p["qber"] >= 0.1 and p["eve_information"] < 1


def test_usage_errors(capsys):
    assert run_cli(capsys, "bb84", "--pulses", "10", "--eve", "beamsplitter")[0] == 2
    assert run_cli(capsys, "bb84", "--pulses", "0", "--eve", "none")[0] == 2
    assert run_cli(capsys, "noclone", "optimize", "--mode", "1wqc", "--budget", "0")[0] == 2
    assert run_cli(capsys)[0] == 2


def test_csv_and_out(capsys, tmp_path):
    dest = tmp_path / "r.csv"
    code, out, _ = run_cli(capsys, "bb84", "--pulses", "200", "--eve", "none", "--format", "csv", "--out", str(dest))
    assert code == 0 and out == ""
    lines = dest.read_text().splitlines()
    assert lines[0].startswith("# artifact: twoq")
    header = next(line for line in lines if not line.startswith("#"))
    assert header.split(",")[0] == "table"
    assert any(line.startswith("qber_by_basis,") for line in lines)


def test_unwritable_out(capsys, tmp_path):
    code, _, _ = run_cli(capsys, "bb84", "--pulses", "10", "--eve", "none", "--out", str(tmp_path / "no" / "x.json"))
    assert code == 6


def test_threads_env(monkeypatch):
    from twoq.cli import build_parser

    monkeypatch.setenv("TWOQ_THREADS", "3")
    args = build_parser().parse_args(["bb84", "--pulses", "1", "--eve", "none"])
    assert args.threads == 3


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "twoq", "run", str(CIRCUITS / "bell.2wqc"), "--shots", "10"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["metadata"]["artifact"] == "twoq"
