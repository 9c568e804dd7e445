import json
import subprocess
import sys

import pytest

from ncq.cli import main

BSC_BITS = 0.531004406411  # 1 − h(0.1) in bits


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_qgroup_passes(capsys):
    code, out, _ = run(["verify-qgroup", "--builtin", "kp"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["passed"]
    assert all(a["passed"] for a in rep["assertions"])


def test_entropy_report_is_byte_identical(capsys):
    args = ["entropy", "--builtin", "kp", "--seed", "7", "--restarts", "8"]
    code1, out1, _ = run(args, capsys)
    code2, out2, _ = run(args, capsys)
    assert code1 == code2 == 0
    assert out1 == out2
    rep = json.loads(out1)
    assert set(rep["results"]["routes"]) == {"h_min_optimize", "h_min_derivative", "h_cb_min", "closed_form"}


def test_entropy_in_bits(capsys):
    base = ["entropy", "--builtin", "vng:s3", "--seed", "3", "--restarts", "6"]
    nats = json.loads(run(base, capsys)[1])["results"]["routes"]["closed_form"]
    bits = json.loads(run(base + ["--unit", "bits"], capsys)[1])["results"]["routes"]["closed_form"]
    assert bits == pytest.approx(nats / 0.6931471805599453, rel=1e-10)


def test_classical_capacity_in_bits(capsys):
    code, out, _ = run(["capacity", "--classical", "cyclic:2", "--nu", "0.9,0.1", "--unit", "bits"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["results"]["capacity"]["closed_form"] == pytest.approx(BSC_BITS, abs=1e-11)


def test_norms_default_exponents(capsys):
    code, out, _ = run(["norms", "--builtin", "kp", "--restarts", "6"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert set(rep["results"]["norms"]) == {"1.5", "2", "4", "inf"}


def test_structure_of_herz_schur(capsys):
    code, out, _ = run(["structure", "--channel", "herz_schur", "--group", "cyclic:2", "--phi", "1,0.3"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["results"]["multiplicative_domain"]["dimension"] == 2


def test_failed_assertion_exits_one_and_still_reports(tmp_path, capsys):
    out = tmp_path / "r.json"
    # the derivative route carries a finite-difference residual far above 1e-300
    code, _, _ = run(["entropy", "--builtin", "kp", "--restarts", "2", "--tol", "1e-300", "--out", str(out)], capsys)
    assert code == 1
    assert json.loads(out.read_text())["passed"] is False


@pytest.mark.parametrize("args", [
    ["verify-qgroup", "--builtin", "nope"],
    ["capacity", "--classical", "cyclic:2", "--nu", "0.5,0.6"],
    ["capacity", "--classical", "cyclic:2", "--nu", "a,b"],
    ["entropy", "--channel", "herz_schur", "--group", "cyclic:2", "--phi", "1"],
    ["entropy", "--builtin", "kp", "--restarts", "0"],
    ["entropy", "--unit", "hartley", "--builtin", "kp"],
    ["bogus"],
])
def test_parse_errors_exit_two(args, capsys):
    with pytest.raises(SystemExit) as exc:
        sys.exit(main(args))
    assert exc.value.code == 2


def test_job_spec_file(tmp_path, capsys):
    target = {"kind": "covariant", "group": "pauli", "rep": "pauli", "f": [2.8, 0.4, 0.4, 0.4]}
    (tmp_path / "t.json").write_text(json.dumps(target))
    job = {"kind": "capacity", "target": "t.json", "options": {"restarts": 6, "seed": 1}}
    (tmp_path / "job.json").write_text(json.dumps(job))
    code, out, _ = run(["run", str(tmp_path / "job.json")], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["options"]["restarts"] == 6
    assert rep["results"]["covariant_identity_gap"] < 5e-3


def test_target_spec_via_flag(tmp_path, capsys):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps({"kind": "depolarizing", "qgroup": "kp"}))
    code, out, _ = run(["structure", "--spec", str(path)], capsys)
    assert code == 0
    assert json.loads(out)["results"]["entanglement_breaking"] == "EB"


def test_unknown_option_keys_are_rejected(tmp_path, capsys):
    path = tmp_path / "job.json"
    path.write_text(json.dumps({"kind": "entropy", "target": {"kind": "identity", "qgroup": "kp"},
                                "options": {"restarts": 4, "colour": "red"}}))
    code, _, err = run(["run", str(path)], capsys)
    assert code == 2
    assert "colour" in err


def test_mismatched_job_kind(tmp_path, capsys):
    path = tmp_path / "job.json"
    path.write_text(json.dumps({"kind": "norms", "target": {"kind": "identity", "qgroup": "kp"}}))
    assert run(["entropy", "--spec", str(path)], capsys)[0] == 2


def test_properties_suite(capsys):
    code, out, _ = run(["suite", "properties"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["results"]["cases"] == 240 and rep["results"]["failed"] == []


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ncq.cli", "verify-qgroup", "--builtin", "cg:cyclic:3"],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["passed"]
