"""Command-line surface: JSON documents, determinism, structured errors."""

import json
import subprocess
import sys

import pytest

from ellink.cli import main


def run_cli(*args):
    proc = subprocess.run(
        [sys.executable, "-m", "ellink.cli", *args],
        capture_output=True,
        text=True,
    )
    return proc.returncode, proc.stdout


def test_compute_minimal_pattern():
    code, out = run_cli("compute", "8,2:7>1,8>2", "--samples", "2")
    assert code == 0
    doc = json.loads(out)
    assert doc["minimal_word"] == []
    assert doc["sigma"] == [1, 2]
    assert doc["nu_list"] == []
    assert ["x1", "mu1", "1/2"] in doc["type"]
    assert len(doc["sample_values"]) == 2
    point = doc["sample_values"][0]["point"]
    assert set(point) == {"x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8", "u", "h", "mu1", "mu2"}


def test_compute_rejects_repeated_endpoint():
    code, out = run_cli("compute", "8,2:7>7")
    assert code == 2
    err = json.loads(out)
    assert err["error"]["kind"] == "DistinctnessError"


def test_compute_deterministic():
    code1, out1 = run_cli("compute", "4,2:3>1,4>2", "--seed", "0", "--samples", "4")
    code2, out2 = run_cli("compute", "4,2:3>1,4>2", "--seed", "0", "--samples", "4")
    assert code1 == code2 == 0
    assert out1 == out2


def test_verify_fourterm():
    code, out = run_cli("verify", "fourterm", "--samples", "50")
    assert code == 0
    reports = json.loads(out)
    assert reports[0]["name"] == "fourterm"
    assert reports[0]["passed"] is True


def test_verify_unknown_suite():
    code, out = run_cli("verify", "nonsense")
    assert code == 2
    err = json.loads(out)
    assert err["error"]["kind"] == "usage"


def test_orbits():
    code, out = run_cli("orbits", "4,2")
    assert code == 0
    doc = json.loads(out)
    assert doc["count"] == 12
    top = [p for p in doc["patterns"] if p["distance"] == 5]
    assert len(top) == 1
    assert len(top[0]["nu_multiset"]) == 5
    code, _ = run_cli("orbits", "8,2")
    assert code == 2


def test_restrict_identity_is_one():
    code, out = run_cli("restrict", "4,2:3>1,4>2", "--sigma", "1,2", "--samples", "2")
    assert code == 0
    doc = json.loads(out)
    assert doc["mu_inverted"] is True
    for sample in doc["sample_values"]:
        re, im = (float(s) for s in sample["value"])
        assert abs(complex(re, im) - 1) < 1e-8


def test_restrict_off_identity_is_zero():
    code, out = run_cli(
        "restrict", "4,2:3>1,4>2", "--sigma", "2,1", "--samples", "2", "--raw-mu"
    )
    assert code == 0
    doc = json.loads(out)
    for sample in doc["sample_values"]:
        re, im = (float(s) for s in sample["value"])
        assert abs(complex(re, im)) < 1e-8


def test_weights_command():
    code, out = run_cli("weights", "5,2:4>1,5>2", "--samples", "2")
    assert code == 0
    doc = json.loads(out)
    assert doc["n"] == 3 and doc["rtv_substitution"] is True
    code, out = run_cli("weights", "5,2:4>1,5>2", "--no-rtv", "--samples", "1")
    assert json.loads(out)["rtv_substitution"] is False


def test_multiplicities_command():
    code, out = run_cli("multiplicities", "3,1:1>2", "--lam", "3/7")
    assert code == 0
    doc = json.loads(out)
    assert doc["word"] == [1, 2]
    assert doc["alphas"] == ["13/7", "10/7"]


def test_math_error_is_structured():
    # weight shape mismatch surfaces as a JSON error object, not a traceback
    code, out = run_cli("weights", "4,2:3>1,4>2")
    assert code == 2
    err = json.loads(out)
    assert err["error"]["kind"] == "NotWeightPattern"


def test_out_file(tmp_path):
    target = tmp_path / "report.json"
    assert main(["verify", "fourterm", "--samples", "20", "--out", str(target)]) == 0
    doc = json.loads(target.read_text())
    assert doc[0]["passed"] is True


def test_config_validation():
    assert main(["verify", "fourterm", "--tau-im", "0.1"]) == 2
    assert main(["verify", "fourterm", "--samples", "0"]) == 2
    assert main(["verify", "fourterm", "--tol", "-1"]) == 2
