#!/usr/bin/env python3
"""Tests for the command line: exit codes, artifacts and error reporting."""
import io
import json
import sys
import tempfile
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

import pytest

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from app.main import main  # noqa: E402
from app.models import mode_eigenvalue  # noqa: E402

POTENTIALS = project_root / "data" / "potentials"


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main([str(a) for a in argv])
    return code, out.getvalue(), err.getvalue()


def error_line(stderr: str) -> dict:
    lines = [line for line in stderr.splitlines() if line.startswith("{")]
    assert len(lines) == 1
    return json.loads(lines[0])


def test_forward_writes_spectrum_and_secular_samples():
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "spectrum.json"
        code, _, _ = run_cli("forward", "--potential", POTENTIALS / "mode_1.json", "--alpha", 5, "--trunc", 8, "--out", out)
        assert code == 0
        data = json.loads(out.read_text())
        assert data["truncation_N"] == 8
        moved = [e["value"] for e in data["entries"] if e["tag"] == "sigma2"]
        assert moved == [pytest.approx(mode_eigenvalue(1) + 5.0, abs=1e-10)]
        secular = Path(f"{out}.secular.csv").read_text().splitlines()
        assert secular[0] == "z,Q"


def test_forward_is_byte_identical_across_runs():
    with tempfile.TemporaryDirectory() as tmp:
        paths = [Path(tmp) / "a.json", Path(tmp) / "b.json"]
        for path in paths:
            code, _, _ = run_cli("forward", "--potential", POTENTIALS / "two_mode.json", "--alpha", 1.5, "--out", path)
            assert code == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()


def test_forward_csv_to_stdout():
    code, out, _ = run_cli("forward", "--potential", POTENTIALS / "unit.json", "--alpha", 1, "--trunc", 8, "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "value,multiplicity,tag"
    assert "1.0,1,sigma2" in lines


def test_identities():
    code, out, _ = run_cli("identities")
    assert code == 0
    assert "FAIL" not in out
    assert "summation" in out


def test_bundle_then_inverse4():
    with tempfile.TemporaryDirectory() as tmp:
        bundle_dir = Path(tmp) / "bundle"
        code, out, _ = run_cli(
            "bundle", "--potential", POTENTIALS / "two_mode.json", "--alpha", 1.5, "--trunc", 8, "--out", bundle_dir
        )
        assert code == 0
        assert len(out.splitlines()) == 4
        result_path = Path(tmp) / "result.json"
        code, _, _ = run_cli("inverse4", "--bundle", bundle_dir, "--out", result_path)
        assert code == 0
        result = json.loads(result_path.read_text())
        assert result["alpha"] == pytest.approx(1.5, rel=1e-8)
        recovered = {c["n"]: complex(c["re"], c["im"]) for c in result["coefficients"]}
        assert abs(recovered[0] - 2**-0.5) <= 1e-6
        assert abs(recovered[1] - 1j * 2**-0.5) <= 1e-6


def test_bundle_then_inverse3_even():
    with tempfile.TemporaryDirectory() as tmp:
        code, _, _ = run_cli(
            "bundle", "--potential", POTENTIALS / "even_cos.json", "--alpha", -3, "--trunc", 8,
            "--route", "even", "--out", tmp,
        )
        assert code == 0
        code, out, _ = run_cli("inverse3", "--bundle", tmp, "--symmetry", "even")
        assert code == 0
        result = json.loads(out)
        assert result["alpha"] == pytest.approx(-3.0, rel=1e-8)


def test_verify():
    code, out, _ = run_cli("verify", "--seed", 1, "--trunc", 10)
    assert code == 0
    report = json.loads(out)
    assert report["max_coefficient_error"] <= 1e-6


def test_missing_potential_is_a_config_error():
    code, _, err = run_cli("forward", "--alpha", 5)
    assert code == 2
    assert error_line(err)["error"] == "config_error"


def test_unparseable_argument():
    code, _, err = run_cli("forward", "--potential", POTENTIALS / "mode_1.json", "--alpha", "five")
    assert code == 2
    assert error_line(err)["error"] == "config_error"


def test_domain_error_exit_code():
    code, _, err = run_cli("forward", "--potential", POTENTIALS / "mode_1.json", "--alpha", 5, "--trunc", 4)
    assert code == 2
    assert error_line(err)["error"] in ("config_error", "truncation_too_small")


def test_zero_potential_bundle_reports_v_zero():
    with tempfile.TemporaryDirectory() as tmp:
        zero = Path(tmp) / "zero.json"
        zero.write_text(json.dumps({"type": "fourier", "coeffs": []}))
        bundle_dir = Path(tmp) / "bundle"
        code, _, err = run_cli("bundle", "--potential", zero, "--alpha", 1, "--trunc", 8, "--out", bundle_dir)
        assert code == 0, err
        code, out, _ = run_cli("inverse4", "--bundle", bundle_dir)
        assert code == 0
        result = json.loads(out)
        assert result["alpha"] is None
        assert result["coefficients"] == []
        code, out, _ = run_cli("verify", "--potential", zero, "--alpha", 100, "--trunc", 8)
        assert code == 0
        assert json.loads(out)["recovered_alpha"] is None


def test_non_finite_alpha_is_a_config_error():
    for value in ("nan", "inf"):
        code, _, err = run_cli("forward", "--potential", POTENTIALS / "mode_1.json", "--alpha", value)
        assert code == 2
        assert error_line(err)["error"] == "config_error"


def test_zero_truncation_is_rejected():
    code, out, err = run_cli("forward", "--potential", POTENTIALS / "mode_1.json", "--alpha", 5, "--trunc", 0)
    assert code == 2
    assert out == ""
    assert error_line(err)["error"] == "config_error"


def test_unwritable_output_is_reported():
    with tempfile.TemporaryDirectory() as tmp:
        blocker = Path(tmp) / "file.txt"
        blocker.write_text("not a directory")
        out = blocker / "spectrum.json"
        code, _, err = run_cli("forward", "--potential", POTENTIALS / "mode_1.json", "--alpha", 5, "--trunc", 8, "--out", out)
        assert code == 2
        assert error_line(err)["error"] == "output_error"


def test_inverse_with_empty_bundle_dir():
    with tempfile.TemporaryDirectory() as tmp:
        code, _, err = run_cli("inverse4", "--bundle", tmp)
        assert code == 2
        assert error_line(err)["error"] == "parse_error"


if __name__ == "__main__":
    from harness import run_tests

    sys.exit(run_tests(globals(), "cli"))
