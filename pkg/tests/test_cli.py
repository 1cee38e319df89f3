import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from primalbp import checks
from primalbp.cli import render_report, run_command

from conftest import DATA


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_command([str(a) for a in argv], stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def report(argv):
    code, out, _ = run(argv)
    return code, json.loads(out)


def test_info(data_dir):
    code, rep = report(["info", data_dir / "loopy_mixed.gl"])
    assert code == 0
    r = rep["results"]
    assert (r["num_vars"], r["num_hyperedges"], r["state_space_size"]) == (4, 3, 24)
    assert r["arity_histogram"] == {"2": 2, "3": 1}
    assert r["acyclic"] is False


def test_exact_t1(data_dir):
    code, rep = report(["exact", data_dir / "T1.gl"])
    assert code == 0
    assert rep["results"]["log_partition"] == pytest.approx(math.log(4), abs=1e-15)
    assert rep["results"]["marginals"]["variables"] == [[0.5, 0.5], [0.5, 0.5]]
    assert rep["results"]["entropy"] == pytest.approx(math.log(4), abs=1e-15)


def test_bp_triangle(data_dir):
    code, rep = report(["bp", data_dir / "L1.gl", "--tol", "1e-9"])
    assert code == 0
    r = rep["results"]
    assert r["status"] == "converged"
    assert r["bethe_log_partition"] == pytest.approx(math.log(8), abs=1e-14)
    assert r["bethe_entropy_counting"] == pytest.approx(r["bethe_entropy_kl"], abs=1e-14)


def test_bp_not_converged_exits_1(data_dir):
    code, rep = report(["bp", data_dir / "frustrated_k5.gl", "--max-sweeps", "20"])
    assert code == 1
    assert rep["results"]["status"] == "max_sweeps_reached"


def test_bp_random_schedule_records_seed(data_dir):
    code, rep = report(["bp", data_dir / "grid3x3.gl", "--schedule", "random", "--seed", "5"])
    assert code == 0
    assert rep["seeds"] == {"schedule_seed": 5}


def test_compare_tree_is_exact(data_dir):
    code, rep = report(["compare", data_dir / "chain3.gl"])
    assert code == 0
    assert rep["results"]["log_partition_error"] <= 1e-12
    assert rep["results"]["max_belief_error"] <= 1e-12


@pytest.mark.parametrize("what", checks.CHECKS)
@pytest.mark.parametrize("name", ["T1bad", "loopy_mixed", "grid3x3"])
def test_checks_pass(data_dir, name, what):
    code, rep = report(["check", data_dir / f"{name}.gl", "--what", what, "--seed", "3"])
    assert code == 0, rep["verdicts"]
    assert rep["passed"] is True
    assert rep["verdicts"]


def test_check_needs_convergence(data_dir):
    code, rep = report(["check", data_dir / "frustrated_k5.gl", "--what", "saddle", "--max-sweeps", "10"])
    assert code == 1
    assert rep["verdicts"]["bp_converged"] is False


def test_negative_control_perturbed_gradient(data_dir, monkeypatch):
    real = checks.grad_bethe_wrt_theta

    def perturbed(model):
        g = real(model)
        return g + g * 1e-3

    monkeypatch.setattr(checks, "grad_bethe_wrt_theta", perturbed)
    code, rep = report(["check", data_dir / "T1bad.gl", "--what", "gradient"])
    assert code == 1
    assert rep["verdicts"]["theta_gradient_matches_fd"] is False


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["frobnicate", "x.gl"],
        ["bp", "T1.gl", "--bogus"],
        ["check", "T1.gl"],
        ["check", "T1.gl", "--what", "nonsense"],
    ],
)
def test_usage_errors(argv):
    code, out, _ = run(argv)
    assert code == 2
    assert out == ""


def test_input_errors(tmp_path, data_dir):
    code, _, err = run(["info", tmp_path / "missing.gl"])
    assert code == 2 and "error" in err
    bad = tmp_path / "bad.gl"
    bad.write_text("GIBBS-LOG 1\n2\n2 2\n1\n1 0\n0 0\n0 0\n0 0\n")
    code, _, err = run(["info", bad])
    assert code == 2 and "line 5" in err


def test_cap_and_force(data_dir):
    code, _, err = run(["exact", data_dir / "grid3x3.gl", "--cap", "100"])
    assert code == 2 and "cap" in err
    code, rep = report(["exact", data_dir / "grid3x3.gl", "--cap", "100", "--force"])
    assert code == 0


def test_numbers_have_17_digits():
    text = render_report({"x": 0.1, "y": [1 / 3], "z": 2, "w": True, "n": float("nan")})
    assert "0.10000000000000001" in text
    assert "0.33333333333333331" in text
    parsed = json.loads(text)
    assert parsed["z"] == 2 and parsed["w"] is True and parsed["n"] == "nan"


def test_report_numbers_reproducible_from_library(data_dir):
    from primalbp.bp_engine import run_bp
    from primalbp.local import bethe_log_partition
    from primalbp.modelfile import read_model

    _, rep = report(["bp", data_dir / "loopy_mixed.gl"])
    r = run_bp(read_model(data_dir / "loopy_mixed.gl"))
    assert rep["results"]["bethe_log_partition"] == bethe_log_partition(r.final_model)
    assert rep["results"]["final_residual"] == r.final_residual


def test_module_entry_point(data_dir):
    proc = subprocess.run(
        [sys.executable, "-m", "primalbp", "info", str(data_dir / "T1.gl")],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["num_vars"] == 2
