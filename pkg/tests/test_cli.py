from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from holoflow.algebra import I, MixedPolynomial, Q
from holoflow.cli import dumps, run, write_atomic
from holoflow.fields import NormalFormField, plane_jordan_field


def write_json(path: Path, data) -> str:
    path.write_text(json.dumps(data))
    return str(path)


@pytest.fixture
def files(tmp_path):
    z1 = MixedPolynomial.variable(2, 0)
    out = {
        "jordan": write_json(tmp_path / "jordan.json", plane_jordan_field(1, 2, 1).to_json()),
        "mixed": write_json(tmp_path / "mixed.json", NormalFormField.make([Q(1), Q(1, 1)]).to_json()),
        "invalid": write_json(tmp_path / "invalid.json",
                              NormalFormField.make([Q(1), Q(2)], [z1 * 0, z1.scale(I)]).to_json()),
        "half": write_json(tmp_path / "halfplane.json", {"P": [[[1, 0]]], "lambda": [1]}),
        "offset": write_json(tmp_path / "offset.json", {"P": [[[0, -20], [10, 0]]], "lambda": [1]}),
        "garbage": str(tmp_path / "garbage.json"),
    }
    (tmp_path / "garbage.json").write_text("{not json")
    return out


def run_json(argv, tmp_path, name="out.json"):
    out = tmp_path / name
    code = run(list(argv) + ["--out", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


# -- example commands ---------------------------------------------------------

def test_kernel_command(files, tmp_path):
    code, rep = run_json(["kernel", "--field", files["jordan"], "--degree", "6"], tmp_path)
    assert code == 0 and rep["holomorphic_only"] is True


def test_kernel_with_oracle(files, tmp_path):
    code, rep = run_json(["kernel", "--field", files["jordan"], "--degree", "3", "--oracle"], tmp_path)
    assert code == 0 and rep["oracle"]["matches"] is True and rep["oracle"]["dim_solver"] == 10


def test_classify_command(files, tmp_path):
    code, rep = run_json(["field-classify", "--field", files["mixed"]], tmp_path)
    assert code == 0 and rep["aligned"] is False


def test_region_command(files, tmp_path):
    code, rep = run_json(["region", "--spec", files["half"], "--bbox", "-2,6,-3,3", "--res", "0.02"], tmp_path)
    assert code == 0 and rep["components"] == 1 and rep["star_id"] == 1
    pgm = (tmp_path / "out.pgm").read_text().splitlines()
    assert pgm[0] == "P2" and pgm[1] == "400 300"


def test_region_with_diagnostics(files, tmp_path):
    code, rep = run_json(["region", "--spec", files["half"], "--bbox", "-2,6,-3,3", "--res", "0.1",
                          "--ell-max", "3", "--candidates", "2"], tmp_path)
    assert code == 0
    assert rep["diagnostics"]["violations"] == []
    assert [c["kind"] for c in rep["candidates"]] == ["ray", "ray"]


def test_validate_command(files, tmp_path):
    code, rep = run_json(["field-validate", "--field", files["jordan"]], tmp_path)
    assert code == 0 and rep["valid"] is True


def test_flow_command(files, tmp_path):
    code, rep = run_json(["flow", "--field", files["jordan"], "--eta", "0.4,0.1", "--zeta", "0.5+0.5j"], tmp_path)
    assert code == 0 and rep["residual_is_zero"] is True
    assert rep["point"]["max_abs_difference"] <= 1e-8
    code, rep = run_json(["flow", "--field", files["jordan"], "--direction", "backward"], tmp_path)
    assert code == 0 and "exp(-2*zeta)" in rep["closed_form"][1]


def test_flow_negative_eta(files, tmp_path):
    code, rep = run_json(["flow", "--field", files["jordan"], "--eta", "-0.4,0.1", "--zeta", "-0.5"], tmp_path)
    assert code == 0 and rep["point"]["eta"][0] == [-0.4, 0.0]


@pytest.mark.parametrize("case", ["finite-smooth", "negative-ratio", "nonreal-ratio"])
def test_verify_command(case, tmp_path):
    code, rep = run_json(["verify", "--case", case], tmp_path)
    assert code == 0 and rep["verdict"] == "LeafwiseHolomorphicNotGlobal"


def test_verify_with_parameters(tmp_path):
    code, rep = run_json(["verify", "--case", "nonreal-ratio", "--alpha", "1+1i", "--t", "2", "--b", "3"], tmp_path)
    assert code == 0 and rep["spec"]["alpha"] == [1.0, 1.0] and rep["spec"]["b"] == 3.0


# -- exit codes ---------------------------------------------------------------

def test_invalid_field_exits_one_with_report(files, tmp_path):
    code, rep = run_json(["field-validate", "--field", files["invalid"]], tmp_path)
    assert code == 1 and rep["valid"] is False


def test_kernel_on_invalid_field_exits_one(files, tmp_path):
    code, rep = run_json(["kernel", "--field", files["invalid"], "--degree", "3"], tmp_path)
    assert code == 1 and rep is None


def test_ray_not_found_exits_one(files, tmp_path):
    code, rep = run_json(["region", "--spec", files["offset"], "--bbox", "-2,3,-1,1", "--res", "0.05"], tmp_path)
    assert code == 1 and rep is None
    assert not (tmp_path / "out.pgm").exists()


@pytest.mark.parametrize("argv", [
    [],
    ["kernel", "--field", "X", "--degree", "3", "--bogus"],
    ["no-such-command"],
])
def test_usage_errors(argv, capsys):
    assert run(argv) == 2


def test_degree_cap_range(files, tmp_path):
    for d in ("0", "13"):
        assert run_json(["kernel", "--field", files["jordan"], "--degree", d], tmp_path) == (2, None)


def test_bad_inputs_are_usage_errors(files, tmp_path):
    assert run_json(["kernel", "--field", files["garbage"], "--degree", "2"], tmp_path)[0] == 2
    assert run_json(["kernel", "--field", str(tmp_path / "missing.json"), "--degree", "2"], tmp_path)[0] == 2
    assert run_json(["region", "--spec", files["half"], "--bbox", "-2,6,-3", "--res", "0.1"], tmp_path)[0] == 2
    assert run_json(["region", "--spec", files["half"], "--bbox", "-2,6,-3,3", "--res", "0"], tmp_path)[0] == 2
    assert run_json(["flow", "--field", files["jordan"], "--eta", "0.1"], tmp_path)[0] == 2
    assert run(["verify", "--case", "finite-smooth", "--out", str(tmp_path / "nodir" / "x.json")]) == 2


def test_subcommand_and_suite_are_exclusive(files):
    assert run(["--paper-suite", "kernel", "--field", files["jordan"], "--degree", "2"]) == 2


def test_domain_parameter_error_exits_one(tmp_path):
    assert run_json(["verify", "--case", "finite-smooth", "--k", "0"], tmp_path) == (1, None)


# -- determinism and output ---------------------------------------------------

def test_reports_are_byte_identical(files, tmp_path):
    for argv in (["kernel", "--field", files["jordan"], "--degree", "4"],
                 ["region", "--spec", files["offset"], "--bbox", "-2,8,-4,6", "--res", "0.1", "--candidates", "2"],
                 ["verify", "--case", "negative-ratio"]):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert run(argv + ["--out", str(a)]) == 0
        assert run(argv + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


def test_thread_count_does_not_change_report(files, tmp_path, monkeypatch):
    argv = ["region", "--spec", files["offset"], "--bbox", "-2,8,-4,6", "--res", "0.05"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    monkeypatch.setenv("HOLOFLOW_THREADS", "1")
    run(argv + ["--out", str(a)])
    monkeypatch.setenv("HOLOFLOW_THREADS", "4")
    run(argv + ["--out", str(b)])
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.pgm").read_bytes() == (tmp_path / "b.pgm").read_bytes()


def test_stdout_when_no_out(files, capsys):
    assert run(["field-classify", "--field", files["jordan"]]) == 0
    assert json.loads(capsys.readouterr().out)["aligned"] is True


def test_dumps_is_canonical():
    text = dumps({"b": float("inf"), "a": [1 + 2j, float("nan")]})
    assert json.loads(text) == {"a": [[1.0, 2.0], "nan"], "b": "inf"}
    assert text.index('"a"') < text.index('"b"')


def test_write_atomic_leaves_nothing_on_failure(tmp_path):
    target = tmp_path / "r.json"
    target.write_text("old")

    with pytest.raises(TypeError):
        write_atomic(target, 123)  # not text: the write fails midway
    assert target.read_text() == "old"
    assert sorted(p.name for p in tmp_path.iterdir()) == ["r.json"]


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "holoflow", "field-classify", "--field", files["mixed"]],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["aligned"] is False
