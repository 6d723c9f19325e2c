"""Acceptance gate: every criterion at its stated tolerance and time budget.

Each test prints one ``[PASS]``/``[FAIL]`` line (output capture is bypassed so the
lines show up in a plain ``pytest -v`` run).
"""

from __future__ import annotations

import json

import pytest

from holoflow.acceptance import CRITERIA, DEFAULT_SEED, run_suite
from holoflow.cli import run


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA], ids=[f"criterion-{c[0]}" for c in CRITERIA])
def test_criterion(number, capsys):
    (result,) = run_suite(DEFAULT_SEED, only={number})
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.detail
    assert result.within_budget, f"{result.seconds:.2f}s exceeds the {result.budget:g}s budget"


def test_suite_command(tmp_path, capsys):
    out = tmp_path / "suite.json"
    code = run(["--paper-suite", "--seed", str(DEFAULT_SEED), "--out", str(out)])
    err = capsys.readouterr().err
    with capsys.disabled():
        print("\n" + err.strip().splitlines()[-1])
    rep = json.loads(out.read_text())
    assert code == 0 and rep["passed"] is True
    assert [c["number"] for c in rep["criteria"]] == [1, 2, 3, 4, 5, 6, 7]
    assert err.count("[PASS]") == 7


def test_suite_report_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(["--paper-suite", "--out", str(a)]) == 0
    assert run(["--paper-suite", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
