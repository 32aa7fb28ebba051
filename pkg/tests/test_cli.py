from __future__ import annotations

import json
import subprocess
import sys

import pytest

from scatterlab import cli, equiv
from scatterlab.errors import ClaimCheckError
from scatterlab.gf import admissible_h, make_field_ctx


H34 = format(admissible_h(make_field_ctx(3, 1, 4))[0], "x")


def run(capsys, *argv):
    status = cli.main(list(argv))
    out = capsys.readouterr()
    return status, out.out, out.err


def test_scan_t3(capsys):
    status, out, _ = run(capsys, "scan", "--p", "3", "--t", "3")
    assert status == 0
    rep = json.loads(out)
    assert rep["schema"] == "scatterlab/1"
    res = rep["result"]
    assert res["admissible_count"] == 28 and res["all_scattered"]
    assert {r["linset_size"] for r in res["rows"]} == {364}
    assert "timing" in rep and "seconds" in rep["timing"]


def test_reports_are_deterministic(capsys):
    args = ("classify-codes", "--p", "3", "--t", "5")
    outs = [run(capsys, *args, "--no-timing")[1] for _ in range(2)]
    assert outs[0] == outs[1]
    a, b = (json.loads(run(capsys, *args)[1]) for _ in range(2))
    a.pop("timing"), b.pop("timing")
    assert a == b


def test_classify_codes_t5(capsys):
    status, out, _ = run(capsys, "classify-codes", "--p", "3", "--t", "5")
    res = json.loads(out)["result"]
    assert status == 0 and res["bound"] == 12 and res["class_count"] >= 12 and res["mode"] == "criterion"


def test_adjoint_check_single_h(capsys):
    ctx = make_field_ctx(3, 1, 5)
    h = ctx.to_hex(admissible_h(ctx)[3])
    status, out, _ = run(capsys, "adjoint-check", "--p", "3", "--t", "5", "--h", h, "--format", "csv")
    lines = out.splitlines()
    assert status == 0 and lines[0].startswith("h,verified") and lines[1].startswith(h + ",True")


@pytest.mark.parametrize(
    "argv",
    [
        ("field-info", "--p", "3", "--t", "2"),
        ("mindist", "--p", "3", "--t", "3", "--h", "27", "--method", "fiber"),
        ("mindist", "--p", "3", "--t", "3", "--h", "27"),
        ("idealizers", "--p", "3", "--t", "4", "--h", H34, "--method", "scan"),
        ("classify-codes", "--p", "3", "--t", "3"),
        ("classify-linsets", "--p", "3", "--t", "5"),
        ("aut-group", "--p", "3", "--t", "5"),
    ],
)
def test_commands_run(capsys, argv):
    status, out, _ = run(capsys, *argv, "--format", "table")
    assert status == 0, out
    assert out.strip()


def test_mindist_values(capsys):
    status, out, _ = run(capsys, "mindist", "--p", "3", "--t", "3", "--h", "27")
    res = json.loads(out)["result"]
    assert res["rows"] == [{"h": "27", "min_distance": 5, "is_mrd": True}]


def test_exit_invalid_config(capsys):
    for argv in (
        ("scan", "--p", "4", "--t", "3"),
        ("scan", "--p", "3", "--t", "2"),
        ("scan", "--p", "3", "--t", "3", "--h", "zz"),
        ("scan", "--p", "3", "--t", "3", "--h", "1"),
        ("scan", "--p", "3", "--t", "3", "--jobs", "0"),
        ("classify-codes", "--p", "3", "--t", "3", "--mode", "criterion"),
    ):
        status, out, err = run(capsys, *argv)
        assert status == 1, argv
        assert json.loads(out)["error"]["kind"] == "invalid_config"
        assert "invalid_config" in err


def test_exit_guard_rail(capsys):
    status, out, _ = run(capsys, "scan", "--p", "3", "--t", "9")
    assert status == 2 and json.loads(out)["error"]["kind"] == "guard_rail"
    status, _, _ = run(capsys, "mindist", "--p", "3", "--t", "5", "--h", "1", "--max-enum", "12")
    assert status == 2


def test_exit_claim_check(capsys, monkeypatch):
    def broken(ctx, h, **kw):
        raise ClaimCheckError("psi_h(b g(x)) reduces to c x", "forced")

    monkeypatch.setattr(equiv, "adjoint_equiv_witness", broken)
    status, out, _ = run(capsys, "adjoint-check", "--p", "3", "--t", "3")
    err = json.loads(out)["error"]
    assert status == 3 and err["kind"] == "claim_check" and err["claim"] == "psi_h(b g(x)) reduces to c x"


def test_progress_goes_to_stderr(capsys):
    status, out, err = run(capsys, "scan", "--p", "3", "--t", "3", "--h", "27", "-v", "--no-timing")
    assert status == 0 and "scan 1/1" in err and "scan 1/1" not in out


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "scatterlab", "field-info", "--p", "5", "--t", "3", "--no-timing"],
        capture_output=True,
        text=True,
        check=True,
    )
    rep = json.loads(proc.stdout)
    assert rep["result"]["admissible_count"] == 124 and rep["field"]["q"] == 5
