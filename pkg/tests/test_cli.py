import json

import pytest

from fraclie.cli import run


def _run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = run([*args, "--out", str(out)])
    report = json.loads((out / "report.json").read_text()) if (out / "report.json").exists() else None
    return code, report, out


def test_verify_symmetries(tmp_path):
    code, rep, _ = _run(tmp_path, "verify-symmetries")
    assert code == 0
    names = [f["field"] for f in rep["fields"]]
    assert names[:6] == ["V1", "V2", "V3", "V4", "V5", "V6"]
    assert len([n for n in names if n.startswith("V_k")]) == 4
    assert all(f["defect_canonical_text"] == "0" for f in rep["fields"])


@pytest.mark.parametrize("flag", [("--v4", "printed"), ("--eq28-sign", "plus")])
def test_verify_symmetries_variants_fail(tmp_path, flag):
    code, rep, _ = _run(tmp_path, "verify-symmetries", *flag)
    assert code == 1
    assert not rep["passed"]


def test_commutators(tmp_path, capsys):
    code, rep, _ = _run(tmp_path, "commutators", "--compare-paper")
    assert code == 0
    assert "convention: global-sign-flipped" in capsys.readouterr().out
    assert rep["convention"] == "global-sign-flipped"
    assert all(e["matches_paper"] for e in rep["entries"])
    assert all(len(e["coefficients"]) == 6 for e in rep["entries"])


def test_residual_both_semantics(tmp_path):
    code, rep, out = _run(tmp_path, "residual", "--solution", "u6_1", "--semantics", "both", "--alpha", "0.5")
    assert code == 0
    alpha_time, direct = rep["reports"]
    assert alpha_time["max_residual"] <= 1e-10
    assert direct["point_residual"]["values"][1] <= -1e-3
    for r in rep["reports"]:
        assert {"solution", "semantics", "alpha", "eps", "c", "grid", "max_residual", "converged", "csv_path"} <= set(r)
        assert (out / r["csv_path"]).read_text().startswith("x,t_or_T,residual")


@pytest.mark.parametrize(
    "args",
    [
        ("transform", "--group", "g6"),
        ("transform", "--group", "g_alpha", "--k", "x^2/2 + T"),
        ("iterate", "--group", "g5", "--n", "2"),
        ("iterate", "--group", "g6", "--n", "2"),
        ("residual", "--solution", "u5_2", "--semantics", "direct"),
        ("probe", "leibniz"),
        ("probe", "chain"),
        ("probe", "newton-leibniz"),
        ("probe", "power-law", "--power", "2"),
        ("characteristics",),
        ("catalog",),
    ],
)
def test_subcommands_pass(tmp_path, args):
    code, rep, _ = _run(tmp_path, *args)
    assert code == 0, rep
    assert rep["passed"]


def test_flow(tmp_path):
    code, rep, out = _run(tmp_path, "flow", "--points", "5", "--steps", "200")
    assert code == 0
    assert rep["g6_point"]["error"] <= 1e-8
    assert (out / "flow.csv").exists()


def test_power_law_on_linear_data_reports_failure(tmp_path):
    code, rep, _ = _run(tmp_path, "probe", "power-law")
    assert code == 1
    assert rep["slope"] is None or abs(rep["slope"] - 1.5) > 0.25


@pytest.mark.parametrize(
    "args",
    [
        ("residual", "--alpha", "1.5"),
        ("residual", "--grid-x", "2:1:5"),
        ("residual", "--tol", "nonsense=1"),
        ("residual", "--solution", "u9"),
        ("probe", "leibniz", "--alpha", "1"),
        ("transform", "--group", "g_alpha", "--k", "T"),
        ("characteristics", "--beta", "0.5", "--alpha", "0.5"),
        ("bogus",),
    ],
)
def test_usage_errors(tmp_path, args):
    code, _, _ = _run(tmp_path, *args)
    assert code == 2


def test_tolerance_override_can_fail_a_check(tmp_path):
    code, _, _ = _run(tmp_path, "residual", "--solution", "u5_1", "--semantics", "direct", "--tol", "direct=1e-9")
    assert code == 1


def test_json_is_deterministic(tmp_path, capsys):
    args = ("residual", "--solution", "u6_2", "--semantics", "both")
    _, _, a = _run(tmp_path, *args, name="a")
    _, _, b = _run(tmp_path, *args, name="b")
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    capsys.readouterr()
    run([*args, "--out", str(a), "--json"])
    printed = capsys.readouterr().out
    assert printed == (a / "report.json").read_text()
