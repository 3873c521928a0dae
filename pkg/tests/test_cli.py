import json

import pytest

from quadrix.cli import build_parser, main


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_help_lists_subcommands():
    ap = build_parser()
    text = ap.format_help()
    for cmd in ("count", "expsum", "series", "series-check", "integral",
                "alpha", "experiment", "audit", "selftest"):
        assert cmd in text


def test_unknown_flag_exit_2(capsys):
    code, _, _ = _run(capsys, "count", "--B", "3", "--frobnicate")
    assert code == 2


def test_missing_form_file_exit_2(capsys):
    code, _, err = _run(capsys, "count", "--B", "3", "--form", "/no/such.json")
    assert code == 2
    assert "invalid input" in err


def test_malformed_form_file_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"nvars": 3}')
    code, _, err = _run(capsys, "count", "--B", "3", "--form", str(bad))
    assert code == 2
    assert "coeffs" in err


def test_budget_refusal_exit_3(capsys):
    code, _, err = _run(capsys, "--budget", "10", "expsum", "--q", "8",
                        "--L", "2", "--lam", "1,0,0,0,0")
    assert code == 3
    assert "budget" in err


def test_count_json(capsys):
    code, out, _ = _run(capsys, "count", "--B", "3")
    assert code == 0
    data = json.loads(out)
    assert set(data) == {"count", "B", "R", "L", "enumerator", "wall_time_ms"}
    assert data["count"] == 378
    assert data["enumerator"] == "zoom_aware"


def test_count_emit_points(tmp_path, capsys):
    path = tmp_path / "pts.txt"
    code, out, _ = _run(capsys, "count", "--B", "2", "--mode", "naive",
                        "--emit-points", str(path))
    assert code == 0
    data = json.loads(out)
    lines = path.read_text().strip().split("\n")
    assert len(lines) == data["count"] > 0
    assert all(len(line.split()) == 5 for line in lines)


def test_expsum_trivial(capsys):
    code, out, _ = _run(capsys, "expsum", "--q", "1")
    assert code == 0
    data = json.loads(out)
    assert data["value"] == {"re": 1.0, "im": 0.0}
    assert data["q1"] * data["q2"] == 1


def test_expsum_factored_matches_direct(capsys):
    _, out_d, _ = _run(capsys, "expsum", "--q", "6", "--L", "2",
                       "--c", "1,0,2,0,0")
    _, out_f, _ = _run(capsys, "expsum", "--q", "6", "--L", "2",
                       "--c", "1,0,2,0,0", "--method", "factored")
    d, f = json.loads(out_d), json.loads(out_f)
    assert abs(d["value"]["re"] - f["value"]["re"]) < 1e-6
    assert abs(d["value"]["im"] - f["value"]["im"]) < 1e-6


def test_series_json(capsys):
    code, out, _ = _run(capsys, "series", "--prime-cutoff", "10")
    assert code == 0
    data = json.loads(out)
    assert data["cutoff"] == 10
    assert [f["p"] for f in data["factors"]] == [2, 3, 5, 7]
    assert data["value"] > 0
    assert "/" in data["value_exact"]


def test_series_check_json(capsys):
    code, out, _ = _run(capsys, "series-check", "--X", "20")
    assert code == 0
    data = json.loads(out)
    assert data["X"] == 20
    assert data["rel_diff"] < 0.2


def test_integral_json(capsys):
    code, out, _ = _run(capsys, "integral", "--R", "10")
    assert code == 0
    data = json.loads(out)
    assert data["method"] == "closed_form"
    assert data["I_R_exact"] == "2/375"
    assert abs(data["omega_real"] - 0.008) < 1e-15


def test_alpha_csv(capsys):
    code, out, err = _run(capsys, "alpha", "--gammas", "0,2,3",
                          "--B-schedule", "10,20,40")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "gamma,B,min_value,witness_point"
    assert len(lines) == 1 + 3 * 3
    assert "bracket" in err


def test_experiment_csv_and_summary(tmp_path, capsys):
    cfg = tmp_path / "exp.toml"
    cfg.write_text('[grid]\nB_schedule = [20, 40]\n'
                   'L_schedule = [{L = 1, gamma = [0,0,0,0,0]}]\n'
                   'prime_cutoff = 20\n')
    out_csv = tmp_path / "rows.csv"
    summ = tmp_path / "summary.json"
    code, _, _ = _run(capsys, "experiment", "--config", str(cfg),
                      "--out", str(out_csv), "--summary", str(summ))
    assert code == 0
    lines = out_csv.read_text().strip().split("\n")
    assert lines[0] == "B,R,L,count,main_term,rel_err,wall_time_ms"
    assert len(lines) == 3
    data = json.loads(summ.read_text())
    assert set(data) == {"slope", "r2", "audits"}


def test_selftest(capsys):
    code, out, _ = _run(capsys, "selftest")
    assert code == 0
    assert "all 9 selftest checks passed" in out
