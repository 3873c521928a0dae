import json
import math

import pytest

from quadrix.harness import (CSV_HEADER, ExperimentConfig, ExperimentRow,
                             audit_inequalities, emit_csv, emit_summary,
                             fit_error_exponent, run_grid)

E0 = (1, 0, 0, 0, 0)


def _small_config(**kw):
    base = ExperimentConfig.default()
    args = dict(form=base.form, xi=base.xi, box=base.box, tau=0.5,
                B_schedule=(20, 40, 60), L_schedule=((1, E0), (2, E0)),
                prime_cutoff=20)
    args.update(kw)
    return ExperimentConfig(**args)


def test_default_config():
    cfg = ExperimentConfig.default()
    assert cfg.B_schedule == (250, 500, 1000, 2000, 4000)
    assert cfg.tau == 0.5
    assert len(cfg.L_schedule) == 3


def test_config_validation():
    with pytest.raises(ValueError):
        _small_config(tau=1.5)
    with pytest.raises(ValueError):
        _small_config(B_schedule=())


def test_radius_formula():
    cfg = _small_config()
    for b in (100, 400, 2500):
        for l in (1, 2, 3):
            assert cfg.radius(b, l) == max(math.floor(b ** 0.25 / l), 1)
    assert _small_config(tau=0.99).radius(2, 3) == 1  # floor at 1


def test_toml_roundtrip(tmp_path):
    path = tmp_path / "exp.toml"
    path.write_text(
        '[form]\nnvars = 5\ncoeffs = [[0,1,1],[2,2,1],[3,3,1],[4,4,-1]]\n'
        '[frame]\nxi = [1,0,0,0,0]\nbox = [[-1,1],[-1,1],[-1,1]]\n'
        '[grid]\ntau = 0.25\nB_schedule = [100, 200]\nprime_cutoff = 30\n'
        'L_schedule = [{L = 1, gamma = [0,0,0,0,0]},'
        ' {L = 2, gamma = [1,0,0,0,0]}]\n')
    cfg = ExperimentConfig.from_toml(path)
    assert cfg.tau == 0.25
    assert cfg.B_schedule == (100, 200)
    assert cfg.L_schedule == ((1, (0, 0, 0, 0, 0)), (2, (1, 0, 0, 0, 0)))
    assert cfg.prime_cutoff == 30
    assert cfg.form.nvars == 5


def test_workload_cap():
    cfg = _small_config(B_schedule=(4000, 8000), point_cap=10**6)
    with pytest.raises(ValueError):
        run_grid(cfg)


def test_run_grid_rows():
    cfg = _small_config()
    rows = run_grid(cfg)
    assert len(rows) == 6
    assert [(r.B, r.L) for r in rows] == [(20, 1), (20, 2), (40, 1), (40, 2),
                                         (60, 1), (60, 2)]
    for r in rows:
        assert r.count >= 0 and r.main_term > 0
        assert r.wall_time_ms == 0  # timings disabled by default
        assert r.R == cfg.radius(r.B, r.L)
        if r.rel_err is not None:
            assert abs(r.rel_err - (r.count / r.main_term - 1)) < 1e-12


def test_fit_error_exponent_synthetic():
    rows = [ExperimentRow(b, 1, 1, 0, 1.0, b ** -0.5, 0)
            for b in (100, 200, 400, 800, 1600)]
    slope, r2 = fit_error_exponent(rows)
    assert abs(slope + 0.5) < 1e-12
    assert abs(r2 - 1.0) < 1e-12
    flat = [ExperimentRow(b, 1, 1, 0, 1.0, 0.25, 0)
            for b in (100, 200, 400, 800)]
    slope, _ = fit_error_exponent(flat)
    assert abs(slope) < 1e-12
    with pytest.raises(ValueError):
        fit_error_exponent(rows[:3])


def test_emit_csv_deterministic():
    cfg = _small_config()
    a = emit_csv(run_grid(cfg))
    b = emit_csv(run_grid(cfg))
    assert a == b
    lines = a.strip().split("\n")
    assert lines[0] == CSV_HEADER == "B,R,L,count,main_term,rel_err,wall_time_ms"
    assert len(lines) == 7
    for line in lines[1:]:
        assert len(line.split(",")) == 7


def test_audits_pass_on_small_grid():
    cfg = _small_config(B_schedule=(20, 40))
    audits = audit_inequalities(cfg, max_B=40)
    names = [a.name for a in audits]
    assert names == ["count_vs_lattice_bound", "real_measure_R_scaling",
                     "series_L_scaling"]
    for a in audits:
        assert a.passed, (a.name, a.spread)
        assert a.spread < 100
    # the real-measure audit is exact in the closed-form regime
    assert audits[1].spread == 1.0


def test_emit_summary_schema():
    cfg = _small_config(B_schedule=(20, 30, 40, 50, 60))
    rows = run_grid(cfg)
    audits = audit_inequalities(cfg, max_B=40)
    data = json.loads(emit_summary(rows, audits))
    assert set(data) == {"slope", "r2", "audits"}
    assert len(data["audits"]) == 3
    for a in data["audits"]:
        assert set(a) == {"name", "ratios", "spread", "passed"}
