"""Experiment driver: grids over (B, L) at fixed tau, count vs. main term,
empirical error exponents, inequality audits, and deterministic CSV/JSON
emission."""

from __future__ import annotations

import json
import math
import time
try:
    import tomllib
except ImportError:  # python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .forms import QuadraticForm, ZoomSpec, load_form, witt_frame
from .enumeration import AdelicWindow, count_NV, count_NW, lattice_upper_bound
from .localdensities import singular_series
from .realvolume import main_term, real_tamagawa
from .util import format_rational

DEFAULT_FORM = {"nvars": 5,
                "coeffs": [[0, 1, 1], [2, 2, 1], [3, 3, 1], [4, 4, -1]]}

CSV_HEADER = "B,R,L,count,main_term,rel_err,wall_time_ms"


@dataclass(frozen=True)
class ExperimentConfig:
    form: QuadraticForm
    xi: tuple
    box: tuple
    tau: float
    B_schedule: tuple
    L_schedule: tuple  # (L, Gamma) pairs
    prime_cutoff: int = 100
    r_constant: float = 1.0
    timings: bool = False
    seed: int = 0
    point_cap: int = 10**13

    def __post_init__(self):
        if not (-1 < self.tau < 1):
            raise ValueError("tau must lie in (-1, 1)")
        if not self.B_schedule or not self.L_schedule:
            raise ValueError("schedules must be nonempty")

    @classmethod
    def default(cls) -> "ExperimentConfig":
        form = load_form(DEFAULT_FORM)
        return cls(form, (1, 0, 0, 0, 0),
                   ((-1, 1), (-1, 1), (-1, 1)), 0.5,
                   (250, 500, 1000, 2000, 4000),
                   ((1, (1, 0, 0, 0, 0)), (2, (1, 0, 0, 0, 0)),
                    (3, (1, 0, 0, 0, 0))))

    @classmethod
    def from_toml(cls, path) -> "ExperimentConfig":
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
        base = cls.default()
        form = load_form(data["form"]) if "form" in data else base.form
        frame = data.get("frame", {})
        xi = tuple(frame.get("xi", base.xi))
        box = tuple(tuple(p) for p in frame.get("box", base.box))
        grid = data.get("grid", {})
        ls = grid.get("L_schedule")
        if ls is not None:
            lsched = tuple((int(e["L"]), tuple(e["gamma"])) for e in ls)
        else:
            lsched = base.L_schedule
        return cls(form, xi, box,
                   float(grid.get("tau", base.tau)),
                   tuple(grid.get("B_schedule", base.B_schedule)),
                   lsched,
                   int(grid.get("prime_cutoff", base.prime_cutoff)),
                   float(grid.get("r_constant", base.r_constant)),
                   bool(grid.get("timings", False)),
                   int(grid.get("seed", 0)),
                   int(grid.get("point_cap", base.point_cap)))

    def radius(self, B: int, L: int) -> int:
        r = math.floor(self.r_constant * B ** ((1 - self.tau) / 2) / L)
        return max(r, 1)


@dataclass(frozen=True)
class ExperimentRow:
    B: int
    R: int
    L: int
    count: int
    main_term: float
    rel_err: Optional[float]
    wall_time_ms: int

    def csv(self) -> str:
        rel = "nan" if self.rel_err is None else repr(self.rel_err)
        return (f"{self.B},{self.R},{self.L},{self.count},"
                f"{self.main_term!r},{rel},{self.wall_time_ms}")


def _estimated_workload(config: ExperimentConfig) -> float:
    total = 0.0
    for b in config.B_schedule:
        for l, _ in config.L_schedule:
            r = config.radius(b, l)
            total += 4 * b**3 / (3 * r**2 * l**3) + b**3 / r**2
    return total


def run_grid(config: ExperimentConfig) -> list[ExperimentRow]:
    if _estimated_workload(config) > config.point_cap:
        raise ValueError("estimated grid workload exceeds the point cap; "
                         "shrink B_schedule or raise point_cap")
    frame = witt_frame(config.form, config.xi)
    rows = []
    for b in config.B_schedule:
        for l, gamma in config.L_schedule:
            r = config.radius(b, l)
            zoom = ZoomSpec(config.box, r)
            start = time.monotonic()
            count = count_NV(frame, zoom, l, gamma, b).count
            mt = main_term(frame, zoom, l, gamma, b,
                           prime_cutoff=config.prime_cutoff)
            elapsed = int(1000 * (time.monotonic() - start))
            rel = count / mt.quadric - 1 if mt.quadric > 0 else None
            rows.append(ExperimentRow(b, r, l, count, mt.quadric, rel,
                                      elapsed if config.timings else 0))
    return rows


def fit_error_exponent(rows: Sequence[ExperimentRow]) -> tuple[float, float]:
    """Least-squares slope of log|rel_err| against log B, with r^2."""
    pts = [(math.log(row.B), math.log(abs(row.rel_err)))
           for row in rows if row.rel_err]
    if len(pts) < 4:
        raise ValueError("need at least 4 rows with nonzero rel_err")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2


@dataclass(frozen=True)
class AuditResult:
    name: str
    ratios: tuple
    spread: float
    passed: bool


SPREAD_LIMIT = 100.0


def _audit(name: str, ratios: Sequence[float]) -> AuditResult:
    ratios = tuple(float(r) for r in ratios)
    pos = [r for r in ratios if r > 0]
    spread = max(pos) / min(pos) if pos else float("inf")
    return AuditResult(name, ratios, spread, spread < SPREAD_LIMIT)


def audit_inequalities(config: ExperimentConfig,
                       max_B: int = 1000) -> list[AuditResult]:
    """Fitted-constant audits: the count/bound ratio for the lattice bound,
    the R-scaling of the real measure, and the L-scaling of the series."""
    frame = witt_frame(config.form, config.xi)
    n = config.form.nvars - 1
    out = []

    ratios = []
    for b in config.B_schedule:
        if b > max_B:
            continue
        for l, gamma in config.L_schedule:
            r = config.radius(b, l)
            zoom = ZoomSpec(config.box, r)
            cnt = count_NW(AdelicWindow(frame, zoom, l, gamma), b).count
            bound = lattice_upper_bound(n, b, r, l)
            if cnt:
                ratios.append(cnt / float(bound))
    out.append(_audit("count_vs_lattice_bound", ratios))

    ratios = []
    for r in (10, 20, 40, 80):
        zoom = ZoomSpec(config.box, r)
        w = real_tamagawa(frame, zoom)
        ratios.append(w.value * r ** (n - 1))
    out.append(_audit("real_measure_R_scaling", ratios))

    ratios = []
    for l, gamma in config.L_schedule:
        s = singular_series(config.form, l, gamma if l > 1 else None,
                            prime_cutoff=config.prime_cutoff)
        ratios.append(float(s.value) * l**n)
    out.append(_audit("series_L_scaling", ratios))
    return out


def emit_csv(rows: Sequence[ExperimentRow]) -> str:
    return "\n".join([CSV_HEADER] + [row.csv() for row in rows]) + "\n"


def emit_summary(rows: Sequence[ExperimentRow],
                 audits: Sequence[AuditResult]) -> str:
    try:
        slope, r2 = fit_error_exponent(rows)
    except ValueError:
        slope, r2 = None, None
    return json.dumps({
        "slope": slope,
        "r2": r2,
        "audits": [{"name": a.name, "ratios": list(a.ratios),
                    "spread": a.spread, "passed": a.passed}
                   for a in audits],
    }, indent=2) + "\n"
