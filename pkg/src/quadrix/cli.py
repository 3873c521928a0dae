"""Command-line interface: every operation as a subcommand with JSON or CSV
output, explicit budgets, and stable exit codes (0 ok, 2 invalid input,
3 budget refusal, 1 internal error)."""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

from .forms import (OutsideChartError, QuadraticForm, ZoomSpec, load_form,
                    witt_frame)
from .enumeration import (AdelicWindow, count_NV, count_NW, count_NWo,
                          enumerate_cone_points, lattice_upper_bound)
from .expsums import ExpSumInput, s_q_direct, s_q_factored
from .harness import (ExperimentConfig, audit_inequalities, emit_csv,
                      emit_summary, run_grid)
from .localdensities import singular_series, singser_identity_check
from .realvolume import real_tamagawa, singular_integral
from .approx import alpha_empirical, conic_witness, place_of, repulsion_min
from .util import BudgetError, format_rational, term_budget

DEFAULT_FORM = {"nvars": 5,
                "coeffs": [[0, 1, 1], [2, 2, 1], [3, 3, 1], [4, 4, -1]]}


def _vec(s: str) -> tuple:
    return tuple(int(v) for v in s.split(","))


def _box(s: str) -> tuple:
    out = []
    for part in s.split(","):
        a, _, b = part.partition(":")
        out.append((a, b))
    return tuple(out)


def _form_of(args) -> QuadraticForm:
    if getattr(args, "form", None):
        return load_form(args.form)
    return load_form(DEFAULT_FORM)


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _cmd_count(args) -> int:
    form = _form_of(args)
    frame = witt_frame(form, _vec(args.xi))
    zoom = ZoomSpec(_box(args.box), args.R)
    gamma = _vec(args.gamma) if args.gamma else (0,) * form.nvars
    window = AdelicWindow(frame, zoom, args.L, gamma)
    budget = term_budget(args.budget)
    start = time.monotonic()
    if args.emit_points:
        pts = enumerate_cone_points(window, args.B, args.mode, budget)
        with open(args.emit_points, "w") as fh:
            for p in pts:
                fh.write(" ".join(str(v) for v in p) + "\n")
        count = len(pts)
        used = args.mode
    else:
        res = count_NW(window, args.B, args.mode, budget=budget)
        count, used = res.count, res.enumerator
    ms = int(1000 * (time.monotonic() - start))
    _emit({"count": count, "B": args.B, "R": args.R, "L": args.L,
           "enumerator": used, "wall_time_ms": ms})
    return 0


def _cmd_expsum(args) -> int:
    form = _form_of(args)
    inp = ExpSumInput(form, args.q, args.L, _vec(args.lam), _vec(args.c))
    budget = term_budget(args.budget)
    fn = s_q_factored if args.method == "factored" else s_q_direct
    val = fn(inp, budget=budget)
    _emit({"q": args.q, "L": args.L, "method": val.method,
           "q1": val.q1, "q2": val.q2,
           "value": {"re": val.value.real, "im": val.value.imag}})
    return 0


def _cmd_series(args) -> int:
    form = _form_of(args)
    gamma = _vec(args.gamma) if args.gamma else None
    s = singular_series(form, args.L, gamma, args.prime_cutoff,
                        budget=term_budget(args.budget))
    _emit({"value": float(s.value),
           "value_exact": format_rational(s.value),
           "cutoff": s.cutoff, "note": s.note,
           "factors": [{"p": f.p, "density": format_rational(f.density),
                        "stabilized_at": f.stabilized_at}
                       for f in s.factors]})
    return 0


def _cmd_series_check(args) -> int:
    form = _form_of(args)
    rep = singser_identity_check(form, args.L, _vec(args.lam), args.X,
                                 budget=term_budget(args.budget))
    _emit({"partial_sum": float(rep.partial_sum),
           "partial_sum_exact": format_rational(rep.partial_sum),
           "product": float(rep.product_value),
           "product_exact": format_rational(rep.product_value),
           "rel_diff": rep.rel_diff, "X": rep.X, "note": rep.tail_note})
    return 0


def _cmd_integral(args) -> int:
    form = _form_of(args)
    frame = witt_frame(form, _vec(args.xi))
    zoom = ZoomSpec(_box(args.box), args.R)
    v = singular_integral(frame, zoom)
    w = real_tamagawa(frame, zoom)
    _emit({"I_R": v.value, "omega_real": w.value, "method": v.method,
           "est_error": v.est_error,
           "I_R_exact": None if v.exact is None else format_rational(v.exact)})
    return 0


def _cmd_alpha(args) -> int:
    form = _form_of(args)
    frame = witt_frame(form, _vec(args.xi))
    place = place_of(args.place)
    gammas = [float(g) for g in args.gammas.split(",")]
    schedule = [int(b) for b in args.B_schedule.split(",")]
    table = alpha_empirical(frame, place, gammas, schedule)
    print("gamma,B,min_value,witness_point")
    wit = conic_witness(frame, 1)[0]
    wtxt = ":".join(str(v) for v in wit)
    for row in table.rows:
        for b, m in row.minima:
            print(f"{row.gamma},{b},{m!r},{wtxt}")
    print(f"# bracket: [{table.bracket[0]},{table.bracket[1]}]",
          file=sys.stderr)
    return 0


def _cmd_experiment(args) -> int:
    config = (ExperimentConfig.from_toml(args.config) if args.config
              else ExperimentConfig.default())
    rows = run_grid(config)
    csv = emit_csv(rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(csv)
    else:
        sys.stdout.write(csv)
    if args.summary:
        audits = audit_inequalities(config)
        with open(args.summary, "w") as fh:
            fh.write(emit_summary(rows, audits))
    return 0


def _cmd_audit(args) -> int:
    config = (ExperimentConfig.from_toml(args.config) if args.config
              else ExperimentConfig.default())
    audits = audit_inequalities(config)
    _emit([{"name": a.name, "ratios": list(a.ratios), "spread": a.spread,
            "passed": a.passed} for a in audits])
    return 0


def _cmd_selftest(args) -> int:
    from .modarith import jacobi, ramanujan_sum
    from .forms import dual_form
    form = load_form(DEFAULT_FORM)
    checks = []

    def ck(name, ok):
        checks.append((name, bool(ok)))
        print(f"{'ok' if ok else 'FAIL'}  {name}")

    ck("form value", form.evaluate((1, 2, 1, 1, 1)) == 3)
    ck("dual scaling", dual_form(form).eval_scaled((1, 1, 0, 0, 0)) == 16)
    ck("jacobi(2,15)", jacobi(2, 15) == 1)
    ck("ramanujan(9,3)", ramanujan_sum(9, 3) == -3)
    frame = witt_frame(form, (1, 0, 0, 0, 0))
    zoom = ZoomSpec(((-1, 1), (-1, 1), (-1, 1)), 1)
    w = AdelicWindow(frame, zoom, 1, (0,) * 5)
    naive = enumerate_cone_points(w, 4, "naive")
    zaw = enumerate_cone_points(w, 4, "zoom_aware")
    ck("enumerator cross-check", naive == zaw)
    mob = count_NWo(w, 12, "mobius").count
    dire = count_NWo(w, 12, "direct").count
    ck("moebius identity", mob == dire)
    inp = ExpSumInput(form, 6, 2, (1, 0, 0, 0, 0), (1, 0, 2, 0, 0))
    d = s_q_direct(inp).value
    f = s_q_factored(inp).value
    ck("exp sum factorization", abs(d - f) < 1e-6)
    s = singular_series(form, 1, None, prime_cutoff=20)
    ck("series positive", s.value > 0)
    v = singular_integral(frame, ZoomSpec(((-1, 1),) * 3, 10))
    ck("integral closed form", v.exact == Fraction(16, 3000))
    bad = [name for name, ok in checks if not ok]
    if bad:
        print(f"{len(bad)} selftest failure(s)", file=sys.stderr)
        return 1
    print(f"all {len(checks)} selftest checks passed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="quadrix",
        description="point counts, exponential sums, and local densities "
                    "for quadrics in shrinking adelic neighbourhoods")
    ap.add_argument("--threads", type=int, default=None,
                    help="compiled-kernel thread count (default: all cores)")
    ap.add_argument("--budget", type=int, default=None,
                    help="term budget override (also: QUADRIX_BUDGET)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", help="integer cone points in a window")
    p.add_argument("--form", help="form file (JSON)")
    p.add_argument("--xi", default="1,0,0,0,0", help="base point, comma ints")
    p.add_argument("--box", default="-1:1,-1:1,-1:1",
                   help="zoom box, comma-separated a:b pairs")
    p.add_argument("--R", type=int, default=1, help="zoom radius")
    p.add_argument("--L", type=int, default=1, help="congruence modulus")
    p.add_argument("--gamma", help="residue vector mod L, comma ints")
    p.add_argument("--B", type=int, required=True, help="height bound")
    p.add_argument("--mode", default="auto",
                   choices=("auto", "naive", "zoom_aware"))
    p.add_argument("--emit-points", help="write points to this file")
    p.set_defaults(fn=_cmd_count)

    p = sub.add_parser("expsum", help="twisted quadratic exponential sum")
    p.add_argument("--form", help="form file (JSON)")
    p.add_argument("--q", type=int, required=True, help="outer modulus")
    p.add_argument("--L", type=int, default=1, help="congruence modulus")
    p.add_argument("--lam", default="1,0,0,0,0", help="base residue vector")
    p.add_argument("--c", default="0,0,0,0,0", help="frequency vector")
    p.add_argument("--method", default="direct",
                   choices=("direct", "factored"))
    p.set_defaults(fn=_cmd_expsum)

    p = sub.add_parser("series", help="truncated singular series")
    p.add_argument("--form", help="form file (JSON)")
    p.add_argument("--L", type=int, default=1)
    p.add_argument("--gamma", help="residue vector mod L")
    p.add_argument("--prime-cutoff", type=int, default=100)
    p.set_defaults(fn=_cmd_series)

    p = sub.add_parser("series-check",
                       help="partial sum vs Euler product identity")
    p.add_argument("--form", help="form file (JSON)")
    p.add_argument("--L", type=int, default=1)
    p.add_argument("--lam", default="1,0,0,0,0")
    p.add_argument("--X", type=int, default=50, help="modulus cutoff")
    p.set_defaults(fn=_cmd_series_check)

    p = sub.add_parser("integral", help="singular integral of a zoom window")
    p.add_argument("--form", help="form file (JSON)")
    p.add_argument("--xi", default="1,0,0,0,0")
    p.add_argument("--box", default="-1:1,-1:1,-1:1")
    p.add_argument("--R", type=int, default=10)
    p.set_defaults(fn=_cmd_integral)

    p = sub.add_parser("alpha", help="empirical approximation constants")
    p.add_argument("--form", help="form file (JSON)")
    p.add_argument("--xi", default="1,0,0,0,0")
    p.add_argument("--place", default="real", help="real or a prime p")
    p.add_argument("--gammas", default="0,0.5,1,1.5,2,2.5,3",
                   help="comma-separated exponents")
    p.add_argument("--B-schedule", default="25,50,100,200",
                   dest="B_schedule", help="comma-separated height bounds")
    p.set_defaults(fn=_cmd_alpha)

    p = sub.add_parser("experiment", help="count vs main term over a grid")
    p.add_argument("--config", help="TOML config file (default grid if absent)")
    p.add_argument("--out", help="CSV output path (stdout if absent)")
    p.add_argument("--summary", help="JSON summary output path")
    p.set_defaults(fn=_cmd_experiment)

    p = sub.add_parser("audit", help="fitted-constant inequality audits")
    p.add_argument("--config", help="TOML config file")
    p.set_defaults(fn=_cmd_audit)

    p = sub.add_parser("selftest", help="small-instance oracle suite")
    p.set_defaults(fn=_cmd_selftest)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    if args.threads is not None:
        try:
            import numba
            numba.set_num_threads(args.threads)
        except ImportError:
            pass
    try:
        return args.fn(args)
    except BudgetError as exc:
        print(f"budget refused: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError, OutsideChartError, KeyError,
            json.JSONDecodeError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
