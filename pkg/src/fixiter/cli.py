"""Command-line front end.

Exit codes: 0 success, 1 golden mismatch, 2 configuration error,
3 numeric failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import analysis, mappings, report
from .errors import ConfigError, FixiterError
from .golden import TABLE1_TOL
from .numerics import FORMULAS, ParamSchedule, Point, distance
from .schemes import SchemeId, StopRule, parse_scheme, run

EXIT_OK, EXIT_GOLDEN, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

# starting points used when --x0 is omitted
DEFAULT_X0 = {"cbrt": 1.99}
DEFAULT_SCHEDULE = {"datadep": (0.75, 0.75)}


def _tol(text: str) -> Optional[float]:
    if text.lower() in ("none", "off"):
        return None
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError("tolerance must be >= 0")
    return value


def _unit(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not in [0, 1]")
    return value


def _point(text: str) -> Point:
    try:
        return Point(tuple(float(v) for v in text.split(",")))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad point {text!r}: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--map", default="cbrt", choices=sorted(mappings.CATALOG),
                        help="mapping id (default: cbrt)")
    common.add_argument("--x0", type=_point, help="starting point, comma-separated coordinates")
    common.add_argument("--alpha", type=_unit, help="alpha (constant schedule) or its coefficient")
    common.add_argument("--beta", type=_unit, help="beta (constant schedule) or its coefficient")
    common.add_argument("--gamma", type=_unit, help="Noor's third parameter (default: beta)")
    common.add_argument("--schedule", default="constant", choices=["constant", *FORMULAS],
                        help="schedule kind (default: constant)")
    common.add_argument("--max-iter", type=int, default=100)
    common.add_argument("--tol-step", type=_tol, default=0.0,
                        help="stop when |x_{n+1} - x_n| <= tol; 'none' disables")
    common.add_argument("--tol-res", type=_tol, default=0.0,
                        help="stop when |T x_n - x_n| <= tol; 'none' disables")
    common.add_argument("--out", type=Path, help="output file (default: stdout)")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--svg", type=Path, help="write a log-error chart here")

    parser = argparse.ArgumentParser(prog="fixiter", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="iterate one scheme")
    p.add_argument("--scheme", default="k")

    p = sub.add_parser("compare", parents=[common], help="compare error curves of several schemes")
    p.add_argument("--scheme", action="append", required=True,
                   help="scheme id; repeat or comma-separate (at least two)")

    sub.add_parser("table1", parents=[common], help="reproduce the published table and check it")

    p = sub.add_parser("stability", parents=[common], help="T-stability harness for K iteration")
    p.add_argument("--direction", choices=["forward", "backward"], default="forward")
    p.add_argument("--sequence", choices=["approaching", "oscillating", "fixed"],
                   default="approaching", help="forward: t_n = p + a/2^n, p + a(-1)^n, or p")
    p.add_argument("--noise", choices=["geometric", "constant", "zero"], default="geometric",
                   help="backward: eta_n = a/2^n, a, or 0")
    p.add_argument("--amplitude", type=float)
    p.add_argument("--horizon", type=int)

    p = sub.add_parser("datadep", parents=[common],
                       help="fixed-point drift under an approximate operator")
    p.add_argument("--eps", type=float, default=1e-3, help="perturbation size (default: 1e-3)")
    p.add_argument("--horizon", type=int, default=10_000,
                   help="iteration cap for the perturbed orbit (default: 10000)")

    sub.add_parser("check-map", parents=[common], help="grid checks of the mapping classes")

    p = sub.add_parser("bounds", parents=[common], help="evaluate the theoretical error bounds")
    p.add_argument("--theta", type=float, help="contraction modulus (default: grid estimate)")
    p.add_argument("--e0", type=float, help="initial error (default: |x0 - p|)")
    p.add_argument("--horizon", type=int, default=20)
    return parser


def _schedule(args) -> ParamSchedule:
    da, db = DEFAULT_SCHEDULE.get(args.command, (0.25, 0.25))
    alpha = da if args.alpha is None else args.alpha
    beta = db if args.beta is None else args.beta
    if args.schedule == "constant":
        return ParamSchedule.constant(alpha, beta)
    return ParamSchedule.formula(args.schedule, alpha, beta)


def _x0(args, m: mappings.Mapping) -> Point:
    if args.x0 is not None:
        x0 = args.x0
    elif m.id in DEFAULT_X0:
        x0 = Point((DEFAULT_X0[m.id],))
    else:
        x0 = m.domain.upper
    if not m.domain.contains(x0):
        raise ConfigError(f"x0 {x0} outside the domain of {m.id!r}")
    return x0


def _config(args, **extra) -> dict:
    cfg = {"command": args.command, "map": args.map}
    cfg.update(extra)
    cfg["format"] = args.format
    return cfg


def _fixed_point(m: mappings.Mapping) -> Point:
    if m.fixed_point_hint is not None:
        return m.fixed_point_hint
    if mappings.estimate_contraction_modulus(m) >= 1.0:
        raise ConfigError(f"{m.id!r} has no known fixed point and is not contractive; "
                          "no ground truth for errors")
    return mappings.fixed_point_reference(m)


def _emit(args, csv_table, config, results, checks=None) -> None:
    if args.format == "json":
        text = report.envelope(config, results, checks)
    else:
        text = report.to_csv(*csv_table)
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)


def _write_svg(args, curves, title) -> None:
    if args.svg is not None:
        args.svg.write_text(report.error_chart_svg(curves, title))


def _stop(args) -> StopRule:
    return StopRule(max_iter=args.max_iter, tol_step=args.tol_step, tol_res=args.tol_res)


def _traj_dict(traj) -> dict:
    return {
        "scheme": traj.scheme.value,
        "stop_reason": traj.stop_reason,
        "records": [{"n": r.n, "x": list(r.x), "residual": r.residual, "error": r.error,
                     "intermediates": None if r.trace is None
                     else {k: list(v) for k, v in r.trace.intermediates}}
                    for r in traj.records],
    }


def cmd_run(args) -> int:
    m = mappings.get_mapping(args.map)
    scheme = parse_scheme(args.scheme)
    s = _schedule(args)
    x0 = _x0(args, m)
    stop = _stop(args)
    traj = run(scheme, m, x0, s, stop, gamma=args.gamma)
    checks = {
        "x0_first": traj.records[0].x == x0,
        "consecutive": all(r.n == i for i, r in enumerate(traj.records)),
    }
    if traj.stop_reason == "tol_reached":
        checks["final_step_within_tol"] = (
            distance(traj.records[-1].x, traj.records[-2].x) <= stop.tol_step)
    cfg = _config(args, scheme=scheme.value, x0=x0, schedule=s.summary(), gamma=args.gamma,
                  stop={"max_iter": stop.max_iter, "tol_step": stop.tol_step,
                        "tol_res": stop.tol_res})
    _emit(args, report.trajectory_rows(traj), cfg, _traj_dict(traj), checks)
    _write_svg(args, {scheme.value: traj.errors}, f"{scheme.value} on {m.id}")
    print(f"{scheme.value}: {traj.stop_reason} after {len(traj.records) - 1} steps, "
          f"x = {traj.final}", file=sys.stderr)
    return EXIT_OK


def _scheme_list(values: Sequence[str]) -> list[SchemeId]:
    out = []
    for v in values:
        out.extend(parse_scheme(part.strip()) for part in v.split(",") if part.strip())
    return out


def cmd_compare(args) -> int:
    schemes = _scheme_list(args.scheme)
    if len(schemes) < 2:
        raise ConfigError("compare needs at least two schemes")
    m = mappings.get_mapping(args.map)
    p = _fixed_point(m)
    s = _schedule(args)
    x0 = _x0(args, m)
    stop = _stop(args)
    trajs = {sid: run(sid, m, x0, s, stop, gamma=args.gamma, p=p) for sid in schemes}
    first = {sid.value: analysis.first_converged_index(t, p) for sid, t in trajs.items()}

    theta = mappings.estimate_contraction_modulus(m)
    rate = None
    e0 = distance(x0, p)
    if 0.0 < theta < 1.0 and e0 > 0:
        rate = analysis.compare_k_vs_picard_s(theta, s, e0)

    names = [sid.value for sid in schemes]
    length = max(len(t.records) for t in trajs.values())
    rows = [[n, *(t.records[n].error if n < len(t.records) else None for t in trajs.values())]
            for n in range(length)]
    checks = {}
    if SchemeId.K in trajs and 0.0 < theta < 1.0:
        excess = analysis.k_step_bound_excess(trajs[SchemeId.K], theta, p)
        checks["k_per_step_bound_excess"] = excess
        checks["k_per_step_bound_holds"] = excess <= mappings.TOL
    results = {
        "first_converged": first,
        "stop_reasons": {sid.value: t.stop_reason for sid, t in trajs.items()},
        "final": {sid.value: list(t.final) for sid, t in trajs.items()},
        "errors": {sid.value: t.errors for sid, t in trajs.items()},
        "rate_report": None if rate is None else rate.to_dict(),
    }
    cfg = _config(args, schemes=names, x0=x0, schedule=s.summary(), gamma=args.gamma,
                  stop={"max_iter": stop.max_iter, "tol_step": stop.tol_step,
                        "tol_res": stop.tol_res})
    _emit(args, (["n", *names], rows), cfg, results, checks)
    _write_svg(args, {sid.value: t.errors for sid, t in trajs.items()},
               f"Convergence to {p.coords[0] if p.dim == 1 else p} on {m.id}")
    for name in names:
        print(f"{name}: first converged index {first[name]}", file=sys.stderr)
    if rate is not None:
        print(f"k vs picard_s bounds (theta={theta!r}): {rate.verdict}", file=sys.stderr)
    return EXIT_OK


def cmd_table1(args) -> int:
    trajs = report.reproduce_table1()
    cells = report.table1_cells(trajs)
    bad = report.table1_mismatches(trajs)
    header, rows = report.table1_rows(trajs)
    worst = max(abs(got - expected) for _, _, expected, got in cells)
    checks = {"cells_checked": len(cells), "tolerance": TABLE1_TOL, "max_abs_deviation": worst,
              "within_tolerance": not bad}
    results = {"columns": header[1:], "rows": rows}
    _emit(args, (header, rows), {"command": "table1", "format": args.format}, results, checks)
    _write_svg(args, {sid.value: t.errors for sid, t in trajs.items()},
               "Convergence to 1.521379706804568, T(x) = (x + 2)^(1/3)")
    if bad:
        sid, n, expected, got = bad[0]
        print(f"table1 mismatch: {sid.value} row x_{n}: published {expected!r}, "
              f"computed {got!r}", file=sys.stderr)
        return EXIT_GOLDEN
    print(f"table1: all {len(cells)} cells within {TABLE1_TOL} (max deviation {worst:.3e})", file=sys.stderr)
    return EXIT_OK


def cmd_stability(args) -> int:
    m = mappings.get_mapping(args.map)
    p = _fixed_point(m)
    s = _schedule(args)
    if args.direction == "forward":
        amp = 0.3 if args.amplitude is None else args.amplitude
        horizon = args.horizon or 60
        seq = {"approaching": analysis.approaching(p, amp),
               "oscillating": analysis.oscillating(p, amp),
               "fixed": lambda n: p}[args.sequence]
        rep = analysis.stability_forward(m, s, seq, horizon)
        cfg = _config(args, direction="forward", sequence=args.sequence, amplitude=amp,
                      horizon=horizon, schedule=s.summary())
    else:
        amp = 0.1 if args.amplitude is None else args.amplitude
        horizon = args.horizon or 100
        noise = {"geometric": analysis.geometric_noise(amp),
                 "constant": lambda n: amp,
                 "zero": lambda n: 0.0}[args.noise]
        x0 = _x0(args, m)
        rep = analysis.stability_backward(m, s, noise, horizon, t0=x0)
        cfg = _config(args, direction="backward", noise=args.noise, amplitude=amp,
                      horizon=horizon, t0=x0, schedule=s.summary())
    rows = [[n, *rep.t[n].coords, rep.eps[n] if n < len(rep.eps) else None, rep.errors[n]]
            for n in range(len(rep.t))]
    tcols = ["t"] if p.dim == 1 else [f"t{i}" for i in range(p.dim)]
    _emit(args, (["n", *tcols, "eps", "error"], rows), cfg, rep.to_dict(),
          {"equivalence_holds": rep.equivalence_holds, "applicable": rep.applicable})
    _write_svg(args, {"error": list(rep.errors), "eps": list(rep.eps)},
               f"{args.direction} stability on {m.id}")
    note = "" if rep.applicable else " (not applicable: noise does not vanish)"
    print(f"t_n -> p: {rep.t_converges}; eps_n -> 0: {rep.eps_converges}{note}",
          file=sys.stderr)
    return EXIT_OK


def cmd_datadep(args) -> int:
    m = mappings.get_mapping(args.map)
    s = _schedule(args)
    m_tilde = mappings.perturbed(m, args.eps)
    rep = analysis.data_dependence(m, m_tilde, args.eps, s, horizon=args.horizon)
    d = rep.to_dict()
    cfg = _config(args, eps=args.eps, horizon=args.horizon, schedule=s.summary())
    _emit(args, (list(d), [[v if not isinstance(v, list) else ";".join(map(repr, v))
                            for v in d.values()]]),
          cfg, d, {"bound_holds": rep.bound_holds})
    if rep.applicable:
        print(f"|p - p~| = {rep.observed_gap!r} <= {rep.theoretical_bound!r}: {rep.bound_holds}",
              file=sys.stderr)
    else:
        print("not applicable: schedule needs alpha_n*beta_n >= 1/2 and a divergent sum",
              file=sys.stderr)
    return EXIT_OK


def cmd_check_map(args) -> int:
    m = mappings.get_mapping(args.map)
    grid = mappings.default_grid()
    reports = [mappings.check_contraction(m, grid), mappings.check_nonexpansive(m, grid),
               mappings.check_condition_c(m, grid)]
    p = m.fixed_point_hint or mappings.fixed_point_reference(m)
    if distance(m(p), p) > mappings.TOL:
        p = mappings.fixed_point_reference(m)
    reports.append(mappings.check_quasi_nonexpansive(m, p, grid))
    reports.append(mappings.check_prop1_iii(m, grid))
    modulus = reports[0].estimated_modulus

    def wit(r, i):
        return None if r.witness is None else ";".join(repr(c) for c in r.witness[i])

    rows = [[r.property, r.verdict, r.samples_checked, r.estimated_modulus, wit(r, 0), wit(r, 1)]
            for r in reports]
    header = ["property", "verdict", "samples_checked", "estimated_modulus",
              "witness_x", "witness_y"]
    cfg = _config(args, grid=grid, fixed_point=p)
    results = {"estimated_modulus": modulus, "reports": [r.to_dict() for r in reports]}
    _emit(args, (header, rows), cfg, results,
          {"witness_iff_fail": all((r.witness is None) == r.passed for r in reports)})
    for r in reports:
        print(f"{r.property}: {r.verdict}", file=sys.stderr)
    print(f"estimated modulus: {modulus!r}", file=sys.stderr)
    return EXIT_OK


def cmd_bounds(args) -> int:
    m = mappings.get_mapping(args.map)
    s = _schedule(args)
    theta = mappings.estimate_contraction_modulus(m) if args.theta is None else args.theta
    if args.e0 is None:
        e0 = distance(_x0(args, m), _fixed_point(m))
    else:
        e0 = args.e0
    rows = []
    for n in range(args.horizon):
        kp = analysis.bound_k_product(n, e0, theta, s)
        ps = analysis.bound_picard_s_product(n, e0, theta, s)
        rows.append([n, kp, analysis.bound_k_exponential(n, e0, theta, s), ps,
                     kp / ps if ps > 0 else None, analysis.rate_ratio(theta, n)])
    header = ["n", "k_product", "k_exponential", "picard_s_product", "ratio", "rate_ratio"]
    rate = analysis.compare_k_vs_picard_s(theta, s, e0 if e0 > 0 else 1.0)
    cfg = _config(args, theta=theta, e0=e0, horizon=args.horizon, schedule=s.summary())
    results = {"rows": [dict(zip(header, r)) for r in rows], "rate_report": rate.to_dict()}
    checks = {"product_le_exponential": all(r[1] <= r[2] for r in rows)}
    _emit(args, (header, rows), cfg, results, checks)
    print(f"k vs picard_s: {rate.verdict}", file=sys.stderr)
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "compare": cmd_compare,
    "table1": cmd_table1,
    "stability": cmd_stability,
    "datadep": cmd_datadep,
    "check-map": cmd_check_map,
    "bounds": cmd_bounds,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"fixiter {args.command}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FixiterError as exc:
        print(f"fixiter {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
