"""Command line front end.

Subcommands: ``analyze`` (admissibility and utilization trade-offs),
``simulate`` (run one schedule and optionally verify it), ``gen`` (random
task sets), ``prob`` (degradation-avoidance probabilities) and
``experiment`` (the canned reproducible studies).  Exit status is 0 on
success, 1 when a check fails or a system is found unschedulable, 2 on
usage errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    default_x,
    optimal_beta_for_su,
    static_model_su,
    theorem1_test,
    threshold_m,
    total_system_utilization,
)
from .errors import Infeasible, McSchedError
from .experiments import EXPERIMENTS, ExperimentSpec, run_experiment, write_rows
from .generator import (
    BANDS,
    GenParams,
    band_label,
    gen_job_sequence,
    gen_taskset,
    parse_demand_model,
)
from .probability import (
    BUILTIN_DISTRIBUTIONS,
    load_distribution,
    p_noswitch_dynamic,
    p_noswitch_static,
)
from .simulator import (
    EdfUvdMeba,
    EdfVdStatic,
    FixedBudget,
    SimConfig,
    edf_dispatch_violations,
    load_jobs_csv,
    mode_switch_instant,
    pool_utilization_violations,
    save_trace_csv,
    simulate,
    validate_jobs,
    verify_mc_schedulable,
)
from .taskmodel import (
    Criticality,
    McTask,
    TaskSet,
    load_taskset,
    save_taskset,
    utilizations,
)


def _frac(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _out_dir(args) -> Path:
    out = args.out or os.environ.get("MCSCHED_OUT") or "results"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_or_synthesize(args) -> TaskSet:
    if args.taskset:
        return load_taskset(args.taskset)
    if args.u_l is None or args.u_h is None:
        raise SystemExit("analyze: need --taskset or both --u-l and --u-h")
    tasks = []
    if args.u_l > 0:
        tasks.append(McTask(1, Fraction(1), args.u_l, Criticality.LC))
    if args.u_h > 0:
        tasks.append(McTask(2, Fraction(1), args.u_h, Criticality.HC))
    return TaskSet(tuple(tasks))


def _cmd_analyze(args) -> int:
    ts = _load_or_synthesize(args)
    u_l, u_h = utilizations(ts)
    m = threshold_m(ts)
    print(f"U_L={u_l} U_H={u_h} M={'none' if m is None else m}")
    status = 0
    if args.alpha_star is not None and args.beta_star is not None:
        verdict = theorem1_test(ts, args.alpha_star, args.beta_star)
        print(f"schedulable={'yes' if verdict.schedulable else 'no'}"
              f" x_lo={verdict.x_lo} x_hi={verdict.x_hi}")
        if verdict.schedulable:
            print(f"x={default_x(verdict)}")
        else:
            status = 1
    if args.w is not None:
        try:
            beta_opt = optimal_beta_for_su(ts, args.w)
            su_dyn = total_system_utilization(ts, args.w, Fraction(beta_opt))
            su_stat = static_model_su(ts, args.w)
            print(f"w={args.w} beta_opt={beta_opt:.6f} su_dynamic={su_dyn:.6f}"
                  f" su_static={su_stat:.6f} ratio={su_dyn / su_stat:.6f}")
        except McSchedError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    if args.sweep:
        rows = []
        for k in range(1, 51):
            w = k / 50
            beta_opt = optimal_beta_for_su(ts, w)
            su_dyn = total_system_utilization(ts, w, Fraction(beta_opt))
            su_stat = static_model_su(ts, w)
            rows.append((w, beta_opt, su_dyn, su_stat, su_dyn / su_stat))
        path = _out_dir(args) / "analyze_sweep.csv"
        write_rows(path, ["w", "beta_opt", "su_dynamic", "su_static", "ratio"],
                   rows, f"mcsched {__version__} name=analyze_sweep")
        print(f"wrote {path}")
    return status


def _parse_budgets(text: str) -> dict[int, Fraction]:
    budgets = {}
    for item in text.split(","):
        tid, _, val = item.partition(":")
        budgets[int(tid)] = Fraction(val)
    return budgets


def _cmd_simulate(args) -> int:
    ts = load_taskset(args.taskset)
    if args.policy == "uvd":
        if args.beta_star is None:
            raise SystemExit("simulate: --policy uvd needs --beta-star")
        policy = EdfUvdMeba(args.beta_star)
    elif args.policy == "vd":
        policy = EdfVdStatic()
    else:
        if not args.budgets:
            raise SystemExit("simulate: --policy fixed needs --budgets")
        policy = FixedBudget(_parse_budgets(args.budgets))

    x = args.x
    if x is None:
        if args.alpha_star is None or args.beta_star is None:
            raise SystemExit("simulate: need --x, or --alpha-star with --beta-star")
        verdict = theorem1_test(ts, args.alpha_star, args.beta_star)
        try:
            x = default_x(verdict)
        except Infeasible:
            print("unschedulable: no admissible deadline factor", file=sys.stderr)
            return 1
    cfg = SimConfig(policy, x, horizon=args.horizon)

    if args.jobs_csv:
        jobs = load_jobs_csv(args.jobs_csv)
        validate_jobs(ts, jobs)
    else:
        if args.horizon is None:
            raise SystemExit("simulate: generating jobs needs --horizon")
        model = parse_demand_model(args.demand_model)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(args.seed)))
        jobs = gen_job_sequence(ts, args.horizon, model, rng)

    trace = simulate(ts, cfg, jobs)
    t_star = mode_switch_instant(trace)
    print(f"jobs={len(jobs)} events={len(trace.events)}"
          f" t_star={'none' if t_star is None else t_star}")
    if args.trace:
        save_trace_csv(trace, args.trace)
        print(f"wrote {args.trace}")
    if not args.verify:
        return 0

    ok, violations = verify_mc_schedulable(ts, cfg, trace)
    for v in violations:
        print(f"violation: task {v.task} job {v.seq} deadline {v.deadline}"
              f" required {v.required} received {v.received} ({v.reason})")
    problems = list(edf_dispatch_violations(ts, cfg, trace))
    if args.policy == "uvd":
        problems += pool_utilization_violations(ts, args.beta_star, trace)
    for p in problems:
        print(f"violation: {p}")
    if ok and not problems:
        print("verify: ok")
        return 0
    return 1


def _parse_band(text: str):
    for band in BANDS:
        if band_label(band) == text:
            return band
    lo, sep, hi = text.partition(":")
    if not sep:
        raise SystemExit(f"gen: unknown band {text!r}; use lo:hi or one of "
                         + ",".join(band_label(b) for b in BANDS))
    return (Fraction(lo), Fraction(hi))


def _cmd_gen(args) -> int:
    band = _parse_band(args.band)
    params = GenParams(band=band, rc=args.rc, seed=args.seed,
                       inflate_lc=args.inflate_lc)
    out = _out_dir(args)
    for i in range(args.count):
        ts = gen_taskset(params, np.random.SeedSequence((args.seed, i)))
        path = out / f"taskset_{band_label(band)}_rc{args.rc}_{i:03d}.txt"
        save_taskset(ts, path)
        u_l, u_h = utilizations(ts)
        print(f"wrote {path} tasks={len(ts.tasks)} U_L={u_l} U_H={u_h}")
    return 0


def _cmd_prob(args) -> int:
    if args.dist in BUILTIN_DISTRIBUTIONS:
        dist = BUILTIN_DISTRIBUTIONS[args.dist]
    else:
        dist = load_distribution(args.dist)
    betas = [Fraction(b) for b in args.beta_star.split(",")]
    ns = range(1, 9) if args.n is None else [args.n]
    rows = []
    for n in ns:
        us = ([Fraction(u) for u in args.u.split(",")] if args.u
              else [Fraction(1, 10)] * n)
        if len(us) != n:
            raise SystemExit(f"prob: got {len(us)} utilizations for n={n}")
        for beta in betas:
            if args.model in ("s", "both"):
                rows.append((n, float(beta), "s", p_noswitch_static(dist, n, beta)))
            if args.model in ("d", "both"):
                rows.append((n, float(beta), "d", p_noswitch_dynamic(dist, us, beta)))
    for row in rows:
        print(f"n={row[0]} beta={row[1]} model={row[2]} p={row[3]:.6f}")
    path = _out_dir(args) / "prob.csv"
    write_rows(path, ["n", "beta", "model", "p"], rows,
               f"mcsched {__version__} name=prob seed={args.seed}")
    print(f"wrote {path}")
    return 0


def _cmd_experiment(args) -> int:
    spec = ExperimentSpec(name=args.name, out_dir=str(_out_dir(args)),
                          seed=args.seed, trials=args.trials, jobs=args.jobs)
    violations = run_experiment(spec)
    print(f"experiment {args.name}: violations={violations}")
    return 1 if violations else 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=1)
    common.add_argument("--out", default=None,
                        help="output directory (default $MCSCHED_OUT or ./results)")
    common.add_argument("--trials", type=int, default=None)
    common.add_argument("--jobs", type=int, default=1,
                        help="worker processes for experiments")

    parser = argparse.ArgumentParser(
        prog="mcsched",
        description="Mixed-criticality scheduling: analysis, simulation, studies.")
    parser.add_argument("--version", action="version",
                        version=f"mcsched {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common],
                       help="admissibility and utilization trade-offs")
    p.add_argument("--taskset")
    p.add_argument("--u-l", type=_frac)
    p.add_argument("--u-h", type=_frac)
    p.add_argument("--alpha-star", type=_frac)
    p.add_argument("--beta-star", type=_frac)
    p.add_argument("--w", type=float)
    p.add_argument("--sweep", action="store_true",
                   help="write a weighted-utilization sweep over w")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("simulate", parents=[common], help="run one schedule")
    p.add_argument("--taskset", required=True)
    p.add_argument("--policy", choices=("uvd", "vd", "fixed"), default="uvd")
    p.add_argument("--x", type=_frac)
    p.add_argument("--alpha-star", type=_frac)
    p.add_argument("--beta-star", type=_frac)
    p.add_argument("--budgets", help="fixed budgets as id:value,id:value")
    p.add_argument("--horizon", type=_frac)
    p.add_argument("--demand-model", default="constant:1")
    p.add_argument("--jobs-csv")
    p.add_argument("--trace", help="write the event trace to this CSV")
    p.add_argument("--verify", action="store_true",
                   help="check service guarantees and dispatch order")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("gen", parents=[common], help="generate random task sets")
    p.add_argument("--band", required=True,
                   help="per-class utilization band: lo:hi or a label like 0.55")
    p.add_argument("--rc", type=int, default=3)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--inflate-lc", action="store_true")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("prob", parents=[common],
                       help="degradation-avoidance probabilities")
    p.add_argument("--dist", default="table4")
    p.add_argument("--n", type=int)
    p.add_argument("--beta-star", default="0.45,0.55,0.65,0.75")
    p.add_argument("--u", help="comma-separated per-task utilizations")
    p.add_argument("--model", choices=("s", "d", "both"), default="both")
    p.set_defaults(func=_cmd_prob)

    p = sub.add_parser("experiment", parents=[common],
                       help="run a canned reproducible study")
    p.add_argument("name", choices=EXPERIMENTS)
    p.set_defaults(func=_cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except McSchedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
