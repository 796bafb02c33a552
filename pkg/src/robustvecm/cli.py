"""Command line entry points: simulate, fit, bench, convergence."""

import argparse
import sys
from dataclasses import replace

from . import io
from .baselines import GdOptions, fit_gd
from .errors import RobustVecmError
from .experiments import (
    BenchSpec,
    DEFAULT_DF_GRID,
    DEFAULT_REPS,
    default_xi,
    iterations_to_level,
    run_convergence,
    run_nmse_sweep,
)
from .model import assemble_matrix_form
from .objective import ObjectiveConfig, RatParams, default_rat_params
from .simulate import DgpSpec, make_ground_truth, simulate_path
from .solver import SolverOptions, fit


def _parse_loss(text):
    """Parse 'cauchy', 'gaussian', or 'student:DF' into (loss, df)."""
    if text in ("cauchy", "gaussian"):
        return text, None
    if text.startswith("student:"):
        return "student", float(text.split(":", 1)[1])
    raise argparse.ArgumentTypeError(
        f"loss must be cauchy, gaussian, or student:DF, got {text!r}"
    )


def _add_dgp_flags(sub):
    sub.add_argument("--k", type=int, default=5, help="series dimension")
    sub.add_argument("--p", type=int, default=2, help="lag order")
    sub.add_argument("--r", type=int, default=3, help="cointegration rank")
    sub.add_argument("--n", type=int, default=1000, help="sample length")
    sub.add_argument("--active-columns", type=int, default=None,
                     help="nonzero columns of the long-run matrix (default k-1)")
    sub.add_argument("--burn-in", type=int, default=200)


def _dgp_from_args(args, innovation="student", df=3.0, seed=0):
    active = args.active_columns if args.active_columns is not None else max(args.r, args.k - 1)
    return DgpSpec(
        k=args.k, p=args.p, r=args.r, n=args.n, active_columns=active,
        innovation=innovation, df=df, seed=seed,
        noise_scale=getattr(args, "noise_scale", 1.0), burn_in=args.burn_in,
    )


def _cmd_simulate(args):
    df = args.df if args.innovation == "student" else None
    spec = _dgp_from_args(args, innovation=args.innovation, df=df, seed=args.seed)
    truth = make_ground_truth(spec)
    path = simulate_path(truth, spec)
    with open(args.out, "w") as fp:
        io.write_series_csv(fp, path)
    with open(args.truth_out, "w") as fp:
        io.write_ground_truth(fp, truth, spec)
    print(f"wrote {args.out} ({spec.k} series, N={spec.n}) and {args.truth_out}")
    return 0


def _cmd_fit(args):
    with open(args.input) as fp:
        path = io.read_series_csv(fp)
    mf = assemble_matrix_form(path, args.p)
    loss, df = args.loss
    xi = args.xi if args.xi is not None else default_xi(mf)
    rat = default_rat_params(mf.k)
    if args.rat_scale is not None or args.eps is not None:
        rat = RatParams(
            scale=args.rat_scale if args.rat_scale is not None else rat.scale,
            eps=args.eps if args.eps is not None else rat.eps,
        )
    cfg = ObjectiveConfig(rat=rat, xi=xi, loss=loss, df=df)
    meta = {
        "solver": args.solver, "loss": loss,
        "df": "none" if df is None else repr(float(df)),
        "xi": repr(float(xi)), "rat_scale": repr(float(rat.scale)),
        "eps": repr(float(rat.eps)), "rank": args.r, "seed": args.seed,
    }
    if args.solver == "gd":
        report = fit_gd(mf, GdOptions(rank=args.r, cfg=cfg, max_iter=args.max_iter,
                                      rel_tol=args.rel_tol))
    else:
        report = fit(mf, SolverOptions(rank=args.r, cfg=cfg, max_iter=args.max_iter,
                                       rel_tol=args.rel_tol))
    with open(args.report, "w") as fp:
        io.write_fit_report(fp, report, meta=meta)
    with open(args.trace_csv, "w") as fp:
        io.write_trace_csv(fp, report.obj_trace)
    print(
        f"{args.solver} fit: {report.terminated} after {report.iterations} iterations, "
        f"objective {report.obj_trace[0]:.6g} -> {report.obj_trace[-1]:.6g}"
    )
    return 0


def _cmd_bench(args):
    cfg = {}
    if args.config:
        with open(args.config) as fp:
            cfg = io.read_bench_config(fp)
    dims = argparse.Namespace(
        k=cfg.get("k", args.k), p=cfg.get("p", args.p), r=cfg.get("r", args.r),
        n=cfg.get("n", args.n), burn_in=cfg.get("burn_in", args.burn_in),
        active_columns=cfg.get("active_columns", args.active_columns),
    )
    dgp = _dgp_from_args(dims, innovation="student", df=3.0, seed=0)
    df_grid = cfg.get("df_grid")
    if args.df_grid is not None:
        df_grid = tuple(float(v) for v in args.df_grid.split(","))
    losses = cfg.get("losses")
    if args.losses is not None:
        losses = tuple(v.strip() for v in args.losses.split(","))
    spec = BenchSpec(
        dgp=dgp,
        df_grid=df_grid if df_grid is not None else DEFAULT_DF_GRID,
        reps=cfg.get("reps", args.reps),
        losses=losses if losses is not None else ("cauchy", "student", "gaussian"),
        seed_base=cfg.get("seed_base", args.seed_base),
    )
    table = run_nmse_sweep(spec, max_iter=args.max_iter, rel_tol=args.rel_tol)
    timing = args.timing == "wall"
    with open(args.rep_csv, "w") as fp:
        io.write_rep_csv(fp, table.per_rep, timing=timing)
    meta = {
        "k": spec.dgp.k, "p": spec.dgp.p, "r": spec.dgp.r, "n": spec.dgp.n,
        "active_columns": spec.dgp.active_columns, "reps": spec.reps,
        "seed_base": spec.seed_base,
    }
    with open(args.aggregate_csv, "w") as fp:
        io.write_aggregate_csv(fp, table, meta=meta)
    if args.plot_data:
        _write_bench_plot_data(args.plot_data, spec, table)
    for row in table.rows:
        print(
            f"df={row.df:g} loss={row.loss}: mean NMSE {row.mean_nmse:.4g} "
            f"(stderr {row.stderr_nmse:.2g}, reps {row.reps}, failures {row.failures})"
        )
    return 0


def _write_bench_plot_data(path, spec, table):
    header = ["df"]
    for loss in spec.losses:
        header += [f"mean_{loss}", f"stderr_{loss}"]
    rows = []
    for df in spec.df_grid:
        row = [float(df)]
        for loss in spec.losses:
            match = [r for r in table.rows if r.df == df and r.loss == loss]
            row += [match[0].mean_nmse, match[0].stderr_nmse]
        rows.append(row)
    with open(path, "w") as fp:
        io.write_plot_data(fp, header, rows)


def _cmd_convergence(args):
    spec = _dgp_from_args(args, innovation="student", df=args.df, seed=args.seed)
    reports, _ = run_convergence(
        spec, xi=args.xi, max_iter_mm=args.max_iter,
        max_iter_gd=args.max_iter_gd, rel_tol=args.rel_tol,
    )
    with open(args.mm_trace, "w") as fp:
        io.write_trace_csv(fp, reports["mm"].obj_trace)
    with open(args.gd_trace, "w") as fp:
        io.write_trace_csv(fp, reports["gd"].obj_trace)
    if args.plot_data:
        mm, gd = reports["mm"].obj_trace, reports["gd"].obj_trace
        rows = [
            [i, float(mm[min(i, len(mm) - 1)]), float(gd[min(i, len(gd) - 1)])]
            for i in range(max(len(mm), len(gd)))
        ]
        with open(args.plot_data, "w") as fp:
            io.write_plot_data(fp, ["iter", "mm", "gd"], rows)
    level = reports["mm"].obj_trace[-1] + 1e-3
    mm_iters = iterations_to_level(reports["mm"].obj_trace, level)
    gd_iters = iterations_to_level(reports["gd"].obj_trace, level)
    print(
        f"mm: {len(reports['mm'].obj_trace) - 1} iterations, final "
        f"{reports['mm'].obj_trace[-1]:.6g}; gd: {len(reports['gd'].obj_trace) - 1} "
        f"iterations, final {reports['gd'].obj_trace[-1]:.6g}"
    )
    print(
        f"iterations to reach mm final + 1e-3: mm={mm_iters}, "
        f"gd={'never' if gd_iters is None else gd_iters}"
    )
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="robustvecm",
        description="Robust sparse reduced-rank estimation of error correction models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a ground truth and sample path")
    _add_dgp_flags(sim)
    sim.add_argument("--innovation", choices=("gaussian", "student", "cauchy"),
                     default="student")
    sim.add_argument("--df", type=float, default=3.0, help="student degrees of freedom")
    sim.add_argument("--noise-scale", type=float, default=1.0)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", required=True, help="series CSV path")
    sim.add_argument("--truth-out", required=True, help="ground-truth sidecar path")
    sim.set_defaults(func=_cmd_simulate)

    fit_p = sub.add_parser("fit", help="fit a model to a series CSV")
    fit_p.add_argument("--input", required=True)
    fit_p.add_argument("--p", type=int, required=True, help="lag order")
    fit_p.add_argument("--r", type=int, required=True, help="rank budget")
    fit_p.add_argument("--xi", type=float, default=None,
                       help="penalty weight (default: scale-aware rule from the data)")
    fit_p.add_argument("--rat-scale", type=float, default=None)
    fit_p.add_argument("--eps", type=float, default=None)
    fit_p.add_argument("--loss", type=_parse_loss, default=("cauchy", None),
                       metavar="{cauchy,student:DF,gaussian}")
    fit_p.add_argument("--solver", choices=("mm", "gd"), default="mm")
    fit_p.add_argument("--rel-tol", type=float, default=1e-8)
    fit_p.add_argument("--max-iter", type=int, default=2000)
    fit_p.add_argument("--seed", type=int, default=0,
                       help="reserved for randomized initialization; current "
                            "initializers are deterministic")
    fit_p.add_argument("--report", required=True)
    fit_p.add_argument("--trace-csv", required=True)
    fit_p.set_defaults(func=_cmd_fit)

    bench = sub.add_parser("bench", help="NMSE sweep over tail weights")
    _add_dgp_flags(bench)
    bench.add_argument("--config", default=None, help="flat key-value config file")
    bench.add_argument("--df-grid", default=None, help="comma-separated df values")
    bench.add_argument("--reps", type=int, default=DEFAULT_REPS)
    bench.add_argument("--losses", default=None, help="comma-separated loss kinds")
    bench.add_argument("--seed-base", type=int, default=0)
    bench.add_argument("--rel-tol", type=float, default=1e-8)
    bench.add_argument("--max-iter", type=int, default=2000)
    bench.add_argument("--timing", choices=("wall", "off"), default="wall",
                       help="'off' writes seconds as 0.0 for reproducible files")
    bench.add_argument("--rep-csv", required=True)
    bench.add_argument("--aggregate-csv", required=True)
    bench.add_argument("--plot-data", default=None)
    bench.set_defaults(func=_cmd_bench)

    conv = sub.add_parser("convergence", help="solver convergence comparison")
    _add_dgp_flags(conv)
    conv.add_argument("--df", type=float, default=3.0)
    conv.add_argument("--seed", type=int, default=0)
    conv.add_argument("--xi", type=float, default=None)
    conv.add_argument("--rel-tol", type=float, default=1e-8)
    conv.add_argument("--max-iter", type=int, default=2000)
    conv.add_argument("--max-iter-gd", type=int, default=5000)
    conv.add_argument("--mm-trace", required=True)
    conv.add_argument("--gd-trace", required=True)
    conv.add_argument("--plot-data", default=None)
    conv.set_defaults(func=_cmd_convergence)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RobustVecmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
