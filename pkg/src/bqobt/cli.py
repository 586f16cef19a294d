"""Command-line driver.

    bqobt build heat --k 10 --output-variant identity -o sys/
    bqobt gramians sys/ --variant S --gamma 0.1 -o gram/
    bqobt reduce sys/ gram/ --r 10 -o red/
    bqobt simulate sys/ red/ --input cos --t-end 5 -o sim/
    bqobt errsweep sys/ --gamma 0.1 --variants S,TS,A --r-list 2,4,10 -o sweep/

Exit codes: 0 success, 1 numerical failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys as _sys
from pathlib import Path

import numpy as np

from . import __version__
from .benchmarks import HeatBenchmarkSpec, heat_system, random_admissible
from .errors import BqoError, RankDeficient
from .gramians import VARIANTS, compute_gramians, normalize_variant
from .io import (
    RunManifest,
    load_gramians,
    load_matrix,
    load_system,
    save_column,
    save_gramians,
    save_matrix,
    save_system,
    save_trajectory,
    write_json,
)
from .lyapunov import SolverOptions
from .model import existence_margins, scale_input
from .reduction import reduce_with
from .simulation import (
    cos_input,
    error_metrics,
    exp_input,
    shared_substeps,
    simulate,
    table_input,
)

OUTPUT_ENV = "BQOBT_OUTPUT_DIR"


class UsageError(Exception):
    pass


def _csv_list(cast):
    def parse(text):
        try:
            return [cast(v) for v in text.split(",") if v.strip()]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc
    return parse


def _output_dir(args):
    if args.output:
        return Path(args.output)
    base = os.environ.get(OUTPUT_ENV)
    if base:
        return Path(base) / args.command
    raise UsageError(f"no output directory: pass -o/--output or set {OUTPUT_ENV}")


def _opts(args):
    return SolverOptions(residual_tol=args.res_tol, rel_diff_tol=args.rel_diff_tol,
                         max_iter=args.max_iter)


def _input_signal(args, m):
    if args.input == "exp":
        return exp_input(m)
    if args.input == "cos":
        return cos_input(m)
    if not args.input_table:
        raise UsageError("--input table needs --input-table FILE")
    tab = np.loadtxt(args.input_table, delimiter=",", ndmin=2, comments="#")
    if tab.shape[1] != m + 1:
        raise UsageError(f"input table needs {m + 1} columns (t, u_1..u_{m}), got {tab.shape[1]}")
    return table_input(tab[:, 0], tab[:, 1:])


def _with_gamma(system, gamma):
    return scale_input(system, gamma) if gamma is not None and gamma != 1.0 else system


def cmd_build(args, out):
    if args.example == "heat":
        if args.k is None:
            raise UsageError("build heat requires --k")
        variant = {"ones": "ones_quadratic", "identity": "identity_quadratic"}.get(
            args.output_variant, args.output_variant)
        spec = HeatBenchmarkSpec(k=args.k, output_variant=variant, gamma=args.gamma or 1.0)
        system = heat_system(spec)
        extra = {"example": "heat", "k": args.k, "output_variant": variant}
    else:
        missing = [f for f in ("n", "m", "p") if getattr(args, f) is None]
        if missing:
            raise UsageError(f"build random requires --{', --'.join(missing)}")
        system = random_admissible(args.n, args.m, args.p, seed=args.seed, margin=args.margin)
        system = _with_gamma(system, args.gamma)
        extra = {"example": "random", "seed": args.seed, "margin": args.margin}
    save_system(system, out, extra)
    return {"n": system.n, "m": system.m, "p": system.p}


def cmd_certificate(args, out):
    system = _with_gamma(load_system(args.system), args.gamma)
    cert = existence_margins(system)
    data = {k: (bool(v) if isinstance(v, (bool, np.bool_)) else float(v))
            for k, v in cert.__dict__.items()}
    write_json(out / "certificate.json", data)
    return data


def cmd_gramians(args, out):
    system = _with_gamma(load_system(args.system), args.gamma)
    variant = normalize_variant(args.variant)
    phi = args.phi
    if variant == "M":
        if phi is None:
            raise UsageError("variant M requires --phi")
        if len(phi) == 1 and system.m > 1:
            phi = phi * system.m
    gset = compute_gramians(system, variant, phi=phi, opts=_opts(args))
    save_gramians(gset, out, system.gamma_applied)
    return {"variant": variant, "residuals": gset.residuals, "iterations": gset.iterations}


def cmd_reduce(args, out):
    base = load_system(args.system)
    gset, man = load_gramians(args.gramians)
    system = scale_input(base.unscaled(), man["gamma_total"])
    res = reduce_with(system, gset, args.r)
    save_system(res.reduced, out, {"variant": gset.variant, "r": args.r})
    save_column(out / "hsv.csv", res.hsv, "hsv")
    save_matrix(out / "W.csv", res.W)
    save_matrix(out / "V.csv", res.V)
    return {"r": args.r, "numerical_rank": res.numerical_rank, "hsv_head": res.hsv[:5].tolist()}


def _driven(system, drive):
    return system.unscaled() if drive == "original" else system


def cmd_simulate(args, out):
    full = _driven(load_system(args.system), args.drive)
    u = _input_signal(args, full.m)
    reduced = [_driven(load_system(path), args.drive) for path in args.reduced]
    sub = shared_substeps([full] + reduced, u, args.t_end, args.steps)
    ref = simulate(full, u, args.t_end, args.steps, substeps=sub)
    save_trajectory(ref, out / "full.csv")
    report = {}
    for i, (path, red) in enumerate(zip(args.reduced, reduced), 1):
        traj = simulate(red, u, args.t_end, args.steps, substeps=sub)
        save_trajectory(traj, out / f"reduced_{i}.csv")
        err = error_metrics(ref, traj)
        save_column(out / f"pointwise_{i}.csv", err.pointwise_rel, "pointwise_rel")
        report[str(path)] = {"frobenius_rel": err.frobenius_rel,
                             "max_pointwise_rel": float(err.pointwise_rel.max())}
    write_json(out / "errors.json", report)
    return report


def cmd_errsweep(args, out):
    system = _with_gamma(load_system(args.system), args.gamma)
    u = _input_signal(args, system.m)
    full = _driven(system, args.drive)
    sub = shared_substeps([full], u, args.t_end, args.steps)
    ref = simulate(full, u, args.t_end, args.steps, substeps=sub)
    rows = []
    for variant in args.variants:
        gset = compute_gramians(system, variant, phi=args.phi, opts=_opts(args))
        hsv = None
        for r in args.r_list:
            try:
                res = reduce_with(system, gset, r)
            except RankDeficient as exc:
                rows.append((gset.variant, r, float("nan"), exc.achievable_r))
                continue
            hsv = res.hsv
            red = _driven(res.reduced, args.drive)
            sub_r = shared_substeps([full, red], u, args.t_end, args.steps)
            ref_r = ref if sub_r == sub else simulate(full, u, args.t_end, args.steps, substeps=sub_r)
            traj = simulate(red, u, args.t_end, args.steps, substeps=sub_r)
            rows.append((gset.variant, r, error_metrics(ref_r, traj).frobenius_rel,
                         res.numerical_rank))
        if hsv is not None:
            save_column(out / f"hsv_{gset.variant}.csv", hsv, "hsv")
    with open(out / "errors.csv", "w") as fh:
        fh.write("variant,r,frobenius_rel,numerical_rank\n")
        for v, r, e, k in rows:
            fh.write(f"{v},{r},{e:.16e},{k}\n")
    return {"rows": len(rows)}


COMMANDS = {
    "build": cmd_build,
    "certificate": cmd_certificate,
    "gramians": cmd_gramians,
    "reduce": cmd_reduce,
    "simulate": cmd_simulate,
    "errsweep": cmd_errsweep,
}


def _add_solver_flags(p):
    p.add_argument("--res-tol", type=float, default=1e-8)
    p.add_argument("--rel-diff-tol", type=float, default=1e-7)
    p.add_argument("--max-iter", type=int, default=50)


def _add_signal_flags(p):
    p.add_argument("--drive", choices=("scaled", "original"), default="scaled",
                   help="feed u to the balanced (gamma-scaled) realizations, or to the "
                        "unscaled ones, i.e. the original input")
    p.add_argument("--input", choices=("exp", "cos", "table"), default="cos")
    p.add_argument("--input-table", help="CSV with columns t,u_1..u_m (linear interpolation)")
    p.add_argument("--t-end", type=float, default=5.0)
    p.add_argument("--steps", type=int, default=1000)


def make_parser():
    parser = argparse.ArgumentParser(prog="bqobt", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--threads", type=int, default=None, help="cap BLAS/LAPACK threads")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        p = sub.add_parser(name, **kw)
        p.add_argument("-o", "--output", help=f"output directory (default ${OUTPUT_ENV}/{name})")
        return p

    p = add("build", help="write a benchmark system bundle")
    p.add_argument("example", choices=("heat", "random"))
    p.add_argument("--k", type=int)
    p.add_argument("--output-variant", default="ones",
                   choices=("ones", "identity", "ones_quadratic", "identity_quadratic"))
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--margin", type=float, default=0.5)
    p.add_argument("--gamma", type=float)

    p = add("certificate", help="existence margins of the Gramians")
    p.add_argument("system")
    p.add_argument("--gamma", type=float)

    p = add("gramians", help="compute a Gramian pair")
    p.add_argument("system")
    p.add_argument("--variant", required=True,
                   choices=VARIANTS + ("T-S", "T-P", "T-A", "T-reach"))
    p.add_argument("--gamma", type=float)
    p.add_argument("--phi", type=_csv_list(float))
    _add_solver_flags(p)

    p = add("reduce", help="balanced truncation from a Gramian bundle")
    p.add_argument("system")
    p.add_argument("gramians")
    p.add_argument("--r", type=int, required=True)

    p = add("simulate", help="simulate full and reduced systems, report output errors")
    p.add_argument("system")
    p.add_argument("reduced", nargs="*")
    _add_signal_flags(p)

    p = add("errsweep", help="output error versus reduced order for several variants")
    p.add_argument("system")
    p.add_argument("--variants", type=_csv_list(str), default=["S"])
    p.add_argument("--r-list", type=_csv_list(int), default=list(range(2, 21, 2)))
    p.add_argument("--gamma", type=float)
    p.add_argument("--phi", type=_csv_list(float))
    _add_signal_flags(p)
    _add_solver_flags(p)

    p = sub.add_parser("replay", help="re-run the command recorded in a run.json")
    p.add_argument("manifest")
    return parser


def _run(args, argv):
    if args.command == "replay":
        rec = RunManifest.read(args.manifest)
        return main(rec.argv)
    out = _output_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    summary = COMMANDS[args.command](args, out)
    opts = {k: v for k, v in vars(args).items() if k not in ("command", "output")}
    inputs = [v for k, v in opts.items() if k in ("system", "gramians", "reduced")]
    RunManifest(command=args.command, argv=list(argv), inputs=inputs, options=opts,
                output_dir=str(out), tool_version=__version__).write(out)
    print(json.dumps({"status": "ok", "command": args.command, "output": str(out),
                      "summary": summary}, default=str))
    return 0


def main(argv=None):
    argv = list(_sys.argv[1:] if argv is None else argv)
    parser = make_parser()
    args = parser.parse_args(argv)
    if args.threads:
        from threadpoolctl import threadpool_limits
        limiter = threadpool_limits(limits=args.threads)
    else:
        limiter = None
    try:
        return _run(args, argv)
    except UsageError as exc:
        parser.print_usage(_sys.stderr)
        print(json.dumps({"status": "usage_error", "error": str(exc)}), file=_sys.stderr)
        return 2
    except (BqoError, np.linalg.LinAlgError, ValueError) as exc:
        diag = {"status": "error", "type": type(exc).__name__, "error": str(exc)}
        if isinstance(exc, RankDeficient):
            diag["achievable_r"] = exc.achievable_r
        print(json.dumps(diag), file=_sys.stderr)
        return 1
    finally:
        if limiter is not None:
            limiter.unregister()


if __name__ == "__main__":
    _sys.exit(main())
