"""Relative output error versus reduced order on the heat benchmark.

    python scripts/heat_error_sweep.py --k 10 --gamma 0.1 --out results/heat

Writes ``errors.csv`` (variant, r, frobenius_rel) and one HSV column per
variant, and prints the error table.
"""
import argparse
import warnings
from pathlib import Path

import numpy as np

from bqobt.benchmarks import HeatBenchmarkSpec, heat_system
from bqobt.errors import RankDeficient
from bqobt.gramians import compute_gramians
from bqobt.io import save_column
from bqobt.reduction import reduce_with
from bqobt.simulation import cos_input, error_metrics, shared_substeps, simulate


def sweep(sys, variants, orders, u, t_end, steps, drive, phi):
    full = sys.unscaled() if drive == "original" else sys
    table, hsvs = {}, {}
    for v in variants:
        g = compute_gramians(sys, v, phi=phi if v == "M" else None)
        for r in orders:
            try:
                res = reduce_with(sys, g, r)
            except RankDeficient:
                table[v, r] = np.nan
                continue
            hsvs[v] = res.hsv
            red = res.reduced.unscaled() if drive == "original" else res.reduced
            sub = shared_substeps([full, red], u, t_end, steps)
            ref = simulate(full, u, t_end, steps, substeps=sub)
            table[v, r] = error_metrics(ref, simulate(red, u, t_end, steps, substeps=sub)).frobenius_rel
    return table, hsvs


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--k", type=int, default=10)
    ap.add_argument("--gamma", type=float, default=0.1)
    ap.add_argument("--output-variant", default="ones_quadratic")
    ap.add_argument("--variants", default="S,A,M,TS,TP,TA")
    ap.add_argument("--phi", type=float, default=0.5)
    ap.add_argument("--r-max", type=int, default=20)
    ap.add_argument("--t-end", type=float, default=5.0)
    ap.add_argument("--steps", type=int, default=1000)
    ap.add_argument("--drive", choices=("scaled", "original"), default="scaled")
    ap.add_argument("--out", default="results/heat_sweep")
    args = ap.parse_args()

    spec = HeatBenchmarkSpec(k=args.k, output_variant=args.output_variant, gamma=args.gamma)
    sys = heat_system(spec)
    variants = args.variants.split(",")
    orders = list(range(2, args.r_max + 1, 2))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        table, hsvs = sweep(sys, variants, orders, cos_input(sys.m), args.t_end, args.steps,
                            args.drive, [args.phi] * sys.m)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "errors.csv", "w") as fh:
        fh.write("variant,r,frobenius_rel\n")
        for (v, r), e in table.items():
            fh.write(f"{v},{r},{e:.16e}\n")
    for v, h in hsvs.items():
        save_column(out / f"hsv_{v}.csv", h, "hsv")

    print("r    " + "".join(f"{v:>11}" for v in variants))
    for r in orders:
        print(f"{r:<5}" + "".join(f"{table[v, r]:11.3e}" for v in variants))


if __name__ == "__main__":
    main()
