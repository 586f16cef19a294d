"""Gramian orderings, HSV dominance and series convergence on random systems.

    python scripts/gramian_comparison.py --count 20 --margins 0.1,0.2,0.3,0.5

For each margin, prints the worst psd-ordering eigenvalue, whether the HSVs
of ``(P, Q^A)`` stay below those of ``(P, Q^S)``, and how far the depth-``d``
``Q^P`` series partial sum is from ``Q^S``.
"""
import argparse

import numpy as np

from bqobt.benchmarks import random_admissible
from bqobt.gramians import (
    obs_gramian_alternative,
    obs_gramian_standard,
    reach_gramian,
    series_terms,
    truncated_obs_alternative,
    truncated_obs_padhi,
    truncated_obs_standard,
    truncated_reach,
)
from bqobt.lyapunov import SolverOptions, psd_factor
from bqobt.reduction import hsv_compare

TIGHT = SolverOptions(residual_tol=1e-14, rel_diff_tol=0.0)


def lam_min(X):
    w = np.linalg.eigvalsh(0.5 * (X + X.T))
    return w[0] / max(abs(w[0]), abs(w[-1]))


def study(margin, count, depth, nmax):
    order_worst, dominated, series = np.inf, 0, []
    for s in range(count):
        rng = np.random.default_rng(1000 + s)
        n = int(rng.integers(2, nmax + 1))
        sys = random_admissible(n, int(rng.integers(1, 3)), int(rng.integers(1, 3)),
                                seed=s, margin=margin)
        P = reach_gramian(sys, TIGHT)
        QS = obs_gramian_standard(sys, P, TIGHT)
        QA = obs_gramian_alternative(sys, P)
        P1, PT = truncated_reach(sys)
        QST = truncated_obs_standard(sys, P1, PT)
        QPT = truncated_obs_padhi(sys, PT)
        QAT = truncated_obs_alternative(sys, PT)
        for X in (QS - QA, QS - QST, P - PT, QST - QAT, QPT - QAT):
            order_worst = min(order_worst, lam_min(X))
        dominated += hsv_compare(psd_factor(P), psd_factor(QA), psd_factor(QS))[2]
        t = series_terms(sys, depth, stop_rtol=0.0)
        series.append([np.linalg.norm(t.qp_partial(d) - QS) / np.linalg.norm(QS)
                       for d in range(1, depth + 1)])
    return order_worst, dominated, np.max(series, axis=0)


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--margins", default="0.1,0.2,0.3,0.5")
    ap.add_argument("--depth", type=int, default=8)
    ap.add_argument("--nmax", type=int, default=10)
    args = ap.parse_args()
    print(f"{'margin':>7} {'min lam':>10} {'HSV dom':>8}  worst rel diff of Q^P(d) vs Q^S, d=1..{args.depth}")
    for margin in (float(m) for m in args.margins.split(",")):
        worst, dom, series = study(margin, args.count, args.depth, args.nmax)
        print(f"{margin:7.2f} {worst:10.1e} {dom:>5}/{args.count}  "
              + " ".join(f"{x:.1e}" for x in series))


if __name__ == "__main__":
    main()
