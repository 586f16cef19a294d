"""Effect of the input scaling gamma on existence margins and solver effort.

    python scripts/scaling_study.py --k 10 --gammas 0.1,0.3,0.5,0.7,0.9
"""
import argparse
import time
import warnings

from bqobt.benchmarks import heat_system
from bqobt.errors import NoConvergence
from bqobt.gramians import obs_gramian_standard, reach_gramian
from bqobt.model import existence_margins


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--k", type=int, default=10)
    ap.add_argument("--gammas", default="0.1,0.3,0.5,0.7,0.9")
    args = ap.parse_args()
    print(f"{'gamma':>6} {'Gamma_P':>10} {'Gamma_QS':>10} {'2a/b^2':>10} "
          f"{'it P':>5} {'it Q^S':>6} {'stop':>9} {'sec':>6}")
    for g in (float(x) for x in args.gammas.split(",")):
        sys = heat_system(k=args.k, gamma=g)
        cert = existence_margins(sys)
        t0 = time.perf_counter()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            try:
                p = reach_gramian(sys, check_margin=False, full_output=True)
                q = obs_gramian_standard(sys, p.X, check_margin=False, full_output=True)
                it_p, it_q, stop = p.iterations, q.iterations, q.stopped_by
            except NoConvergence as exc:
                it_p, it_q, stop = exc.solution.iterations, "-", "max_iter"
        dt = time.perf_counter() - t0
        print(f"{g:6.2f} {cert.gamma_P:10.3e} {cert.gamma_QS:10.3e} {cert.threshold:10.3e} "
              f"{it_p:>5} {it_q:>6} {stop:>9} {dt:6.2f}")


if __name__ == "__main__":
    main()
