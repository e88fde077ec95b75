"""Log-log slope of the failure rate as a function of the table slack eps.

At small n the failure rate of cuckoo hashing is not yet in its asymptotic
regime; the regime sets in later the smaller eps is. This script prints, for
each eps, the failure rates over a range of n and the fitted slope, which
makes the onset visible.

    python scripts/eps_sensitivity.py --stash 1 --eps 0.2 0.5 1.0 --trials 200000
"""

import argparse
import sys

from cuckoo_stash.experiments import ExperimentConfig, loglog_slope, run_failure_prob
from cuckoo_stash.cli import _int_list


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--stash", type=int, default=1)
    parser.add_argument("--eps", type=float, nargs="+", default=[0.2, 0.35, 0.5])
    parser.add_argument("--n-list", type=_int_list, default=[2**5, 2**6, 2**7, 2**8])
    parser.add_argument("--trials", type=int, default=100_000)
    parser.add_argument("--source", choices=("z", "random"), default="random")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1)
    args = parser.parse_args(argv)

    print("eps," + ",".join(f"rate_n{n}" for n in args.n_list) + ",slope")
    for eps in args.eps:
        cfg = ExperimentConfig("failure-prob", n_list=args.n_list, eps=eps, s=args.stash, trials=args.trials,
                               source=args.source, seed=args.seed, threads=args.threads)
        rows = run_failure_prob(cfg)
        rates = [r.rate for r in rows]
        slope = loglog_slope(args.n_list, rates) if all(rates) else float("nan")
        print(f"{eps}," + ",".join(f"{r:.4g}" for r in rates) + f",{slope:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
