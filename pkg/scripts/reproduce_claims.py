"""Run every measurable claim through the experiment harness and write one CSV per claim.

    python scripts/reproduce_claims.py --out results/          # acceptance-scale trial counts
    python scripts/reproduce_claims.py --out results/ --quick  # 100x fewer trials, for a smoke run
"""

import argparse
import pathlib
import sys

from cuckoo_stash.experiments import ExperimentConfig, loglog_slope, run, write_csv

CLAIMS = {
    "failure_s0_random": dict(experiment="failure-prob", n_list=[2**8, 2**9, 2**10, 2**11], s=0,
                              source="random", trials=1_000_000),
    "failure_s1_z": dict(experiment="failure-prob", n_list=[2**5, 2**6, 2**7, 2**8], s=1, source="z",
                         trials=1_000_000),
    "parity_z": dict(experiment="failure-prob", n_list=[2**10], s=0, c=2, source="z", trials=100_000),
    "parity_random": dict(experiment="failure-prob", n_list=[2**10], s=0, c=2, source="random",
                          trials=100_000),
    "insertion_cost": dict(experiment="insertion-cost", n_list=[2**10, 2**12, 2**14], trials=1000),
    "stash_overflow": dict(experiment="stash-overflow", n_list=[2**10], s=1, trials=100_000),
    "uniformity": dict(experiment="uniformity", n_list=[16], eps=0.25, w=2, set_size=4, trials=100_000),
    "oracle_suite": dict(experiment="oracle-suite", trials=5000),
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--out", default="results", help="output directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--quick", action="store_true", help="divide trial counts by 100")
    parser.add_argument("--only", nargs="*", choices=sorted(CLAIMS), help="subset of claims to run")
    args = parser.parse_args(argv)

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in args.only or CLAIMS:
        params = dict(CLAIMS[name])
        if args.quick:
            params["trials"] = max(1, params["trials"] // 100)
        cfg = ExperimentConfig(seed=args.seed, threads=args.threads, **params)
        rows = run(cfg)
        write_csv(rows, str(out / f"{name}.csv"))
        summary = f"{name}: {len(rows)} rows"
        if cfg.experiment == "failure-prob" and len(rows) > 1 and all(r.failures for r in rows):
            summary += f", slope {loglog_slope([r.n for r in rows], [r.rate for r in rows]):.3f}"
        print(summary, file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
