"""Command line entry point: ``cuckoo-stash <experiment> [flags]``."""

from __future__ import annotations

import argparse
import sys
import time

from .experiments import (
    ExperimentConfig, loglog_slope, oracle_rows, run, run_oracle_suite, write_csv,
)

EXPERIMENTS = ("failure-prob", "insertion-cost", "stash-overflow", "uniformity", "oracle-suite")


def _int_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if part.startswith("2^"):
            out.append(1 << int(part[2:]))
        elif part:
            out.append(int(part))
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cuckoo-stash", description=__doc__)
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--n-list", type=_int_list, default=[256],
                       help="comma separated n values; '2^10' style accepted")
        p.add_argument("--eps", type=float, default=0.2)
        p.add_argument("--delta", type=float, default=0.5)
        p.add_argument("--stash", type=int, default=0, help="stash capacity s")
        p.add_argument("--k", type=int, default=1)
        p.add_argument("--c", type=int, default=None, help="lookup tables; default ceil((s+2)/(delta k))")
        p.add_argument("--w", type=int, default=16, help="output word width for uniformity")
        p.add_argument("--trials", type=int, default=1000)
        p.add_argument("--source", choices=("z", "random"), default="z")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--out", default=None, help="CSV path; stdout if omitted")
        p.add_argument("--maxloop", type=int, default=None)
        p.add_argument("--m", type=int, default=None, help="table size override; default ceil((1+eps) n)")
        p.add_argument("--set-size", type=int, default=4)
        p.add_argument("--engine", choices=("jit", "python"), default="jit")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    return ExperimentConfig(
        experiment=args.experiment, n_list=args.n_list, eps=args.eps, delta=args.delta, s=args.stash,
        k=args.k, c=args.c, w=args.w, trials=args.trials, source=args.source, seed=args.seed,
        out=args.out, threads=args.threads, maxloop=args.maxloop, set_size=args.set_size,
        engine=args.engine, m=args.m,
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = config_from_args(args)
    status = 0
    if cfg.experiment == "oracle-suite":
        started = time.perf_counter()
        report = run_oracle_suite(cfg)
        rows = oracle_rows(cfg, report, (time.perf_counter() - started) * 1e3)
        for mm in report.mismatches:
            print(f"MISMATCH {mm.check} seed={mm.seed}: {mm.detail}", file=sys.stderr)
        verdict = "PASS" if report.passed else "FAIL"
        print(f"oracle-suite {verdict}: {report.instances} instances, {len(report.mismatches)} mismatches",
              file=sys.stderr)
        status = 0 if report.passed else 1
    else:
        rows = run(cfg)
    text = write_csv(rows, cfg.out)
    if cfg.out is None:
        sys.stdout.write(text)
    if cfg.experiment == "failure-prob":
        pts = [(r.n, r.rate) for r in rows if r.failures > 0]
        if len(pts) >= 2:
            slope = loglog_slope(*zip(*pts))
            print(f"log2-log2 slope of failure rate vs n: {slope:.3f}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
