"""Monte Carlo experiments over cuckoo graphs, tables and the uniform-hashing structure.

Every experiment is a function ``run_*(cfg) -> list[ResultRow]``. Trial ``t``
of configuration ``(experiment, n, s)`` uses the seed
``derive_seed(derive_seed(master, experiment, n, s), t)``, so results do not
depend on how trials are split across worker threads.
"""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import stats

from . import kernels
from .cuckoo_graph import CuckooGraph, build_graph, excess
from .cuckoo_table import (
    CuckooTable, default_maxloop, lookup_size, min_lookup_tables, table_size,
)
from .hash_families import ExplicitPair, random_keys, sample_source
from .oracles import excess_oracle, feasible_with_stash_oracle
from .rng import SplitMix64, derive_seed
from .uniform_sim import build_uniform

CSV_HEADER = ["experiment", "n", "s", "source", "trials", "failures", "rate", "ci_lo", "ci_hi",
              "mean_rounds", "p99_rounds", "wall_ms"]
SOURCES = {"z": kernels.SOURCE_Z, "random": kernels.SOURCE_RANDOM}


@dataclass
class ExperimentConfig:
    experiment: str
    n_list: list[int] = field(default_factory=lambda: [256])
    eps: float = 0.2
    delta: float = 0.5
    s: int = 0
    k: int = 1
    c: Optional[int] = None  # None: smallest c >= (s + 2) / (delta k)
    w: int = 16
    trials: int = 1000
    source: str = "z"
    seed: int = 0
    out: Optional[str] = None
    threads: int = 1
    maxloop: Optional[int] = None  # None: ceil(3 (s + 2) log_{1+eps} n)
    set_size: int = 4
    alpha: float = 1e-3
    engine: str = "jit"  # "jit" kernels or the "python" reference objects
    m: Optional[int] = None  # None: ceil((1 + eps) n); an override pins the table size for every n

    def __post_init__(self):
        if self.trials < 0:
            raise ValueError("trials must be >= 0")
        if self.source not in SOURCES:
            raise ValueError(f"source must be one of {sorted(SOURCES)}")
        if self.engine not in ("jit", "python"):
            raise ValueError("engine must be 'jit' or 'python'")
        if self.eps <= 0 or not 0 < self.delta < 1 or self.s < 0 or self.k < 1:
            raise ValueError("need eps > 0, 0 < delta < 1, s >= 0, k >= 1")
        if any(n < 1 for n in self.n_list):
            raise ValueError("every n must be >= 1")
        if self.m is not None and self.m < 1:
            raise ValueError("m must be >= 1")

    @property
    def lookup_tables(self) -> int:
        return self.c if self.c is not None else min_lookup_tables(self.s, self.k, self.delta)


@dataclass
class ResultRow:
    experiment: str
    n: int
    s: int
    source: str
    trials: int
    failures: int
    rate: float
    ci_lo: Optional[float] = None
    ci_hi: Optional[float] = None
    mean_rounds: Optional[float] = None
    p99_rounds: Optional[float] = None
    wall_ms: float = 0.0

    def __post_init__(self):
        if not 0 <= self.failures <= max(self.trials, 1):
            raise ValueError("failures must lie in [0, trials]")
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError("rate must lie in [0, 1]")

    def cells(self, wall: bool = True) -> list[str]:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "wall_ms" and not wall:
                v = None
            if v is None:
                out.append("")
            elif isinstance(v, float):
                out.append(f"{v:.10g}")
            else:
                out.append(str(v))
        return out


def wilson_interval(failures: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    ci = stats.binomtest(failures, trials).proportion_ci(confidence, method="wilson")
    return float(ci.low), float(ci.high)


def loglog_slope(ns: Sequence[float], rates: Sequence[float]) -> float:
    """Least-squares slope of ``log2 rate`` against ``log2 n``."""
    x = np.log2(np.asarray(ns, dtype=float))
    y = np.log2(np.asarray(rates, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def rate_ratio_interval(f1: int, n1: int, f2: int, n2: int, confidence: float = 0.95) -> tuple[float, float, float]:
    """Ratio of two binomial rates with a log-scale (Katz) confidence interval."""
    if f1 == 0 or f2 == 0:
        raise ValueError("ratio interval needs at least one failure in each sample")
    ratio = (f1 / n1) / (f2 / n2)
    se = math.sqrt(1 / f1 - 1 / n1 + 1 / f2 - 1 / n2)
    zq = stats.norm.ppf(0.5 + confidence / 2)
    return ratio, ratio * math.exp(-zq * se), ratio * math.exp(zq * se)


def histogram_mean(hist: np.ndarray) -> Optional[float]:
    total = hist.sum()
    if total == 0:
        return None
    return float((np.arange(hist.size) * hist).sum() / total)


def histogram_quantile(hist: np.ndarray, q: float) -> Optional[float]:
    total = hist.sum()
    if total == 0:
        return None
    return float(np.searchsorted(np.cumsum(hist), q * total))


def write_csv(rows: Sequence[ResultRow], path: Optional[str] = None, wall: bool = True) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.cells(wall))
    text = buf.getvalue()
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


# -- trial plumbing ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Shape:
    n: int
    m: int
    ell: int
    c: int
    k: int


def _shape(cfg: ExperimentConfig, n: int) -> _Shape:
    m = cfg.m if cfg.m is not None else table_size(n, cfg.eps)
    return _Shape(n, m, lookup_size(n, cfg.delta), cfg.lookup_tables, cfg.k)


def base_seed(cfg: ExperimentConfig, experiment: str, n: int) -> int:
    return derive_seed(cfg.seed, experiment, n, cfg.s)


def reference_trial(base: int, t: int, shape: _Shape, source: str):
    """Keys and hash pair of trial ``t`` built with the reference objects."""
    trial = derive_seed(base, t)
    keys = random_keys(shape.n, derive_seed(trial, 1))
    pair = sample_source(source, shape.m, derive_seed(trial, 2), k=shape.k, c=shape.c, ell=shape.ell)
    return keys, pair


def _chunks(trials: int, threads: int) -> list[tuple[int, int]]:
    pieces = max(1, min(trials, 8 * max(threads, 1)))
    step = math.ceil(trials / pieces) if trials else 0
    return [(a, min(a + step, trials)) for a in range(0, trials, step)] if trials else []


def _parallel(fn: Callable, trials: int, threads: int) -> list:
    spans = _chunks(trials, threads)
    if threads <= 1:
        return [fn(a, b) for a, b in spans]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda ab: fn(*ab), spans))


def _excess_samples(cfg: ExperimentConfig, experiment: str, n: int) -> np.ndarray:
    shape = _shape(cfg, n)
    base = base_seed(cfg, experiment, n)
    src = SOURCES[cfg.source]

    def python_chunk(a, b):
        out = np.empty(b - a, dtype=np.int64)
        for t in range(a, b):
            keys, pair = reference_trial(base, t, shape, cfg.source)
            out[t - a] = excess(build_graph(keys, pair))
        return out

    def jit_chunk(a, b):
        out = kernels.excess_trials(np.uint64(base), a, b, n, shape.m, src, shape.k, shape.c, shape.ell)
        for i in np.flatnonzero(out < 0):  # key collision: replay with duplicate rejection
            out[i] = python_chunk(a + i, a + i + 1)[0]
        return out

    parts = _parallel(python_chunk if cfg.engine == "python" else jit_chunk, cfg.trials, cfg.threads)
    return np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)


def _insertion_samples(cfg: ExperimentConfig, experiment: str, n: int, maxloop: int, with_excess: bool):
    """Per-trial stash demand (keys sent to an unbounded stash), excess, and the
    round histogram of trials whose demand fits in the stash."""
    shape = _shape(cfg, n)
    base = base_seed(cfg, experiment, n)
    src = SOURCES[cfg.source]

    def python_chunk(a, b):
        demand = np.empty(b - a, dtype=np.int64)
        exc = np.full(b - a, -1, dtype=np.int64)
        hist = np.zeros(maxloop + 1, dtype=np.int64)
        for t in range(a, b):
            keys, pair = reference_trial(base, t, shape, cfg.source)
            table = CuckooTable.from_pair(pair, s=n, maxloop=maxloop)
            for x in keys:
                table.insert(x)
            st = table.stats()
            demand[t - a] = st.stash_occupancy
            if st.stash_occupancy <= cfg.s:
                for r, count in st.round_histogram.items():
                    hist[r] += count
            if with_excess:
                exc[t - a] = excess(build_graph(keys, pair))
        return demand, exc, hist

    def jit_chunk(a, b):
        hist = np.zeros(maxloop + 1, dtype=np.int64)
        demand, exc = kernels.insertion_trials(np.uint64(base), a, b, n, shape.m, src, shape.k, shape.c,
                                               shape.ell, maxloop, cfg.s, with_excess, hist)
        for i in np.flatnonzero(demand < 0):
            d, e, h = python_chunk(a + i, a + i + 1)
            demand[i], exc[i] = d[0], e[0]
            hist += h
        return demand, exc, hist

    parts = _parallel(python_chunk if cfg.engine == "python" else jit_chunk, cfg.trials, cfg.threads)
    if not parts:
        return np.empty(0, np.int64), np.empty(0, np.int64), np.zeros(maxloop + 1, np.int64)
    return (np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]),
            sum(p[2] for p in parts))


def _row(experiment: str, n: int, cfg: ExperimentConfig, failures: int, started: float, **extra) -> ResultRow:
    lo, hi = wilson_interval(failures, cfg.trials)
    rate = failures / cfg.trials if cfg.trials else 0.0
    return ResultRow(experiment, n, cfg.s, cfg.source, cfg.trials, failures, rate, lo, hi,
                     wall_ms=(time.perf_counter() - started) * 1e3, **extra)


# -- experiments -------------------------------------------------------------------------------

def run_failure_prob(cfg: ExperimentConfig) -> list[ResultRow]:
    """Count trials whose cuckoo graph has excess >= s + 1."""
    rows = []
    for n in cfg.n_list:
        started = time.perf_counter()
        exc = _excess_samples(cfg, "failure-prob", n)
        rows.append(_row("failure-prob", n, cfg, int((exc >= cfg.s + 1).sum()), started))
    return rows


def _maxloop_for(cfg: ExperimentConfig, n: int) -> int:
    return cfg.maxloop if cfg.maxloop is not None else default_maxloop(n, cfg.eps, cfg.s)


def run_insertion_cost(cfg: ExperimentConfig) -> list[ResultRow]:
    """Rounds per insertion; trials that would overflow the stash count as failures
    and are left out of the round statistics."""
    rows = []
    for n in cfg.n_list:
        started = time.perf_counter()
        demand, _, hist = _insertion_samples(cfg, "insertion-cost", n, _maxloop_for(cfg, n), False)
        rows.append(_row("insertion-cost", n, cfg, int((demand > cfg.s).sum()), started,
                         mean_rounds=histogram_mean(hist), p99_rounds=histogram_quantile(hist, 0.99)))
    return rows


def run_stash_overflow(cfg: ExperimentConfig) -> list[ResultRow]:
    """Two rows per n: stash overflow (demand > s) and premature stashing
    (demand > excess, i.e. keys stashed only because the loop bound was hit)."""
    rows = []
    for n in cfg.n_list:
        started = time.perf_counter()
        demand, exc, hist = _insertion_samples(cfg, "stash-overflow", n, _maxloop_for(cfg, n), True)
        extra = dict(mean_rounds=histogram_mean(hist), p99_rounds=histogram_quantile(hist, 0.99))
        rows.append(_row("stash-overflow", n, cfg, int((demand > cfg.s).sum()), started, **extra))
        rows.append(_row("stash-overflow/premature", n, cfg, int((demand > exc).sum()), started, **extra))
    return rows


@dataclass(frozen=True)
class UniformityResult:
    counts: np.ndarray
    statistic: float
    p_value: float
    critical: float

    @property
    def rejected(self) -> bool:
        return self.statistic > self.critical


def uniformity_test(cfg: ExperimentConfig, n: int) -> UniformityResult:
    """Chi-square test of the joint output tuple on a fixed key set against uniform."""
    cells = 1 << (cfg.w * cfg.set_size)
    if cells > 1 << 22:
        raise ValueError("w * |S| must be at most 22 bits for the joint histogram")
    base = base_seed(cfg, "uniformity", n)
    keys = random_keys(cfg.set_size, derive_seed(base, "keys"))

    def chunk(a, b):
        counts = np.zeros(cells, dtype=np.int64)
        for t in range(a, b):
            ds = build_uniform(n, cfg.eps, cfg.delta, cfg.s, cfg.k, cfg.w, seed=derive_seed(base, t))
            idx = 0
            for x in reversed(keys):
                idx = (idx << cfg.w) | ds(x)
            counts[idx] += 1
        return counts

    counts = sum(_parallel(chunk, cfg.trials, cfg.threads))
    statistic, p_value = stats.chisquare(counts)
    critical = float(stats.chi2.ppf(1 - cfg.alpha, cells - 1))
    return UniformityResult(counts, float(statistic), float(p_value), critical)


def run_uniformity(cfg: ExperimentConfig) -> list[ResultRow]:
    """One row per n. Column reuse: ``failures`` is 1 if uniformity is rejected at
    ``cfg.alpha``, ``rate`` holds the p-value, ``mean_rounds`` the chi-square
    statistic and ``p99_rounds`` the critical value."""
    rows = []
    for n in cfg.n_list:
        started = time.perf_counter()
        res = uniformity_test(cfg, n)
        rows.append(ResultRow("uniformity", n, cfg.s, "z", cfg.trials, int(res.rejected), res.p_value,
                              mean_rounds=res.statistic, p99_rounds=res.critical,
                              wall_ms=(time.perf_counter() - started) * 1e3))
    return rows


# -- oracle cross-checks -----------------------------------------------------------------------

@dataclass
class Mismatch:
    check: str
    seed: int
    detail: str


@dataclass
class OracleReport:
    instances: int = 0
    checks: dict = field(default_factory=lambda: {"excess": 0, "feasibility": 0, "complete-insertion": 0})
    mismatches: list[Mismatch] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.mismatches


TRIPLE_PARALLEL = CuckooGraph.from_pairs(2, [(0, 1)] * 3)


def random_small_graph(seed: int, max_side: int = 6, max_edges: int = 12) -> CuckooGraph:
    rng = SplitMix64(seed)
    m = 1 + rng.below(max_side)
    count = rng.below(max_edges + 1)
    return CuckooGraph.from_pairs(m, [(rng.below(m), rng.below(m)) for _ in range(count)])


def complete_insertion_stash(g: CuckooGraph, order: Optional[Sequence[int]] = None) -> int:
    """Insert the graph's edges as keys with the complete variant; return the stash size."""
    pair = ExplicitPair(g.m, {key: (u, v) for u, v, key in g.edges})
    table = CuckooTable.from_pair(pair, s=len(g.edges), maxloop=2 * len(g.edges) + 4)
    for key in (order if order is not None else [e[2] for e in g.edges]):
        table.insert_complete(key)
    table.check_placement()
    return table.stats().stash_occupancy


def check_instance(g: CuckooGraph, seed: int, report: OracleReport, excess_fn: Callable = excess) -> None:
    ex = excess_fn(g)
    report.instances += 1
    report.checks["excess"] += 1
    brute = excess_oracle(g)
    if ex != brute:
        report.mismatches.append(Mismatch("excess", seed, f"formula {ex} != oracle {brute}"))
    for s in (0, 1, 2):
        report.checks["feasibility"] += 1
        feasible = feasible_with_stash_oracle(g, s)
        if feasible != (ex <= s):
            report.mismatches.append(Mismatch("feasibility", seed, f"s={s}: oracle {feasible}, excess {ex}"))
    report.checks["complete-insertion"] += 1
    stashed = complete_insertion_stash(g)
    if stashed != ex:
        report.mismatches.append(Mismatch("complete-insertion", seed, f"stash {stashed} != excess {ex}"))


def run_oracle_suite(cfg: ExperimentConfig, excess_fn: Callable = excess) -> OracleReport:
    """``cfg.trials`` random small graphs (the first one is three parallel edges).

    Each mismatch carries the instance seed; ``random_small_graph(seed)``
    rebuilds the instance.
    """
    report = OracleReport()
    base = derive_seed(cfg.seed, "oracle-suite")
    for t in range(cfg.trials):
        seed = derive_seed(base, t)
        g = TRIPLE_PARALLEL if t == 0 else random_small_graph(seed)
        check_instance(g, seed, report, excess_fn)
    return report


def oracle_rows(cfg: ExperimentConfig, report: OracleReport, wall_ms: float) -> list[ResultRow]:
    rows = []
    for check, count in report.checks.items():
        bad = sum(mm.check == check for mm in report.mismatches)
        rows.append(ResultRow(f"oracle-suite/{check}", 12, cfg.s, "explicit", count, bad,
                              bad / count if count else 0.0, wall_ms=wall_ms))
    return rows


RUNNERS = {
    "failure-prob": run_failure_prob,
    "insertion-cost": run_insertion_cost,
    "stash-overflow": run_stash_overflow,
    "uniformity": run_uniformity,
}


def run(cfg: ExperimentConfig) -> list[ResultRow]:
    if cfg.experiment == "oracle-suite":
        started = time.perf_counter()
        report = run_oracle_suite(cfg)
        return oracle_rows(cfg, report, (time.perf_counter() - started) * 1e3)
    return RUNNERS[cfg.experiment](cfg)
