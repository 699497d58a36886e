"""Experiment runner: deterministic per-trial seeds, chunked parallel
execution, JSONL trial records and CSV aggregate reports.

Trial ``i`` always runs with ``trial_seed(base_seed, i)`` on a state of its
own, so outputs do not depend on the number of workers or on chunk sizes.
Every trial is reduced to integer count maps (``Aggregator``); the per-kind
reports are rendered from those maps only, which is why partial aggregates
from different chunks can be merged in any order.
"""

import csv
import dataclasses
import json
import math
import os
import tempfile
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .analytics import AnalyticModel
from .bin_process import BinState, bin_terminal_codes, mode_code
from .graph_process import (
    GraphProcessState,
    code_from_edges,
    edges_from_code,
    graph_terminal_codes,
    max_edges,
    saturated_from_degrees,
    validate_size,
)
from .records import SCHEMA_VERSION, TrajectoryRecord
from .rng import RNG_ALGORITHM, as_seed, trial_seed, trial_seeds
from .stats import (
    EmpiricalPmf,
    PoissonPmf,
    binomial_sigma,
    chi_square,
    tv_distance,
    wilson_interval,
)

KINDS = (
    "equivalence",
    "degree-profile",
    "tail-poisson",
    "tail-moments",
    "saturation",
    "badballs",
    "survival",
    "indept-check",
)
FORMATS = ("jsonl", "csv")
SEED_DERIVATION = "seed_i = splitmix64 output i of base_seed: mix64(base + (i+1) * 0x9E3779B97F4A7C15)"
DEFAULT_CHUNK = 1000
SURVIVAL_F_GRID = (0.5, 1.0, 2.0, 4.0)
BAD_T_GRID = (1, 10, 100, 1000)


class HarnessError(RuntimeError):
    pass


def default_workers():
    raw = os.environ.get("DPROC_WORKERS")
    if not raw:
        return 1
    try:
        w = int(raw)
    except ValueError:
        raise HarnessError(f"DPROC_WORKERS must be an integer, got {raw!r}") from None
    return max(1, w)


@dataclass
class ExperimentConfig:
    kind: str
    n: int
    d: int
    trials: int
    base_seed: int = 0
    process: Optional[str] = None  # graph | bin; default depends on kind
    mode: str = "accelerated"
    checkpoints_s: list = field(default_factory=list)
    checkpoints_t: list = field(default_factory=list)
    checkpoints_m: list = field(default_factory=list)
    output: Optional[str] = None
    format: str = "jsonl"
    workers: Optional[int] = None
    epsilon: float = 0.2
    window: float = 5.0
    moments: list = field(default_factory=lambda: [1, 2])
    check: bool = False
    first_trial: int = 0
    chunk_size: int = DEFAULT_CHUNK

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        validate_size(self.n, self.d)
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}, got {self.format!r}")
        mode_code(self.mode)
        if self.process is None:
            self.process = "bin" if self.kind == "badballs" else "graph"
        if self.process not in ("graph", "bin"):
            raise ValueError(f"process must be 'graph' or 'bin', got {self.process!r}")
        if self.kind == "badballs" and self.process != "bin":
            raise ValueError("badballs needs the bin process")
        if self.checkpoints_m and self.process != "bin":
            raise ValueError("ball-count checkpoints need the bin process")
        if self.checkpoints_s and self.process != "graph":
            raise ValueError("edge-count checkpoints are recorded by the graph process only")
        if self.kind == "equivalence" and self.n * (self.n - 1) // 2 > 63:
            raise ValueError("equivalence encodes terminal graphs in 63 bits: n must be <= 11")
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1")
        if self.first_trial < 0:
            raise ValueError("first_trial must be >= 0")
        self.base_seed = as_seed(self.base_seed)
        self.checkpoints_s = sorted(set(int(x) for x in self.checkpoints_s))
        self.checkpoints_t = sorted(set(int(x) for x in self.checkpoints_t))
        self.checkpoints_m = sorted(set(int(x) for x in self.checkpoints_m))
        self._fill_defaults()
        N = self.N
        for s in self.checkpoints_s:
            if not 0 <= s <= N:
                raise ValueError(f"edge-count checkpoint {s} outside [0, {N}]")
        for t in self.checkpoints_t:
            if not 0 <= t <= N:
                raise ValueError(f"deficit checkpoint {t} outside [0, {N}]")
        for m in self.checkpoints_m:
            if m < 0:
                raise ValueError(f"ball-count checkpoint {m} is negative")

    @property
    def N(self):
        return max_edges(self.n, self.d)

    def _fill_defaults(self):
        N = self.N
        if self.n < 3:
            return
        if self.kind in ("tail-poisson", "tail-moments") and not self.checkpoints_t:
            self.checkpoints_t = [min(N, tail_deficit(self.n))]
        elif self.kind == "degree-profile" and not self.checkpoints_s:
            self.checkpoints_s = sorted({int(q * N) for q in (0.5, 0.8, 0.95)})
        elif self.kind == "badballs" and not self.checkpoints_t:
            self.checkpoints_t = [t for t in BAD_T_GRID if t <= N]
        elif self.kind == "survival" and not self.checkpoints_t:
            self.checkpoints_t = survival_grid(self.n, self.d)
        elif self.kind == "indept-check" and not self.checkpoints_t:
            self.checkpoints_t = [min(N, indept_deficit(self.n, self.epsilon))]

    def header(self):
        """Run metadata that does not depend on scheduling."""
        cfg = dataclasses.asdict(self)
        for key in ("output", "workers", "chunk_size"):
            cfg.pop(key)
        return cfg

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in dataclasses.fields(cls)}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config fields: {', '.join(sorted(extra))}")
        return cls(**data)


def tail_deficit(n):
    return math.ceil(2 * math.log(n))


def indept_deficit(n, epsilon=0.2):
    return int(math.floor(math.log(n) ** (1 - epsilon)))


def survival_grid(n, d, f_grid=SURVIVAL_F_GRID, j=0):
    """Integer deficits nearest to f_j = target for each target."""
    model = AnalyticModel(n, d)
    unit = model.f(1, j)
    return sorted({max(1, round(f / unit)) for f in f_grid})


# ------------------------------------------------------------ aggregation


class Aggregator:
    """Named integer count maps; merging is addition of counts."""

    def __init__(self):
        self.trials = 0
        self.maps = {}

    def add(self, key, value, count=1):
        c = self.maps.get(key)
        if c is None:
            c = self.maps[key] = Counter()
        c[value] += count

    def counter(self, key):
        return self.maps.get(key, Counter())

    def pmf(self, key):
        return EmpiricalPmf(self.counter(key))

    def total(self, key):
        return sum(v * c for v, c in self.counter(key).items())

    def merge(self, other):
        out = Aggregator()
        out.trials = self.trials + other.trials
        for src in (self, other):
            for key, c in src.maps.items():
                out.maps.setdefault(key, Counter()).update(c)
        return out

    def __eq__(self, other):
        return (
            isinstance(other, Aggregator)
            and self.trials == other.trials
            and {k: +v for k, v in self.maps.items()} == {k: +v for k, v in other.maps.items()}
        )

    def to_dict(self):
        return {
            "trials": self.trials,
            "maps": {k: {str(v): c for v, c in sorted(m.items())} for k, m in sorted(self.maps.items())},
        }

    @classmethod
    def from_dict(cls, data):
        out = cls()
        out.trials = data["trials"]
        for k, m in data["maps"].items():
            out.maps[k] = Counter({int(v): c for v, c in m.items()})
        return out

    def observe(self, rec):
        """Fold one trial record into the count maps."""
        self.trials += 1
        self.add("final_edges", rec.final_edges)
        self.add("saturated", int(rec.saturated))
        self.add("unsat_final", len(rec.unsaturated_degrees))
        self.add("violations", rec.violations)
        if rec.terminal_code is not None:
            self.add("terminal_code", rec.terminal_code)
        N = rec.N
        for j, s in enumerate(rec.last_times):
            self.add(f"last_deficit{j}", N - s)
        if rec.bad_final is not None:
            self.add("bad_final", rec.bad_final)
            self.add("m_final", rec.m_final)
        if rec.clipped_snapshots is not None:
            self.add("clipped", rec.clipped_snapshots)
        if rec.bad_pairs_by_deficit:
            for t, w in rec.bad_pairs_by_deficit.items():
                self.add("bad_pairs_by_deficit", t, w)
        for row in rec.checkpoints:
            key = f"{row.kind}{_row_value(row)}"
            self.add(f"{key}/reached", int(row.reached))
            if not row.reached:
                continue
            for i, x in enumerate(row.degree_counts):
                self.add(f"{key}/D{i}", x)
            self.add(f"{key}/U", row.unsaturated)
            self.add(f"{key}/unsat_edges", row.unsaturated_edges)
            self.add(f"{key}/crit_edges", row.critical_edges)
            self.add(f"{key}/crit_vertices", row.critical_vertices)
            if row.y_counts is not None:
                for i, y in enumerate(row.y_counts):
                    self.add(f"{key}/Y{i}", y)
                self.add(f"{key}/bad", row.bad)
                self.add(f"{key}/bad_unsat", row.bad_unsaturated)
                self.add(f"{key}/clip_excess", row.clip_excess)


def _row_value(row):
    return {"s": row.s, "t": row.t, "m": row.m}[row.kind]


# ----------------------------------------------------------------- trials

_STATES = {}


def _state(cfg):
    key = (cfg.process, cfg.n, cfg.d, cfg.mode)
    st = _STATES.get(key)
    if st is None:
        if cfg.process == "graph":
            st = GraphProcessState(cfg.n, cfg.d)
        else:
            st = BinState(cfg.n, cfg.d, mode=cfg.mode)
        _STATES.clear()
        _STATES[key] = st
    return st


def run_trial(cfg, index, seed=None):
    """One trial of ``cfg`` as a :class:`TrajectoryRecord`."""
    if seed is None:
        seed = trial_seed(cfg.base_seed, index)
    st = _state(cfg)
    st.reset(seed)
    if cfg.process == "graph":
        return st.run(cfg.checkpoints_s, cfg.checkpoints_t, check=cfg.check, trial=index)
    return st.run_bins(cfg.checkpoints_m, cfg.checkpoints_t, check=cfg.check, trial=index)


def _terminal_record(cfg, index, seed, code):
    edges = edges_from_code(int(code), cfg.n)
    deg = [0] * cfg.n
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    saturated, low = saturated_from_degrees(deg, cfg.d)
    return TrajectoryRecord(
        trial=index, seed=int(seed), process=cfg.process,
        mode=cfg.mode if cfg.process == "bin" else None,
        n=cfg.n, d=cfg.d, final_edges=len(edges), saturated=saturated,
        unsaturated_degrees=list(low), terminal_code=int(code),
    )


def run_chunk(cfg, start, stop, shard=None):
    """Run trials [start, stop); optionally write their records to ``shard``."""
    agg = Aggregator()
    seeds = trial_seeds(cfg.base_seed, start, stop)
    fh = open(shard, "w", encoding="utf-8") if shard else None
    try:
        if cfg.kind == "equivalence" and not cfg.check and not (cfg.checkpoints_s or cfg.checkpoints_t or cfg.checkpoints_m):
            if cfg.process == "graph":
                codes = graph_terminal_codes(cfg.n, cfg.d, seeds)
            else:
                codes = bin_terminal_codes(cfg.n, cfg.d, mode_code(cfg.mode), seeds)
            if fh is None:
                # fast path: only the terminal classes and saturation flags are needed
                for code, c in Counter(codes.tolist()).items():
                    rec = _terminal_record(cfg, 0, 0, code)
                    agg.trials += c
                    agg.add("terminal_code", code, c)
                    agg.add("final_edges", rec.final_edges, c)
                    agg.add("saturated", int(rec.saturated), c)
                    agg.add("unsat_final", len(rec.unsaturated_degrees), c)
                    agg.add("violations", 0, c)
                return agg
            for k, code in enumerate(codes):
                rec = _terminal_record(cfg, start + k, seeds[k], code)
                agg.observe(rec)
                _write(fh, rec, start + k)
            return agg
        for k in range(stop - start):
            index = start + k
            rec = run_trial(cfg, index, int(seeds[k]))
            if cfg.kind == "equivalence":
                st = _STATES[(cfg.process, cfg.n, cfg.d, cfg.mode)]
                rec.terminal_code = _code_of(st, cfg.n)
            agg.observe(rec)
            if fh is not None:
                _write(fh, rec, index)
        return agg
    finally:
        if fh is not None:
            fh.close()


def _code_of(st, n):
    return code_from_edges(st.edges(), n)


def _write(fh, rec, index):
    try:
        fh.write(rec.to_json())
        fh.write("\n")
    except OSError as exc:
        raise HarnessError(f"failed writing trial {index}: {exc}") from exc


def _chunk_job(args):
    cfg_dict, start, stop, shard = args
    cfg = ExperimentConfig.from_dict(cfg_dict)
    return run_chunk(cfg, start, stop, shard).to_dict()


def _chunks(cfg):
    first = cfg.first_trial
    last = first + cfg.trials
    return [(a, min(a + cfg.chunk_size, last)) for a in range(first, last, cfg.chunk_size)]


def run_trials(cfg, trials_path=None):
    """Run every trial of ``cfg`` and return the merged :class:`Aggregator`.

    With ``trials_path`` the records are written as JSONL: a header line,
    one line per trial in trial order and a footer whose ``complete`` flag
    is false if the run was interrupted.
    """
    workers = cfg.workers if cfg.workers is not None else default_workers()
    chunks = _chunks(cfg)
    shard_dir = None
    out = None
    if trials_path:
        try:
            out = open(trials_path, "w", encoding="utf-8")
            out.write(json.dumps({
                "record": "header", "schema": SCHEMA_VERSION, "rng": RNG_ALGORITHM,
                "seed_derivation": SEED_DERIVATION, "config": cfg.header(),
            }, sort_keys=True, separators=(",", ":")) + "\n")
        except OSError as exc:
            raise HarnessError(f"cannot open output {trials_path}: {exc}") from exc
        shard_dir = tempfile.mkdtemp(prefix="dproc-shards-", dir=os.path.dirname(os.path.abspath(trials_path)))
    shards = [os.path.join(shard_dir, f"{a:012d}.jsonl") if shard_dir else None for a, _ in chunks]
    agg = Aggregator()
    written = 0
    complete = False
    try:
        if workers <= 1 or len(chunks) == 1:
            results = (run_chunk(cfg, a, b, sh) for (a, b), sh in zip(chunks, shards))
            for (a, b), sh, part in zip(chunks, shards, results):
                agg = agg.merge(part)
                written += _append_shard(out, sh)
        else:
            cfg_dict = dataclasses.asdict(cfg)
            jobs = [(cfg_dict, a, b, sh) for (a, b), sh in zip(chunks, shards)]
            with ProcessPoolExecutor(max_workers=workers) as pool:
                # map yields in submission order, so shards are appended in trial order
                for sh, part in zip(shards, pool.map(_chunk_job, jobs)):
                    agg = agg.merge(Aggregator.from_dict(part))
                    written += _append_shard(out, sh)
        complete = True
        return agg
    finally:
        if out is not None:
            out.write(json.dumps({"record": "footer", "schema": SCHEMA_VERSION, "complete": complete,
                                  "trials": written}, separators=(",", ":")) + "\n")
            out.close()
        if shard_dir:
            for sh in shards:
                if sh and os.path.exists(sh):
                    os.remove(sh)
            os.rmdir(shard_dir)


def _append_shard(out, shard):
    if out is None or shard is None:
        return 0
    count = 0
    with open(shard, encoding="utf-8") as fh:
        for line in fh:
            out.write(line)
            count += 1
    return count


# ---------------------------------------------------------------- reports


@dataclass
class AggregateReport:
    kind: str
    config: dict
    columns: list
    rows: list
    summary: dict
    aggregator: Aggregator = field(repr=False, default=None)

    def to_json(self):
        return json.dumps({"kind": self.kind, "schema": SCHEMA_VERSION, "config": self.config,
                           "summary": self.summary, "rows": self.rows}, indent=1, default=str)

    def write_csv(self, path):
        try:
            with open(path, "w", newline="", encoding="utf-8") as fh:
                w = csv.DictWriter(fh, fieldnames=self.columns)
                w.writeheader()
                for row in self.rows:
                    w.writerow({k: _fmt(row.get(k)) for k in self.columns})
        except OSError as exc:
            raise HarnessError(f"cannot write report {path}: {exc}") from exc


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return x


COLUMNS = {
    "saturation": ["n", "d", "trials", "nonsaturated", "p_hat", "wilson_lo", "wilson_hi",
                   "parity", "prediction", "scaled"],
    "tail-poisson": ["n", "d", "t", "j", "f", "reached", "mean", "tv", "chi2", "chi2_df"],
    "tail-moments": ["n", "d", "t", "j", "k", "f_pow_k", "moment", "ratio", "reached"],
    "degree-profile": ["n", "d", "s", "j", "beta", "w", "coverage", "sd", "sd_over_sqrt_beta", "reached"],
    "badballs": ["n", "d", "t", "trials", "reached", "mean_bad_unsat", "max_bad_unsat",
                 "bad_pairs_at_t", "mean_bad_final", "mean_bad_final_over_log_n"],
    "survival": ["n", "d", "t", "j", "f", "predicted", "empirical", "trials"],
    "indept-check": ["n", "d", "t", "epsilon", "reached", "with_unsat_edge", "frequency"],
    "equivalence": ["n", "d", "process", "mode", "code", "edges", "saturated", "exact", "exact_decimal",
                    "count", "frequency", "sigma", "z"],
}


def _mean_sd(counter):
    total = sum(counter.values())
    if total == 0:
        return None, None
    mean = sum(v * c for v, c in counter.items()) / total
    if total < 2:
        return mean, 0.0
    var = sum(c * (v - mean) ** 2 for v, c in counter.items()) / (total - 1)
    return mean, math.sqrt(var)


def _reached(agg, key):
    return agg.counter(f"{key}/reached").get(1, 0)


def report_saturation(cfg, agg):
    trials = agg.trials
    nonsat = agg.counter("saturated").get(0, 0)
    lo, hi = wilson_interval(nonsat, trials)
    parity, pred = AnalyticModel(cfg.n, cfg.d).nonsaturation_scale() if cfg.n >= 2 else ("even", None)
    p = nonsat / trials
    row = {"n": cfg.n, "d": cfg.d, "trials": trials, "nonsaturated": nonsat, "p_hat": p,
           "wilson_lo": lo, "wilson_hi": hi, "parity": parity,
           "prediction": pred, "scaled": p / pred if pred else None}
    unsat = {str(k): c for k, c in sorted(agg.counter("unsat_final").items())}
    return [row], {"p_hat": p, "wilson": [lo, hi], "final_unsaturated_counts": unsat}


def report_tail_poisson(cfg, agg):
    model = AnalyticModel(cfg.n, cfg.d)
    rows = []
    for t in cfg.checkpoints_t:
        key = f"t{t}"
        for j in range(cfg.d - 1):
            f = model.f(t, j)
            pmf = agg.pmf(f"{key}/D{j}")
            if pmf.total == 0:
                rows.append({"n": cfg.n, "d": cfg.d, "t": t, "j": j, "f": f, "reached": 0})
                continue
            stat, df = chi_square(pmf, f)
            rows.append({"n": cfg.n, "d": cfg.d, "t": t, "j": j, "f": f, "reached": pmf.total,
                         "mean": pmf.mean(), "tv": tv_distance(pmf, PoissonPmf(f)),
                         "chi2": stat, "chi2_df": df})
    return rows, {"max_tv": max((r["tv"] for r in rows if "tv" in r), default=None)}


def report_tail_moments(cfg, agg):
    model = AnalyticModel(cfg.n, cfg.d)
    rows = []
    for t in cfg.checkpoints_t:
        for j in range(cfg.d - 1):
            f = model.f(t, j)
            pmf = agg.pmf(f"t{t}/D{j}")
            for k in cfg.moments:
                row = {"n": cfg.n, "d": cfg.d, "t": t, "j": j, "k": k, "f_pow_k": f ** k,
                       "reached": pmf.total}
                if pmf.total:
                    row["moment"] = pmf.factorial_moment(k)
                    row["ratio"] = row["moment"] / f ** k
                rows.append(row)
    return rows, {}


def report_degree_profile(cfg, agg):
    model = AnalyticModel(cfg.n, cfg.d)
    rows = []
    for s in cfg.checkpoints_s:
        if s >= model.half_total:
            continue
        betas = model.expected_degree_counts(s)
        for j in range(cfg.d):
            c = agg.counter(f"s{s}/D{j}")
            total = sum(c.values())
            beta = betas[j]
            row = {"n": cfg.n, "d": cfg.d, "s": s, "j": j, "beta": beta, "w": cfg.window, "reached": total}
            if total:
                half = cfg.window * math.sqrt(beta)
                hit = sum(k for v, k in c.items() if abs(v - beta) <= half)
                _, sd = _mean_sd(c)
                row["coverage"] = hit / total
                row["sd"] = sd
                row["sd_over_sqrt_beta"] = sd / math.sqrt(beta) if beta > 0 else None
            rows.append(row)
    return rows, {}


def report_badballs(cfg, agg):
    log_n = math.log(cfg.n)
    mean_bf, _ = _mean_sd(agg.counter("bad_final"))
    w = agg.counter("bad_pairs_by_deficit")
    rows = []
    for t in cfg.checkpoints_t:
        c = agg.counter(f"t{t}/bad_unsat")
        mean, _ = _mean_sd(c)
        rows.append({"n": cfg.n, "d": cfg.d, "t": t, "trials": agg.trials, "reached": sum(c.values()),
                     "mean_bad_unsat": mean, "max_bad_unsat": max(c) if c else None,
                     "bad_pairs_at_t": w.get(t, 0),
                     "mean_bad_final": mean_bf,
                     "mean_bad_final_over_log_n": mean_bf / log_n if mean_bf is not None else None})
    return rows, {"mean_bad_final": mean_bf,
                  "mean_bad_final_over_log_n": mean_bf / log_n if mean_bf is not None else None}


def report_survival(cfg, agg):
    model = AnalyticModel(cfg.n, cfg.d)
    rows = []
    for t in cfg.checkpoints_t:
        for j in range(cfg.d - 1):
            c = agg.counter(f"last_deficit{j}")
            total = sum(c.values())
            f = model.f(t, j)
            emp = sum(k for v, k in c.items() if v > t) / total if total else None
            rows.append({"n": cfg.n, "d": cfg.d, "t": t, "j": j, "f": f,
                         "predicted": math.exp(-f), "empirical": emp, "trials": total})
    return rows, {}


def report_indept(cfg, agg):
    rows = []
    for t in cfg.checkpoints_t:
        c = agg.counter(f"t{t}/unsat_edges")
        reached = sum(c.values())
        hits = sum(k for v, k in c.items() if v > 0)
        rows.append({"n": cfg.n, "d": cfg.d, "t": t, "epsilon": cfg.epsilon, "reached": reached,
                     "with_unsat_edge": hits, "frequency": hits / reached if reached else None})
    return rows, {}


def report_equivalence(cfg, agg):
    from .oracle import terminal_classes

    exact = dict(terminal_classes(cfg.n, cfg.d))
    counts = agg.counter("terminal_code")
    trials = agg.trials
    rows = []
    max_z = 0.0
    for code in sorted(set(exact) | set(counts)):
        p = exact.get(code, Fraction(0))
        c = counts.get(code, 0)
        freq = c / trials
        sigma = binomial_sigma(float(p), trials)
        if sigma > 0:
            z = (freq - float(p)) / sigma
        else:
            # p is 0 or 1: any other frequency is impossible under the exact law
            z = 0.0 if freq == float(p) else math.inf
        max_z = max(max_z, abs(z))
        edges = edges_from_code(code, cfg.n)
        deg = [0] * cfg.n
        for u, v in edges:
            deg[u] += 1
            deg[v] += 1
        rows.append({"n": cfg.n, "d": cfg.d, "process": cfg.process,
                     "mode": cfg.mode if cfg.process == "bin" else "", "code": code,
                     "edges": " ".join(f"{u}-{v}" for u, v in edges),
                     "saturated": int(saturated_from_degrees(deg, cfg.d)[0]),
                     "exact": f"{p.numerator}/{p.denominator}", "exact_decimal": float(p),
                     "count": c, "frequency": freq, "sigma": sigma, "z": z})
    nonsat_exact = sum((p for code, p in exact.items() if not _saturated_code(code, cfg)), Fraction(0))
    nonsat = agg.counter("saturated").get(0, 0) / trials
    sig = binomial_sigma(float(nonsat_exact), trials)
    return rows, {"max_abs_z": max_z, "nonsat_exact": f"{nonsat_exact.numerator}/{nonsat_exact.denominator}",
                  "nonsat_hat": nonsat, "nonsat_sigma": sig}


def _saturated_code(code, cfg):
    deg = [0] * cfg.n
    for u, v in edges_from_code(code, cfg.n):
        deg[u] += 1
        deg[v] += 1
    return saturated_from_degrees(deg, cfg.d)[0]


REPORTS = {
    "saturation": report_saturation,
    "tail-poisson": report_tail_poisson,
    "tail-moments": report_tail_moments,
    "degree-profile": report_degree_profile,
    "badballs": report_badballs,
    "survival": report_survival,
    "indept-check": report_indept,
    "equivalence": report_equivalence,
}


def build_report(cfg, agg, kind=None):
    """Render the report of ``kind`` (default ``cfg.kind``) from an aggregate."""
    kind = kind or cfg.kind
    rows, summary = REPORTS[kind](cfg, agg)
    summary = dict(summary)
    summary["trials"] = agg.trials
    summary["violations"] = agg.total("violations")
    return AggregateReport(kind, cfg.header(), COLUMNS[kind], rows, summary, agg)


def run_experiment(cfg):
    """Run ``cfg`` and write its outputs.

    ``format='jsonl'`` writes the trial records to ``output`` and the
    aggregate table next to it with a ``.csv`` suffix; ``format='csv'``
    writes only the aggregate table to ``output``.
    """
    trials_path = cfg.output if cfg.output and cfg.format == "jsonl" else None
    agg = run_trials(cfg, trials_path)
    report = build_report(cfg, agg)
    if cfg.output:
        if cfg.format == "jsonl":
            root, _ = os.path.splitext(cfg.output)
            report.write_csv(root + ".csv")
        else:
            report.write_csv(cfg.output)
    return report

