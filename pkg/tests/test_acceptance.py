"""Acceptance criteria 1-10 at their stated trial counts and tolerances.

Each big run happens once (module fixtures) and is cut into trial ranges
with ``first_trial``, so for example the first 10^4 trials of the 2*10^4
trial saturation run at n = 10^5 are the tail, moment and survival runs.
Every test appends one PASS/FAIL line, printed in the terminal summary.
"""

import dataclasses
import json
import math
import os
from fractions import Fraction

import pytest

from conftest import ACCEPTANCE_LINES
from dprocess.analytics import AnalyticModel, truncated_poisson_vector
from dprocess.harness import Aggregator, ExperimentConfig, build_report, run_trials
from dprocess.stats import wilson_interval

pytestmark = pytest.mark.slow

BASE_SEED = 1
BIG_N = 10**5
FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def record(num, ok, detail):
    ACCEPTANCE_LINES.append(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    print(ACCEPTANCE_LINES[-1])
    assert ok, detail


def run_cuts(cfg, cuts):
    """Cumulative aggregates over [0, c) for each c in ``cuts``."""
    out = {}
    agg = Aggregator()
    start = 0
    for c in cuts:
        part = dataclasses.replace(cfg, first_trial=start, trials=c - start)
        agg = agg.merge(run_trials(part))
        out[c] = agg
        start = c
    return out


def report(cfg, agg, kind, **changes):
    cfg = dataclasses.replace(cfg, kind=kind, **changes)
    return build_report(cfg, agg)


# ------------------------------------------------------------ shared runs


@pytest.fixture(scope="module")
def d2_runs():
    """d = 2, n = 10^5: saturation (2*10^4), tail/moments/survival (10^4), indept (10^3)."""
    model = AnalyticModel(BIG_N, 2)
    grid = sorted({max(1, round(f / model.f(1, 0))) for f in (0.5, 1.0, 2.0, 4.0)})
    ts = sorted(set(grid) | {math.ceil(2 * math.log(BIG_N)), math.floor(math.log(BIG_N) ** 0.8)})
    cfg = ExperimentConfig(kind="saturation", n=BIG_N, d=2, trials=1, base_seed=BASE_SEED,
                           checkpoints_t=ts, check=True)
    return cfg, grid, run_cuts(cfg, [10**3, 10**4, 2 * 10**4])


@pytest.fixture(scope="module")
def d3_runs():
    """d = 3, n = 10^5: degree profile (200), tail moments (10^4), indept (10^3)."""
    N = 3 * BIG_N // 2
    s_grid = [int(q * N) for q in (0.5, 0.8, 0.95)]
    ts = [math.ceil(2 * math.log(BIG_N)), math.floor(math.log(BIG_N) ** 0.8)]
    cfg = ExperimentConfig(kind="degree-profile", n=BIG_N, d=3, trials=1, base_seed=BASE_SEED,
                           checkpoints_s=s_grid, checkpoints_t=ts, check=True)
    return cfg, run_cuts(cfg, [200, 10**3, 10**4])


@pytest.fixture(scope="module")
def saturation_runs():
    out = {}
    for n, trials, d in ((10**3, 2 * 10**4, 2), (10**4, 2 * 10**4, 2), (1001, 10**5, 3), (10001, 10**5, 3)):
        cfg = ExperimentConfig(kind="saturation", n=n, d=d, trials=trials, base_seed=BASE_SEED,
                               check=True, chunk_size=10**4)
        out[(n, d)] = (cfg, run_trials(cfg))
    return out


@pytest.fixture(scope="module")
def badball_runs():
    out = {}
    for n in (10**3, 10**4, 10**5):
        cfg = ExperimentConfig(kind="badballs", n=n, d=2, trials=10**3, base_seed=BASE_SEED,
                               mode="accelerated", check=True)
        out[n] = (cfg, run_trials(cfg))
    return out


# -------------------------------------------------------------- criteria


EQUIV_CASES = [(n, 2, proc, mode) for n in (3, 4, 5)
               for proc, mode in (("graph", "accelerated"), ("bin", "faithful"), ("bin", "accelerated"))]


@pytest.mark.parametrize("n,d,process,mode", EQUIV_CASES)
def test_c2_equivalence(n, d, process, mode):
    cfg = ExperimentConfig(kind="equivalence", n=n, d=d, trials=10**6, base_seed=BASE_SEED,
                           process=process, mode=mode, chunk_size=10**5)
    rep = build_report(cfg, run_trials(cfg))
    ok = rep.summary["max_abs_z"] <= 5
    detail = f"max|z|={rep.summary['max_abs_z']:.2f}"
    if n == 4:
        p = Fraction(rep.summary["nonsat_exact"])
        assert p == Fraction(4, 15)
        z = (rep.summary["nonsat_hat"] - float(p)) / rep.summary["nonsat_sigma"]
        ok = ok and abs(z) <= 5
        detail += f", Pr(F)={rep.summary['nonsat_hat']:.5f} vs 4/15 (z={z:.2f})"
    label = process if process == "graph" else f"bin-{mode}"
    record(2, ok, f"equivalence n={n} d={d} {label}: {detail} over 10^6 trials (band 5 sigma)")


def test_c3_degree_window(d3_runs):
    cfg, aggs = d3_runs
    rep = report(cfg, aggs[200], "degree-profile", window=5.0)
    checked = [r for r in rep.rows if r["beta"] >= 1e3]
    assert checked and all(r["reached"] == 200 for r in checked)
    bad = [r for r in checked if r["coverage"] < 0.95 or r["sd"] > 3 * math.sqrt(r["beta"])]
    worst_cov = min(r["coverage"] for r in checked)
    worst_sd = max(r["sd_over_sqrt_beta"] for r in checked)
    record(3, not bad, f"degree window d=3 n=1e5 200 trials, {len(checked)} (s,j) cells: "
           f"min coverage {worst_cov:.3f} (>=0.95), max sd/sqrt(beta) {worst_sd:.3f} (<=3)")


def test_c4_tail_poisson(d2_runs):
    cfg, _, aggs = d2_runs
    t = math.ceil(2 * math.log(BIG_N))
    rep = report(cfg, aggs[10**4], "tail-poisson", checkpoints_t=[t])
    row = rep.rows[0]
    assert row["reached"] == 10**4
    record(4, row["tv"] <= 0.10, f"Poisson tail d=2 n=1e5 t={t} f0={row['f']:.3f}: TV={row['tv']:.4f} (<=0.10), "
           f"mean {row['mean']:.3f}, chi2 {row['chi2']:.1f} on {row['chi2_df']} df")


def test_c5_factorial_moments(d2_runs, d3_runs):
    t = math.ceil(2 * math.log(BIG_N))
    parts = []
    ok = True
    for d, (cfg, agg) in ((2, (d2_runs[0], d2_runs[2][10**4])), (3, (d3_runs[0], d3_runs[1][10**4]))):
        rep = report(cfg, agg, "tail-moments", checkpoints_t=[t], moments=[1, 2])
        for r in rep.rows:
            if r["f_pow_k"] < 0.5:
                continue
            assert r["reached"] == 10**4
            good = 0.7 <= r["ratio"] <= 1.4
            ok = ok and good
            parts.append(f"d={d} j={r['j']} k={r['k']}: {r['ratio']:.3f}")
    record(5, ok and bool(parts), "factorial moment ratios in [0.7,1.4]: " + "; ".join(parts))


def test_c6_nonsaturation_scaling(d2_runs, saturation_runs):
    ok = True
    parts = []
    phat = {}
    counts = {}
    for n in (10**3, 10**4, 10**5):
        if n == BIG_N:
            cfg, agg = d2_runs[0], d2_runs[2][2 * 10**4]
        else:
            cfg, agg = saturation_runs[(n, 2)]
        rep = report(cfg, agg, "saturation")
        row = rep.rows[0]
        assert row["trials"] == 2 * 10**4 and row["parity"] == "even"
        phat[n] = row["p_hat"]
        counts[n] = (row["nonsaturated"], row["trials"])
        ok = ok and 0.5 <= row["scaled"] <= 2.0
        parts.append(f"n={n}: p={row['p_hat']:.4f} scaled {row['scaled']:.3f}")
    decreasing = phat[10**3] > phat[10**4] > phat[10**5]
    lo3, hi3 = wilson_interval(*counts[10**3])
    lo5, hi5 = wilson_interval(*counts[10**5])
    disjoint = hi5 < lo3
    ok = ok and decreasing and disjoint
    for n in (1001, 10001):
        cfg, agg = saturation_runs[(n, 3)]
        row = report(cfg, agg, "saturation").rows[0]
        assert row["trials"] == 10**5 and row["parity"] == "odd"
        ok = ok and 0.3 <= row["scaled"] <= 3.0
        parts.append(f"d=3 n={n}: p={row['p_hat']:.5f} scaled {row['scaled']:.3f}")
    record(6, ok, "nonsaturation scaling, d=2 band [0.5,2], d=3 band [0.3,3]; "
           + "; ".join(parts) + f"; decreasing={decreasing}, Wilson 1e5 [{lo5:.4f},{hi5:.4f}] "
           f"vs 1e3 [{lo3:.4f},{hi3:.4f}] disjoint={disjoint}")


def test_c7_bad_balls(badball_runs):
    with open(os.path.join(FIXTURES, "badballs_pilot.json"), encoding="utf-8") as fh:
        pilot = json.load(fh)
    assert pilot["base_seed"] != BASE_SEED
    ns = (10**3, 10**4, 10**5)
    norm = {}
    for n in ns:
        cfg, agg = badball_runs[n]
        rep = build_report(cfg, agg)
        assert rep.summary["violations"] == 0
        norm[n] = rep.summary["mean_bad_final_over_log_n"]
    ratios = [norm[b] / norm[a] for a, b in zip(ns, ns[1:])]
    cfg, agg = badball_runs[BIG_N]
    rows = build_report(cfg, agg).rows
    assert [r["t"] for r in rows] == [1, 10, 100, 1000]
    means = {r["t"]: r["mean_bad_unsat"] for r in rows}
    ok = all(0.3 <= r <= 3.0 for r in ratios) and all(m is not None and m <= 5 for m in means.values())
    # the committed pilot has to sit in the same bands
    pilot_norm = [pilot["runs"][str(n)]["mean_bad_final_over_log_n"] for n in ns]
    pilot_ratios = [b / a for a, b in zip(pilot_norm, pilot_norm[1:])]
    pilot_ok = all(0.3 <= r <= 3.0 for r in pilot_ratios) and all(
        v <= 5 for v in pilot["runs"][str(BIG_N)]["mean_bad_unsat"].values())
    record(7, ok and pilot_ok,
           "bad balls d=2 1e3 trials: mean B_f/log n " + ", ".join(f"{norm[n]:.3f}" for n in ns)
           + " ratios " + ", ".join(f"{r:.3f}" for r in ratios) + " (in [0.3,3]); mean B~(t) at n=1e5 "
           + ", ".join(f"t={t}: {m:.3f}" for t, m in means.items()) + " (<=5); pilot ratios "
           + ", ".join(f"{r:.3f}" for r in pilot_ratios))


def test_c8_survival(d2_runs):
    cfg, grid, aggs = d2_runs
    rep = report(cfg, aggs[10**4], "survival", checkpoints_t=grid)
    diffs = [(r["t"], r["f"], r["empirical"], r["predicted"]) for r in rep.rows]
    assert all(r["trials"] == 10**4 for r in rep.rows)
    worst = max(abs(e - p) for _, _, e, p in diffs)
    record(8, worst <= 0.10, "survival d=2 n=1e5 1e4 trials, |emp-exp(-f0)| <= 0.10: "
           + "; ".join(f"t={t} f0={f:.2f} {e:.4f} vs {p:.4f}" for t, f, e, p in diffs))


def test_c9_no_unsaturated_edges(d2_runs, d3_runs):
    t = math.floor(math.log(BIG_N) ** 0.8)
    parts = []
    ok = True
    for d, cfg, agg in ((2, d2_runs[0], d2_runs[2][10**3]), (3, d3_runs[0], d3_runs[1][10**3])):
        assert agg.trials == 10**3
        row = report(cfg, agg, "indept-check", checkpoints_t=[t], epsilon=0.2).rows[0]
        ok = ok and row["frequency"] <= 0.05
        parts.append(f"d={d}: {row['with_unsat_edge']}/{row['reached']} = {row['frequency']:.4f}")
    record(9, ok, f"no unsaturated edge at t={t} (<=0.05): " + "; ".join(parts))


def test_c10_analytics():
    worst = {"round trip": 0.0, "beta identity": 0.0, "finite difference": 0.0, "normalization": 0.0}
    for n in (10**3, 10**5, 10**7):
        for d in (2, 3, 5):
            m = AnalyticModel(n, d)
            for q in (1e-6, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.9999):
                s = q * m.half_total
                x = m.ell_inverse(s)
                worst["round trip"] = max(worst["round trip"], abs(m.ell(x) - s) / s)
                h = 1e-4 * n
                # central differences need x - h >= 0
                if x > 2 * h:
                    fd = (m.ell(x + h) - m.ell(x - h)) / (2 * h)
                    worst["finite difference"] = max(worst["finite difference"],
                                                     abs(fd - m.ell_prime(x)) / m.ell_prime(x))
            for mu in (1e-3, 0.1, 1.0, 3.0, 10.0, 40.0):
                x = mu * n
                top = m.beta(x, d - 1)
                for i in range(d):
                    k = d - 1 - i
                    rhs = top * math.perm(d - 1, k) / mu ** k
                    worst["beta identity"] = max(worst["beta identity"], abs(m.beta(x, i) - rhs) / m.beta(x, i))
                worst["normalization"] = max(worst["normalization"],
                                             abs(math.fsum(truncated_poisson_vector(d, mu)) - 1))
    tol = {"round trip": 1e-9, "beta identity": 1e-12, "finite difference": 1e-6, "normalization": 1e-12}
    ok = all(worst[k] <= tol[k] for k in tol)
    record(10, ok, "analytics: " + ", ".join(f"{k} {worst[k]:.1e} (<= {tol[k]:.0e})" for k in tol))


def test_c1_invariants(d2_runs, d3_runs, saturation_runs, badball_runs):
    """Standing check-mode run, plus the tallies of every checked run above."""
    parts = []
    total = 0
    for process, mode in (("graph", "accelerated"), ("bin", "faithful"), ("bin", "accelerated")):
        for d in (2, 3, 5):
            cfg = ExperimentConfig(kind="saturation", n=10**3, d=d, trials=10**3, base_seed=BASE_SEED,
                                   process=process, mode=mode, check=True,
                                   checkpoints_t=[1, 2, 5, 10, 50, 200])
            agg = run_trials(cfg)
            v = agg.total("violations")
            total += v
            label = process if process == "graph" else f"bin-{mode}"
            parts.append(f"{label} d={d}: {v}")
    checked = [d2_runs[2][2 * 10**4], d3_runs[1][10**4]]
    checked += [agg for _, agg in saturation_runs.values()] + [agg for _, agg in badball_runs.values()]
    others = sum(agg.total("violations") for agg in checked)
    trials = sum(agg.trials for agg in checked)
    record(1, total == 0 and others == 0,
           "invariants at n=1e3 over 1e3 trials each: " + ", ".join(parts)
           + f"; violations in the other {trials} checked trials: {others}")
