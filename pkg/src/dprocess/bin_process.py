"""Simulator of the bin d-process and its embedded bin-graph process.

Balls drop into ``n`` bins uniformly at random. A bin is unsaturated while
it holds fewer than ``d`` good balls; balls landing in saturated bins stay
unnumbered. Consecutive numbered balls form pairs, and a pair is good when
its bins are distinct and no earlier pair used the same two bins. Good
pairs are the edges of the bin-graph process.

An earlier pair on the same two distinct bins is always good itself (the
first pair on any bin pair cannot repeat anything), so "bin pair already
used" is the same as "bins already adjacent" and no separate set of used
pairs is needed. ``reference_bins`` keeps the explicit set and the tests
check that both agree ball for ball.

Two modes drive the same kernel:

* ``faithful`` drops every ball into a uniform bin;
* ``accelerated`` draws the run of unnumbered balls as one geometric skip
  (one uniform per numbered ball, by inverse transform) and then places the
  numbered ball in a uniform unsaturated bin.

Unnumbered balls only ever land in bins already holding at least ``d``
balls, so the counts Y_0..Y_{d-1} and Y_{>=d} are exact in both modes. The
per-bin totals of saturated bins exclude skipped balls in accelerated mode.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .graph_process import (
    C_DEG,
    S_EDGES,
    S_MINDEG,
    S_UNSAT,
    count_allowed,
    count_bound_violations,
    count_stuck_violations,
    count_structure_violations,
    edge_code,
    fill_graph_row,
    max_edges,
    new_arrays,
    reset_arrays,
    saturated_from_degrees,
    validate_size,
)
from .records import CheckpointRow, TrajectoryRecord
from .rng import Xoshiro256, as_seed, geometric_failures, randbelow, seed_into, seed_state

FAITHFUL = 0
ACCELERATED = 1
MODES = {"faithful": FAITHFUL, "accelerated": ACCELERATED}

# bin scalar slots
B_M = 0
B_NUMBERED = 1
B_UNNUMBERED = 2
B_BAD = 3
B_WAITING = 4  # bin of the waiting ball, -1 if none
B_BAD_UNSAT = 5
B_EXCESS = 6  # sum over unsaturated bins of max(0, balls - d)
B_MPTR = 7
B_MFIRST = 8  # m at which the current deficit was first reached
B_DONE = 9
B_CLIPPED = 10  # checked deficit snapshots where the excess was positive
B_SKIP = 11
N_BIN_SCALARS = 12

# event codes
EV_UNNUMBERED = 0
EV_WAITING = 1
EV_GOOD = 2
EV_BAD = 3


def row_width(d):
    return C_DEG + d + 1 + 7 + d + 1


def _bin_offset(d):
    return C_DEG + d + 1


@njit(cache=True)
def new_bin_arrays(n, d):
    balls = np.zeros(n, dtype=np.int64)
    bad_in_bin = np.zeros(n, dtype=np.int32)
    ycount = np.zeros(d + 1, dtype=np.int64)
    bsc = np.zeros(N_BIN_SCALARS, dtype=np.int64)
    wt = np.zeros((d * n) // 2 + 1, dtype=np.int64)
    reset_bin_arrays(n, balls, bad_in_bin, ycount, bsc, wt)
    return balls, bad_in_bin, ycount, bsc, wt


@njit(cache=True)
def reset_bin_arrays(n, balls, bad_in_bin, ycount, bsc, wt):
    balls[:] = 0
    bad_in_bin[:] = 0
    ycount[:] = 0
    ycount[0] = n
    bsc[:] = 0
    bsc[B_WAITING] = -1
    wt[:] = 0


@njit(cache=True)
def fill_bin_row(row, m, m_first, m_last, n, d, deg, adj, unsat, dcount, sc, ycount, bsc):
    fill_graph_row(row, n, d, deg, adj, unsat, dcount, sc)
    o = C_DEG + d + 1
    row[o] = m
    row[o + 1] = m_first
    row[o + 2] = m_last
    row[o + 3] = bsc[B_BAD]
    row[o + 4] = bsc[B_BAD_UNSAT]
    row[o + 5] = 1 if bsc[B_WAITING] >= 0 else 0
    row[o + 6] = bsc[B_EXCESS]
    for i in range(d + 1):
        row[o + 7 + i] = ycount[i]


@njit(cache=True)
def l_to_s_violations(n, d, ycount, sc, bsc):
    """Check 2s = 2L - B~ - waiting + excess; also tally clipped snapshots."""
    two_l = d * n
    for i in range(d):
        two_l -= (d - i) * ycount[i]
    waiting = 1 if bsc[B_WAITING] >= 0 else 0
    if bsc[B_EXCESS] > 0:
        bsc[B_CLIPPED] += 1
    if 2 * sc[S_EDGES] != two_l - bsc[B_BAD_UNSAT] - waiting + bsc[B_EXCESS]:
        return 1
    return 0


@njit(cache=True)
def ball_violations(n, d, dcount, ycount, sc, bsc):
    """Checks after each ball: partition, Y vs D, parity, counts."""
    bad = 0
    waiting = 1 if bsc[B_WAITING] >= 0 else 0
    good = 2 * sc[S_EDGES]
    if good + bsc[B_BAD] + waiting + bsc[B_UNNUMBERED] != bsc[B_M]:
        bad += 1
    if good + bsc[B_BAD] + waiting != bsc[B_NUMBERED]:
        bad += 1
    # tight form |Y_i - D_i| <= B~ + 1, which implies the bound with B
    for i in range(d):
        diff = ycount[i] - dcount[i]
        if diff < 0:
            diff = -diff
        if diff > bsc[B_BAD_UNSAT] + 1 or diff > bsc[B_BAD] + 1:
            bad += 1
    total = 0
    for i in range(d + 1):
        total += ycount[i]
    if total != n or bsc[B_BAD_UNSAT] > bsc[B_BAD] or bsc[B_BAD_UNSAT] < 0:
        bad += 1
    return bad


@njit(cache=True)
def full_bin_violations(n, d, deg, balls, bad_in_bin, ycount, bsc):
    """O(n) recount of Y, B~ and the excess from per-bin data (unsaturated bins)."""
    bad = 0
    bu = 0
    ex = 0
    ylow = np.zeros(d, dtype=np.int64)
    for j in range(n):
        if deg[j] < d:
            bu += bad_in_bin[j]
            if balls[j] > d:
                ex += balls[j] - d
            if balls[j] < d:
                ylow[balls[j]] += 1
    if bu != bsc[B_BAD_UNSAT] or ex != bsc[B_EXCESS]:
        bad += 1
    for i in range(d):
        if ylow[i] != ycount[i]:
            bad += 1
    return bad


@njit(cache=True)
def advance_bins(n, d, mode, rng,
                 deg, adj, unsat, pos, dcount, sc, last_s,
                 balls, bad_in_bin, ycount, bsc, wt,
                 max_events, t_index, t_rows, t_reached, m_list, m_rows, m_reached,
                 check):
    """Process up to ``max_events`` events; the hot path is inlined here.

    An event is one ball in faithful mode and one numbered ball (after its
    geometric skip) in accelerated mode. Deficit rows listed in ``t_index``
    are taken at the last step at that deficit, i.e. just before the ball
    that completes the next good pair, or at termination. ``m_list`` is a
    sorted list of ball counts; ``bsc[B_MPTR]`` walks it.

    Returns (events, last event code, bin u, bin v, violations). A pair
    event reports the waiting ball's bin as ``u``.
    """
    N = (d * n) // 2
    n_m = len(m_list)
    events = 0
    violations = 0
    kind = -1
    u = -1
    v = -1
    while events < max_events and bsc[B_DONE] == 0:
        events += 1
        m = bsc[B_M]
        if mode == ACCELERATED:
            n_unsat = sc[S_UNSAT]
            skip = geometric_failures(rng, n_unsat / n)
            bsc[B_SKIP] = skip
            m += skip
            bsc[B_UNNUMBERED] += skip
            b = unsat[randbelow(rng, n_unsat)]
        else:
            b = randbelow(rng, n)
            if deg[b] == d:
                m += 1
                bsc[B_M] = m
                bsc[B_UNNUMBERED] += 1
                balls[b] += 1
                p = bsc[B_MPTR]
                while p < n_m and m_list[p] <= m:
                    fill_bin_row(m_rows[p], m_list[p], -1, -1, n, d, deg, adj, unsat, dcount, sc, ycount, bsc)
                    m_reached[p] = True
                    p += 1
                bsc[B_MPTR] = p
                kind = EV_UNNUMBERED
                u = b
                v = -1
                continue
        # balls before this numbered one (the skip gap leaves Y unchanged)
        p = bsc[B_MPTR]
        while p < n_m and m_list[p] <= m:
            fill_bin_row(m_rows[p], m_list[p], -1, -1, n, d, deg, adj, unsat, dcount, sc, ycount, bsc)
            m_reached[p] = True
            p += 1
        bsc[B_MPTR] = p
        w = bsc[B_WAITING]
        good = False
        if w >= 0 and w != b:
            good = True
            for k in range(deg[w]):
                if adj[w, k] == b:
                    good = False
                    break
        t = N - sc[S_EDGES]
        if good:
            # last step at deficit t
            r = t_index[t]
            if r >= 0:
                fill_bin_row(t_rows[r], m, bsc[B_MFIRST], m, n, d, deg, adj, unsat, dcount, sc, ycount, bsc)
                t_reached[r] = True
                violations += l_to_s_violations(n, d, ycount, sc, bsc)
            elif check:
                violations += l_to_s_violations(n, d, ycount, sc, bsc)
        # place the numbered ball
        m += 1
        bsc[B_M] = m
        bsc[B_NUMBERED] += 1
        a = balls[b]
        balls[b] = a + 1
        if a < d:
            ycount[a] -= 1
            ycount[a + 1] += 1
        else:
            bsc[B_EXCESS] += 1
        if w < 0:
            bsc[B_WAITING] = b
            kind = EV_WAITING
            u = b
            v = -1
        elif good:
            bsc[B_WAITING] = -1
            kind = EV_GOOD
            u = w
            v = b
            adj[w, deg[w]] = b
            adj[b, deg[b]] = w
            for x in (w, b):
                dcount[deg[x]] -= 1
                deg[x] += 1
                dcount[deg[x]] += 1
                if deg[x] == d:
                    last = sc[S_UNSAT] - 1
                    q = pos[x]
                    y = unsat[last]
                    unsat[q] = y
                    pos[y] = q
                    unsat[last] = x
                    pos[x] = -1
                    sc[S_UNSAT] = last
                    bsc[B_BAD_UNSAT] -= bad_in_bin[x]
                    if balls[x] > d:
                        bsc[B_EXCESS] -= balls[x] - d
            sc[S_EDGES] += 1
            s = sc[S_EDGES]
            mindeg = sc[S_MINDEG]
            while mindeg < d and dcount[mindeg] == 0:
                if mindeg <= d - 2:
                    last_s[mindeg] = s - 1
                mindeg += 1
            sc[S_MINDEG] = mindeg
            bsc[B_MFIRST] = m
            n_unsat = sc[S_UNSAT]
            if n_unsat <= d and count_allowed(deg, adj, unsat, n_unsat) == 0:
                bsc[B_DONE] = 1
                r = t_index[N - s]
                if r >= 0:
                    fill_bin_row(t_rows[r], m, m, m, n, d, deg, adj, unsat, dcount, sc, ycount, bsc)
                    t_reached[r] = True
                    violations += l_to_s_violations(n, d, ycount, sc, bsc)
                elif check:
                    violations += l_to_s_violations(n, d, ycount, sc, bsc)
        else:
            bsc[B_WAITING] = -1
            kind = EV_BAD
            u = w
            v = b
            bsc[B_BAD] += 2
            bsc[B_BAD_UNSAT] += 2
            bad_in_bin[w] += 1
            bad_in_bin[b] += 1
            wt[t] += 1
        p = bsc[B_MPTR]
        while p < n_m and m_list[p] <= m:
            fill_bin_row(m_rows[p], m_list[p], -1, -1, n, d, deg, adj, unsat, dcount, sc, ycount, bsc)
            m_reached[p] = True
            p += 1
        bsc[B_MPTR] = p
        if check:
            violations += ball_violations(n, d, dcount, ycount, sc, bsc)
            violations += count_bound_violations(n, d, deg, unsat, pos, dcount, sc)
    return events, kind, u, v, violations


@njit(cache=True)
def start_rows(n, d, t_index, t_rows, t_reached, m_list, m_rows, m_reached,
               deg, adj, unsat, dcount, sc, ycount, bsc):
    # m = 0 rows are filled before any ball
    p = 0
    while p < len(m_list) and m_list[p] <= 0:
        fill_bin_row(m_rows[p], m_list[p], -1, -1, n, d, deg, adj, unsat, dcount, sc, ycount, bsc)
        m_reached[p] = True
        p += 1
    bsc[B_MPTR] = p


@njit(cache=True)
def run_bin_kernel(n, d, mode, rng, seed,
                   deg, adj, unsat, pos, dcount, sc, last_s,
                   balls, bad_in_bin, ycount, bsc, wt,
                   t_index, t_rows, t_reached, m_list, m_rows, m_reached, check):
    """Run one trial from scratch to termination on reusable buffers."""
    seed_into(rng, seed)
    reset_arrays(n, d, deg, adj, unsat, pos, dcount, sc)
    reset_bin_arrays(n, balls, bad_in_bin, ycount, bsc, wt)
    last_s[:] = -1
    start_rows(n, d, t_index, t_rows, t_reached, m_list, m_rows, m_reached,
               deg, adj, unsat, dcount, sc, ycount, bsc)
    _, _, _, _, violations = advance_bins(
        n, d, mode, rng, deg, adj, unsat, pos, dcount, sc, last_s,
        balls, bad_in_bin, ycount, bsc, wt,
        np.iinfo(np.int64).max, t_index, t_rows, t_reached, m_list, m_rows, m_reached, check)
    final_s = sc[S_EDGES]
    for j in range(d - 1):
        if last_s[j] < 0:
            last_s[j] = final_s
    if check:
        violations += count_structure_violations(n, d, deg, adj, unsat, pos, sc)
        violations += count_stuck_violations(d, deg, adj, unsat, sc)
        violations += full_bin_violations(n, d, deg, balls, bad_in_bin, ycount, bsc)
        violations += ball_violations(n, d, dcount, ycount, sc, bsc)
    return violations


@njit(cache=True)
def bin_terminal_codes(n, d, mode, seeds):
    """Terminal edge-set codes of the bin-graph process for tiny instances."""
    out = np.empty(len(seeds), dtype=np.int64)
    deg, adj, unsat, pos, dcount, sc = new_arrays(n, d)
    balls, bad_in_bin, ycount, bsc, wt = new_bin_arrays(n, d)
    last_s = np.empty(d - 1, dtype=np.int64)
    N = (d * n) // 2
    t_index = np.full(N + 1, -1, dtype=np.int64)
    width = C_DEG + d + 1 + 7 + d + 1
    t_rows = np.zeros((0, width), dtype=np.int64)
    t_reached = np.zeros(0, dtype=np.bool_)
    m_list = np.zeros(0, dtype=np.int64)
    m_rows = np.zeros((0, width), dtype=np.int64)
    m_reached = np.zeros(0, dtype=np.bool_)
    rng = np.empty(4, dtype=np.uint64)
    for k in range(len(seeds)):
        run_bin_kernel(n, d, mode, rng, seeds[k], deg, adj, unsat, pos, dcount, sc, last_s,
                       balls, bad_in_bin, ycount, bsc, wt,
                       t_index, t_rows, t_reached, m_list, m_rows, m_reached, False)
        out[k] = edge_code(n, deg, adj)
    return out


# ----------------------------------------------------------- Python layer


@dataclass(frozen=True)
class Unnumbered:
    bin: int


@dataclass(frozen=True)
class Waiting:
    bin: int


@dataclass(frozen=True)
class GoodPair:
    u: int
    v: int


@dataclass(frozen=True)
class BadPair:
    u: int
    v: int


def _event(kind, u, v):
    if kind == EV_UNNUMBERED:
        return Unnumbered(int(u))
    if kind == EV_WAITING:
        return Waiting(int(u))
    if kind == EV_GOOD:
        return GoodPair(int(u), int(v))
    return BadPair(int(u), int(v))


def mode_code(mode):
    try:
        return MODES[mode]
    except KeyError:
        raise ValueError(f"unknown mode {mode!r}; expected one of {sorted(MODES)}") from None


class BinState:
    """Mutable state of one bin d-process run (single owner).

    ``drop_ball`` and ``accelerated_step`` may be mixed; ``run_bins`` uses
    the mode given at construction.
    """

    def __init__(self, n, d, seed=0, mode="accelerated"):
        validate_size(n, d)
        self.n = int(n)
        self.d = int(d)
        self.mode = mode
        self._mode = mode_code(mode)
        self.N = max_edges(self.n, self.d)
        self.seed = as_seed(seed)
        self.rng = seed_state(np.uint64(self.seed))
        (self.deg, self.adj, self.unsat, self.pos,
         self.dcount, self.sc) = new_arrays(self.n, self.d)
        self.balls, self.bad_in_bin, self.ycount, self.bsc, self.wt = new_bin_arrays(self.n, self.d)
        self.last_s = np.full(self.d - 1, -1, dtype=np.int64)
        width = row_width(self.d)
        self._no_t = np.full(self.N + 1, -1, dtype=np.int64)
        self._no_rows = np.zeros((0, width), dtype=np.int64)
        self._no_reached = np.zeros(0, dtype=np.bool_)
        self._no_m = np.zeros(0, dtype=np.int64)

    def reset(self, seed):
        self.seed = as_seed(seed)
        seed_into(self.rng, np.uint64(self.seed))
        reset_arrays(self.n, self.d, self.deg, self.adj, self.unsat, self.pos, self.dcount, self.sc)
        reset_bin_arrays(self.n, self.balls, self.bad_in_bin, self.ycount, self.bsc, self.wt)
        self.last_s[:] = -1

    # counters
    @property
    def m(self):
        return int(self.bsc[B_M])

    @property
    def s(self):
        return int(self.sc[S_EDGES])

    @property
    def deficit(self):
        return self.N - self.s

    @property
    def numbered(self):
        return int(self.bsc[B_NUMBERED])

    @property
    def unnumbered(self):
        return int(self.bsc[B_UNNUMBERED])

    @property
    def good(self):
        return 2 * self.s

    @property
    def bad(self):
        return int(self.bsc[B_BAD])

    @property
    def bad_in_unsaturated(self):
        return int(self.bsc[B_BAD_UNSAT])

    @property
    def waiting(self):
        w = int(self.bsc[B_WAITING])
        return None if w < 0 else w

    @property
    def terminated(self):
        return bool(self.bsc[B_DONE])

    @property
    def unsaturated_count(self):
        return int(self.sc[S_UNSAT])

    @property
    def last_skip(self):
        return int(self.bsc[B_SKIP])

    def ball_counts(self):
        return [int(x) for x in self.balls]

    def good_counts(self):
        return [int(x) for x in self.deg]

    def degree_counts(self):
        return [int(x) for x in self.dcount]

    def edges(self):
        return sorted(
            (u, int(v)) for u in range(self.n) for v in self.adj[u, : self.deg[u]] if u < v
        )

    def per_deficit_bad(self):
        """W_t as a sparse map deficit -> bad pairs created at that deficit."""
        nz = np.nonzero(self.wt)[0]
        return {int(t): int(self.wt[t]) for t in nz}

    def y_counts(self):
        """Y_0..Y_{d-1} followed by the number of bins with at least d balls."""
        return [int(x) for x in self.ycount]

    def l_of_m(self):
        """L(m) = dn/2 - (1/2) sum_{i<d} (d-i) Y_i, as an exact half-integer."""
        from fractions import Fraction

        two_l = self.d * self.n - sum((self.d - i) * int(self.ycount[i]) for i in range(self.d))
        return Fraction(two_l, 2)

    def _advance(self, mode):
        if self.terminated:
            raise ValueError("the bin process has terminated")
        _, kind, u, v, _ = advance_bins(
            self.n, self.d, mode, self.rng,
            self.deg, self.adj, self.unsat, self.pos, self.dcount, self.sc, self.last_s,
            self.balls, self.bad_in_bin, self.ycount, self.bsc, self.wt,
            1, self._no_t, self._no_rows, self._no_reached, self._no_m, self._no_rows,
            self._no_reached, False)
        return _event(kind, u, v)

    def drop_ball(self):
        return self._advance(FAITHFUL)

    def accelerated_step(self):
        return self._advance(ACCELERATED)

    def run_bins(self, checkpoints_m=(), checkpoints_t=(), check=False, trial=0):
        """Run a fresh state to termination and return a :class:`TrajectoryRecord`."""
        if self.m != 0:
            raise ValueError("run_bins() expects a fresh state")
        for m in checkpoints_m:
            if m < 0:
                raise ValueError(f"ball-count checkpoint {m} is negative")
        for t in checkpoints_t:
            if not 0 <= t <= self.N:
                raise ValueError(f"deficit checkpoint {t} outside [0, {self.N}]")
        width = row_width(self.d)
        t_vals = sorted(set(int(t) for t in checkpoints_t))
        t_index = np.full(self.N + 1, -1, dtype=np.int64)
        for r, t in enumerate(t_vals):
            t_index[t] = r
        t_rows = np.zeros((len(t_vals), width), dtype=np.int64)
        t_reached = np.zeros(len(t_vals), dtype=np.bool_)
        m_vals = sorted(set(int(m) for m in checkpoints_m))
        m_list = np.array(m_vals, dtype=np.int64)
        m_rows = np.zeros((len(m_vals), width), dtype=np.int64)
        m_reached = np.zeros(len(m_vals), dtype=np.bool_)
        violations = run_bin_kernel(
            self.n, self.d, self._mode, self.rng, np.uint64(self.seed),
            self.deg, self.adj, self.unsat, self.pos, self.dcount, self.sc, self.last_s,
            self.balls, self.bad_in_bin, self.ycount, self.bsc, self.wt,
            t_index, t_rows, t_reached, m_list, m_rows, m_reached, check)
        rows = []
        for r, t in enumerate(t_vals):
            rows.append(bin_row("t", t, self.N, t_rows[r], bool(t_reached[r]), self.d))
        for r, m in enumerate(m_vals):
            rows.append(bin_row("m", m, self.N, m_rows[r], bool(m_reached[r]), self.d))
        rows.sort(key=lambda row: (row.kind, row.m if row.kind == "m" else -row.t))
        saturated, low = saturated_from_degrees(self.deg, self.d)
        return TrajectoryRecord(
            trial=trial,
            seed=self.seed,
            process="bin",
            mode=self.mode,
            n=self.n,
            d=self.d,
            final_edges=self.s,
            saturated=saturated,
            unsaturated_degrees=list(low),
            checkpoints=rows,
            last_times=[int(x) for x in self.last_s],
            bad_final=self.bad,
            m_final=self.m,
            bad_pairs_by_deficit=self.per_deficit_bad(),
            violations=int(violations),
            clipped_snapshots=int(self.bsc[B_CLIPPED]) if check else None,
        )


def bin_row(kind, value, N, row, reached, d):
    if not reached:
        if kind == "t":
            return CheckpointRow(kind="t", s=N - value, t=value, reached=False)
        return CheckpointRow(kind="m", s=-1, t=-1, reached=False, m=value)
    o = _bin_offset(d)
    s = int(row[0])

    def opt(x):
        return None if x < 0 else int(x)

    return CheckpointRow(
        kind=kind,
        s=s,
        t=N - s,
        reached=True,
        degree_counts=[int(x) for x in row[C_DEG: C_DEG + d + 1]],
        unsaturated=int(row[1]),
        unsaturated_edges=int(row[2]),
        critical_edges=int(row[3]),
        critical_vertices=int(row[4]),
        m=int(row[o]),
        m_first=opt(row[o + 1]),
        m_last=opt(row[o + 2]),
        y_counts=[int(x) for x in row[o + 7: o + 8 + d]],
        bad=int(row[o + 3]),
        bad_unsaturated=int(row[o + 4]),
        waiting=int(row[o + 5]),
        clip_excess=int(row[o + 6]),
    )


def new(n, d, seed=0, mode="accelerated"):
    return BinState(n, d, seed, mode)


def reference_bins(n, d, seed, mode="faithful"):
    """Slow pure-Python bin process with an explicit set of used bin pairs.

    Consumes the stream exactly as the kernel does, so for a given seed it
    must reproduce the kernel's trajectory. Returns (edges in order, events).
    """
    rng = Xoshiro256(seed)
    good = [0] * n
    unsat = list(range(n))
    pos = list(range(n))
    used = set()
    edges = []
    events = []
    waiting = None
    while True:
        if mode == "accelerated":
            u_count = len(unsat)
            x = rng.uniform()
            p = u_count / n
            skip = 0 if p >= 1.0 else int(np.floor(np.log1p(-x) / np.log1p(-p)))
            for _ in range(skip):
                events.append(("unnumbered", None))
            b = unsat[rng.randbelow(u_count)]
        else:
            b = rng.randbelow(n)
            if good[b] == d:
                events.append(("unnumbered", b))
                continue
        if waiting is None:
            waiting = b
            events.append(("waiting", b))
            continue
        key = (min(waiting, b), max(waiting, b))
        is_good = waiting != b and key not in used
        if waiting != b:
            used.add(key)
        if not is_good:
            events.append(("bad", (waiting, b)))
            waiting = None
            continue
        events.append(("good", (waiting, b)))
        edges.append(key)
        for x in (waiting, b):
            good[x] += 1
            if good[x] == d:
                i = pos[x]
                y = unsat[-1]
                unsat[i] = y
                pos[y] = i
                unsat.pop()
                pos[x] = -1
        waiting = None
        if len(unsat) <= d:
            adj = set(edges)
            free = [
                (a, c) for i, a in enumerate(unsat) for c in unsat[i + 1:]
                if (min(a, c), max(a, c)) not in adj
            ]
            if not free:
                return edges, events
