"""Direct simulator of the graph d-process.

Starting from the empty graph on ``n`` vertices, each step adds an edge
chosen uniformly among the unused pairs whose endpoints both have degree
below ``d``. The process stops when no such pair is left.

Hot loops live in numba kernels operating on plain arrays; the
:class:`GraphProcessState` class owns those arrays and exposes the
step-level and run-level operations.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .records import CheckpointRow, TrajectoryRecord
from .rng import as_seed, randbelow, seed_into, seed_state

# slots of the int64 scalar array shared by graph and bin kernels
S_EDGES = 0
S_UNSAT = 1
S_MINDEG = 2
N_GRAPH_SCALARS = 3

# graph checkpoint row layout; degree counts D_0..D_d follow
C_S = 0
C_U = 1
C_UNSAT_EDGES = 2
C_CRIT_EDGES = 3
C_CRIT_VERTICES = 4
C_DEG = 5


def max_edges(n, d):
    return (d * n) // 2


def validate_size(n, d):
    if int(n) != n or int(d) != d:
        raise TypeError("n and d must be integers")
    if d < 2:
        raise ValueError(f"degree cap d must be >= 2, got {d}")
    if n < 2:
        raise ValueError(f"vertex count n must be >= 2, got {n}")


def pair_index(u, v, n):
    """Bit position of the unordered pair {u, v} in an edge-set code."""
    if u > v:
        u, v = v, u
    return u * (2 * n - u - 1) // 2 + (v - u - 1)


def edges_from_code(code, n):
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if code >> pair_index(u, v, n) & 1:
                edges.append((u, v))
    return edges


def code_from_edges(edges, n):
    code = 0
    for u, v in edges:
        code |= 1 << pair_index(u, v, n)
    return code


# ---------------------------------------------------------------- kernels


@njit(cache=True)
def new_arrays(n, d):
    deg = np.empty(n, dtype=np.int32)
    adj = np.empty((n, d), dtype=np.int32)
    unsat = np.empty(n, dtype=np.int32)
    pos = np.empty(n, dtype=np.int32)
    dcount = np.empty(d + 1, dtype=np.int64)
    sc = np.empty(N_GRAPH_SCALARS, dtype=np.int64)
    reset_arrays(n, d, deg, adj, unsat, pos, dcount, sc)
    return deg, adj, unsat, pos, dcount, sc


@njit(cache=True)
def reset_arrays(n, d, deg, adj, unsat, pos, dcount, sc):
    # buffers are reused across trials: fresh allocations page-fault heavily
    for u in range(n):
        deg[u] = 0
        unsat[u] = u
        pos[u] = u
        for k in range(d):
            adj[u, k] = -1
    dcount[:] = 0
    dcount[0] = n
    sc[:] = 0
    sc[S_UNSAT] = n


@njit(cache=True)
def adjacent(deg, adj, u, v):
    for k in range(deg[u]):
        if adj[u, k] == v:
            return True
    return False


@njit(cache=True)
def add_edge(u, v, d, deg, adj, unsat, pos, dcount, sc):
    """Insert one edge (cold path; the sampler inlines the same update)."""
    adj[u, deg[u]] = v
    adj[v, deg[v]] = u
    for w in (u, v):
        dcount[deg[w]] -= 1
        deg[w] += 1
        dcount[deg[w]] += 1
        if deg[w] == d:
            last = sc[S_UNSAT] - 1
            i = pos[w]
            x = unsat[last]
            unsat[i] = x
            pos[x] = i
            unsat[last] = w
            pos[w] = -1
            sc[S_UNSAT] = last
    sc[S_EDGES] += 1
    while sc[S_MINDEG] < d and dcount[sc[S_MINDEG]] == 0:
        sc[S_MINDEG] += 1


@njit(cache=True)
def count_allowed(deg, adj, unsat, n_unsat):
    c = 0
    for a in range(n_unsat):
        u = unsat[a]
        for b in range(a + 1, n_unsat):
            if not adjacent(deg, adj, u, unsat[b]):
                c += 1
    return c


@njit(cache=True)
def nth_allowed(deg, adj, unsat, n_unsat, r):
    c = 0
    for a in range(n_unsat):
        u = unsat[a]
        for b in range(a + 1, n_unsat):
            v = unsat[b]
            if not adjacent(deg, adj, u, v):
                if c == r:
                    return u, v
                c += 1
    return -1, -1


@njit(cache=True)
def is_stuck(d, deg, adj, unsat, sc):
    n_unsat = sc[S_UNSAT]
    if n_unsat > d:
        return False
    return count_allowed(deg, adj, unsat, n_unsat) == 0


@njit(cache=True)
def enumerated_pair(rng, deg, adj, unsat, n_unsat):
    """Uniform allowed pair by enumeration, or (-1, -1) when stuck."""
    k = count_allowed(deg, adj, unsat, n_unsat)
    if k == 0:
        return -1, -1
    return nth_allowed(deg, adj, unsat, n_unsat, randbelow(rng, k))


@njit(cache=True)
def edge_classes(d, deg, adj, unsat, n_unsat):
    """(unsaturated edges, critical edges) of the current graph."""
    ue = 0
    ce = 0
    for a in range(n_unsat):
        u = unsat[a]
        for k in range(deg[u]):
            v = adj[u, k]
            if u < v and deg[v] < d:
                ue += 1
                if deg[u] <= d - 2 or deg[v] <= d - 2:
                    ce += 1
    return ue, ce


@njit(cache=True)
def count_bound_violations(n, d, deg, unsat, pos, dcount, sc):
    """Step-level checks: degree cap, degree sum, unsaturated index, U bounds."""
    bad = 0
    s = sc[S_EDGES]
    n_unsat = sc[S_UNSAT]
    t = (d * n) // 2 - s
    if d * n_unsat < 2 * t or n_unsat > 2 * t + 1:
        bad += 1
    total = 0
    below = 0
    for i in range(d + 1):
        total += i * dcount[i]
        if i < d:
            below += dcount[i]
    if total != 2 * s or below != n_unsat or s > (d * n) // 2:
        bad += 1
    return bad


@njit(cache=True)
def count_structure_violations(n, d, deg, adj, unsat, pos, sc):
    """Full O(n d^2) scan: symmetry, loops, repeats, index consistency."""
    bad = 0
    for u in range(n):
        if deg[u] > d:
            bad += 1
            continue
        for k in range(deg[u]):
            v = adj[u, k]
            if v == u or not adjacent(deg, adj, v, u):
                bad += 1
            for k2 in range(k + 1, deg[u]):
                if adj[u, k2] == v:
                    bad += 1
        if deg[u] < d:
            p = pos[u]
            if p < 0 or p >= sc[S_UNSAT] or unsat[p] != u:
                bad += 1
        elif pos[u] != -1:
            bad += 1
    return bad


@njit(cache=True)
def count_stuck_violations(d, deg, adj, unsat, sc):
    n_unsat = sc[S_UNSAT]
    if n_unsat > d:
        return 1
    return count_allowed(deg, adj, unsat, n_unsat)


@njit(cache=True)
def fill_graph_row(row, n, d, deg, adj, unsat, dcount, sc):
    n_unsat = sc[S_UNSAT]
    ue, ce = edge_classes(d, deg, adj, unsat, n_unsat)
    row[C_S] = sc[S_EDGES]
    row[C_U] = n_unsat
    row[C_UNSAT_EDGES] = ue
    row[C_CRIT_EDGES] = ce
    crit = 0
    for i in range(d - 1):
        crit += dcount[i]
    row[C_CRIT_VERTICES] = crit
    for i in range(d + 1):
        row[C_DEG + i] = dcount[i]


@njit(cache=True)
def advance_graph(n, d, rng, deg, adj, unsat, pos, dcount, sc, last_s,
                  max_steps, ckpt_index, rows, reached, check):
    """Add up to ``max_steps`` edges; the whole hot path is inlined here.

    Pair sampling: with more than ``d`` unsaturated vertices an allowed
    pair always exists (the unsaturated subgraph has maximum degree below
    ``d``) and rejection over ordered slot pairs is exactly uniform on it;
    otherwise the allowed pairs are enumerated. ``ckpt_index[s]`` names the
    row of ``rows`` to fill once the graph has ``s`` edges (-1 for none).
    ``last_s[j]`` becomes the last edge count with minimum degree <= j.

    Returns (steps, u, v, stuck, violations) where (u, v) is the last edge.
    """
    steps = 0
    violations = 0
    stuck = False
    u = -1
    v = -1
    while steps < max_steps:
        n_unsat = sc[S_UNSAT]
        if n_unsat > d:
            while True:
                i = randbelow(rng, n_unsat)
                j = randbelow(rng, n_unsat)
                if i == j:
                    continue
                u = unsat[i]
                v = unsat[j]
                hit = False
                for k in range(deg[u]):
                    if adj[u, k] == v:
                        hit = True
                        break
                if not hit:
                    break
        else:
            u, v = enumerated_pair(rng, deg, adj, unsat, n_unsat)
            if u < 0:
                stuck = True
                break
        adj[u, deg[u]] = v
        adj[v, deg[v]] = u
        for w in (u, v):
            dcount[deg[w]] -= 1
            deg[w] += 1
            dcount[deg[w]] += 1
            if deg[w] == d:
                last = sc[S_UNSAT] - 1
                p = pos[w]
                x = unsat[last]
                unsat[p] = x
                pos[x] = p
                unsat[last] = w
                pos[w] = -1
                sc[S_UNSAT] = last
        sc[S_EDGES] += 1
        s = sc[S_EDGES]
        mindeg = sc[S_MINDEG]
        while mindeg < d and dcount[mindeg] == 0:
            if mindeg <= d - 2:
                last_s[mindeg] = s - 1
            mindeg += 1
        sc[S_MINDEG] = mindeg
        r = ckpt_index[s]
        if r >= 0:
            fill_graph_row(rows[r], n, d, deg, adj, unsat, dcount, sc)
            reached[r] = True
        if check:
            violations += count_bound_violations(n, d, deg, unsat, pos, dcount, sc)
        steps += 1
    return steps, u, v, stuck, violations


@njit(cache=True)
def run_graph_kernel(n, d, rng, seed, ckpt_index, n_ckpt, check,
                     deg, adj, unsat, pos, dcount, sc, last_s):
    """Run one trial to the end on reusable buffers.

    Returns (rows, reached, violations); the final graph and the last
    times are left in the buffers.
    """
    seed_into(rng, seed)
    reset_arrays(n, d, deg, adj, unsat, pos, dcount, sc)
    last_s[:] = -1
    rows = np.zeros((n_ckpt, C_DEG + d + 1), dtype=np.int64)
    reached = np.zeros(n_ckpt, dtype=np.bool_)
    r = ckpt_index[0]
    if r >= 0:
        fill_graph_row(rows[r], n, d, deg, adj, unsat, dcount, sc)
        reached[r] = True
    N = (d * n) // 2
    _, _, _, _, violations = advance_graph(
        n, d, rng, deg, adj, unsat, pos, dcount, sc, last_s,
        N + 1, ckpt_index, rows, reached, check)
    final_s = sc[S_EDGES]
    for j in range(d - 1):
        if last_s[j] < 0:
            last_s[j] = final_s
    if check:
        violations += count_bound_violations(n, d, deg, unsat, pos, dcount, sc)
        violations += count_structure_violations(n, d, deg, adj, unsat, pos, sc)
        violations += count_stuck_violations(d, deg, adj, unsat, sc)
    return rows, reached, violations


@njit(cache=True)
def edge_code(n, deg, adj):
    code = np.int64(0)
    for u in range(n):
        for k in range(deg[u]):
            v = adj[u, k]
            if u < v:
                code |= np.int64(1) << np.int64(u * (2 * n - u - 1) // 2 + (v - u - 1))
    return code


@njit(cache=True)
def graph_terminal_codes(n, d, seeds):
    """Terminal edge-set codes for a batch of tiny trials (n*(n-1)/2 <= 63)."""
    out = np.empty(len(seeds), dtype=np.int64)
    deg, adj, unsat, pos, dcount, sc = new_arrays(n, d)
    last_s = np.empty(d - 1, dtype=np.int64)
    N = (d * n) // 2
    no_ckpt = np.full(N + 1, -1, dtype=np.int64)
    rows = np.zeros((0, C_DEG + d + 1), dtype=np.int64)
    reached = np.zeros(0, dtype=np.bool_)
    rng = np.empty(4, dtype=np.uint64)
    for k in range(len(seeds)):
        seed_into(rng, seeds[k])
        reset_arrays(n, d, deg, adj, unsat, pos, dcount, sc)
        advance_graph(n, d, rng, deg, adj, unsat, pos, dcount, sc, last_s,
                      N + 1, no_ckpt, rows, reached, False)
        out[k] = edge_code(n, deg, adj)
    return out


# ----------------------------------------------------------- Python layer


@dataclass(frozen=True)
class AddedEdge:
    u: int
    v: int


@dataclass(frozen=True)
class Stuck:
    pass


STUCK = Stuck()


@dataclass(frozen=True)
class SaturationOutcome:
    saturated: bool
    unsaturated_degrees: tuple
    final_edges: int


def saturated_from_degrees(degrees, d):
    low = sorted(int(x) for x in degrees if x < d)
    return (not low) or low == [d - 1], tuple(low)


def merge_checkpoints(N, checkpoints_s=(), checkpoints_t=()):
    """Map requested edge counts and deficits onto an s-indexed lookup."""
    wanted = []
    for s in checkpoints_s:
        if not 0 <= s <= N:
            raise ValueError(f"edge-count checkpoint {s} outside [0, {N}]")
        wanted.append(("s", int(s), int(s)))
    for t in checkpoints_t:
        if not 0 <= t <= N:
            raise ValueError(f"deficit checkpoint {t} outside [0, {N}]")
        wanted.append(("t", int(t), N - int(t)))
    distinct = sorted({s for _, _, s in wanted})
    index = np.full(N + 1, -1, dtype=np.int64)
    for r, s in enumerate(distinct):
        index[s] = r
    return wanted, distinct, index


class GraphProcessState:
    """Mutable state of one d-process run.

    The state is single-owner: one worker mutates it at a time.
    """

    def __init__(self, n, d, seed=0):
        validate_size(n, d)
        self.n = int(n)
        self.d = int(d)
        self.seed = as_seed(seed)
        self.N = max_edges(self.n, self.d)
        self.rng = seed_state(np.uint64(self.seed))
        (self.deg, self.adj, self.unsat, self.pos,
         self.dcount, self.sc) = new_arrays(self.n, self.d)
        self.last_s = np.full(self.d - 1, -1, dtype=np.int64)
        self._no_ckpt = np.full(self.N + 1, -1, dtype=np.int64)
        self._no_rows = np.zeros((0, C_DEG + self.d + 1), dtype=np.int64)
        self._no_reached = np.zeros(0, dtype=np.bool_)

    def reset(self, seed):
        """Return to the empty graph with a new seed, reusing the buffers."""
        self.seed = as_seed(seed)
        seed_into(self.rng, np.uint64(self.seed))
        reset_arrays(self.n, self.d, self.deg, self.adj, self.unsat, self.pos, self.dcount, self.sc)
        self.last_s[:] = -1

    @property
    def s(self):
        return int(self.sc[S_EDGES])

    @property
    def deficit(self):
        return self.N - self.s

    @property
    def unsaturated_count(self):
        return int(self.sc[S_UNSAT])

    def unsaturated_vertices(self):
        return sorted(int(x) for x in self.unsat[: self.unsaturated_count])

    def neighbors(self, u):
        return {int(x) for x in self.adj[u, : self.deg[u]]}

    def has_edge(self, u, v):
        return bool(adjacent(self.deg, self.adj, u, v))

    def edges(self):
        return sorted(
            (u, int(v)) for u in range(self.n) for v in self.adj[u, : self.deg[u]] if u < v
        )

    def add_edge(self, u, v):
        """Insert a specific allowed edge; used to set up fixed configurations."""
        if u == v or self.has_edge(u, v) or self.deg[u] >= self.d or self.deg[v] >= self.d:
            raise ValueError(f"pair ({u}, {v}) is not allowed")
        add_edge(u, v, self.d, self.deg, self.adj, self.unsat, self.pos, self.dcount, self.sc)

    def step(self):
        steps, u, v, stuck, _ = advance_graph(
            self.n, self.d, self.rng, self.deg, self.adj, self.unsat, self.pos,
            self.dcount, self.sc, self.last_s, 1, self._no_ckpt,
            self._no_rows, self._no_reached, False)
        if stuck:
            return STUCK
        return AddedEdge(min(u, v), max(u, v))

    def is_stuck(self):
        return bool(is_stuck(self.d, self.deg, self.adj, self.unsat, self.sc))

    def degree_counts(self):
        return [int(x) for x in self.dcount]

    def edge_class_counts(self):
        """(unsaturated edges, critical edges, critical vertices)."""
        ue, ce = edge_classes(self.d, self.deg, self.adj, self.unsat, self.unsaturated_count)
        return int(ue), int(ce), int(self.dcount[: self.d - 1].sum())

    def classify_final(self):
        if not self.is_stuck():
            raise ValueError("classify_final called before the process is stuck")
        saturated, low = saturated_from_degrees(self.deg, self.d)
        return SaturationOutcome(saturated, low, self.s)

    def run(self, checkpoints_s=(), checkpoints_t=(), check=False, trial=0):
        """Run from a fresh start to the end and return a :class:`TrajectoryRecord`.

        Only valid on an untouched state; the kernel replays the state's seed.
        """
        if self.s != 0:
            raise ValueError("run() expects a fresh state")
        wanted, distinct, index = merge_checkpoints(self.N, checkpoints_s, checkpoints_t)
        rows, reached, violations = run_graph_kernel(
            self.n, self.d, self.rng, np.uint64(self.seed), index, len(distinct), check,
            self.deg, self.adj, self.unsat, self.pos, self.dcount, self.sc, self.last_s,
        )
        final_s = self.s
        saturated, low = saturated_from_degrees(self.deg, self.d)
        records = []
        for kind, value, s in wanted:
            r = index[s]
            records.append(graph_row(kind, value, self.N, rows[r], bool(reached[r]), self.d))
        records.sort(key=lambda row: (row.s, row.kind))
        return TrajectoryRecord(
            trial=trial,
            seed=self.seed,
            process="graph",
            mode=None,
            n=self.n,
            d=self.d,
            final_edges=int(final_s),
            saturated=saturated,
            unsaturated_degrees=list(low),
            checkpoints=records,
            last_times=[int(x) for x in self.last_s],
            violations=int(violations),
        )


def graph_row(kind, value, N, row, reached, d):
    s = N - value if kind == "t" else value
    if not reached:
        return CheckpointRow(kind=kind, s=s, t=N - s, reached=False)
    return CheckpointRow(
        kind=kind,
        s=int(row[C_S]),
        t=N - int(row[C_S]),
        reached=True,
        degree_counts=[int(x) for x in row[C_DEG: C_DEG + d + 1]],
        unsaturated=int(row[C_U]),
        unsaturated_edges=int(row[C_UNSAT_EDGES]),
        critical_edges=int(row[C_CRIT_EDGES]),
        critical_vertices=int(row[C_CRIT_VERTICES]),
    )


def new(n, d, seed=0):
    return GraphProcessState(n, d, seed)
