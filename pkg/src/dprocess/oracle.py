"""Exact trajectory laws of the graph d-process on tiny vertex sets.

States are labeled graphs encoded as bitmasks over the n(n-1)/2 vertex
pairs. Every step adds exactly one edge, so the reachable states split into
levels by edge count and one forward sweep over the levels carries the
exact probability of every state (rational arithmetic throughout). A state
with no allowed pair is terminal and keeps its mass at its own level.
"""

import json
from fractions import Fraction
from itertools import combinations

from .graph_process import pair_index, saturated_from_degrees, validate_size

DEFAULT_STATE_BUDGET = 10 ** 7


class StateBudgetExceeded(RuntimeError):
    """Raised when the reachable state space outgrows the configured budget."""


class ExactDistribution:
    """Exact probability mass over edge-set codes (or degree-count tuples).

    ``step`` is an edge count or ``"terminal"``. ``reach`` is the probability
    that the process reaches ``step`` (1 for terminal laws); ``entries`` is
    conditional on reaching it and sums to exactly 1.
    """

    def __init__(self, n, d, step, entries, reach=Fraction(1), keys="graph"):
        self.n = n
        self.d = d
        self.step = step
        self.entries = dict(entries)
        self.reach = Fraction(reach)
        self.keys = keys

    def __repr__(self):
        return f"ExactDistribution(n={self.n}, d={self.d}, step={self.step!r}, size={len(self.entries)})"

    def total(self):
        return sum(self.entries.values(), Fraction(0))

    def edges(self, code):
        return [(u, v) for u, v in combinations(range(self.n), 2) if code >> pair_index(u, v, self.n) & 1]

    def to_json(self):
        out = {
            "n": self.n,
            "d": self.d,
            "step": self.step,
            "reach": [str(self.reach.numerator), str(self.reach.denominator)],
            "entries": [],
        }
        for key, p in sorted(self.entries.items()):
            item = {"probability": [str(p.numerator), str(p.denominator)], "decimal": float(p)}
            if self.keys == "graph":
                item["edges"] = self.edges(key)
                item["code"] = key
            else:
                item["degree_counts"] = list(key)
            out["entries"].append(item)
        return json.dumps(out, indent=1)


class _Space:
    """Pair bookkeeping for one (n, d)."""

    def __init__(self, n, d):
        self.n = n
        self.d = d
        self.pairs = list(combinations(range(n), 2))
        self.bits = [1 << pair_index(u, v, n) for u, v in self.pairs]

    def degrees(self, code):
        deg = [0] * self.n
        for (u, v), b in zip(self.pairs, self.bits):
            if code & b:
                deg[u] += 1
                deg[v] += 1
        return deg

    def allowed(self, code):
        deg = self.degrees(code)
        return [
            b for (u, v), b in zip(self.pairs, self.bits)
            if not code & b and deg[u] < self.d and deg[v] < self.d
        ]

    def degree_counts(self, code):
        counts = [0] * (self.d + 1)
        for x in self.degrees(code):
            counts[x] += 1
        return tuple(counts)


def _levels(n, d, budget, stop=None):
    """Yield (s, live states, terminal states) level by level."""
    validate_size(n, d)
    space = _Space(n, d)
    level = {0: Fraction(1)}
    seen = 1
    s = 0
    while level:
        live = {}
        terminal = {}
        nxt = {}
        for code, p in level.items():
            moves = space.allowed(code)
            if not moves:
                terminal[code] = p
                continue
            live[code] = p
            if stop is not None and s >= stop:
                continue
            share = p / len(moves)
            for b in moves:
                c = code | b
                nxt[c] = nxt.get(c, 0) + share
        yield s, live, terminal, space
        if stop is not None and s >= stop:
            return
        seen += len(nxt)
        if seen > budget:
            raise StateBudgetExceeded(
                f"more than {budget} states for n={n}, d={d}; raise the budget or shrink the instance"
            )
        level = nxt
        s += 1


def exact_outcome_distribution(n, d, budget=DEFAULT_STATE_BUDGET):
    """Exact law of the terminal graph."""
    out = {}
    for _, _, terminal, _ in _levels(n, d, budget):
        out.update(terminal)
    return ExactDistribution(n, d, "terminal", out)


def exact_nonsaturation_probability(n, d, budget=DEFAULT_STATE_BUDGET):
    dist = exact_outcome_distribution(n, d, budget)
    space = _Space(n, d)
    total = Fraction(0)
    for code, p in dist.entries.items():
        saturated, _ = saturated_from_degrees(space.degrees(code), d)
        if not saturated:
            total += p
    return total


def exact_state_distribution(n, d, s, budget=DEFAULT_STATE_BUDGET):
    """Exact law of the graph after s edges, conditioned on reaching s."""
    if s < 0 or s > (d * n) // 2:
        raise ValueError(f"s must lie in [0, {(d * n) // 2}], got {s}")
    for level, live, terminal, _ in _levels(n, d, budget, stop=s):
        if level == s:
            mass = dict(live)
            mass.update(terminal)
            reach = sum(mass.values(), Fraction(0))
            return ExactDistribution(n, d, s, {c: p / reach for c, p in mass.items()}, reach)
    return ExactDistribution(n, d, s, {}, Fraction(0))


def exact_degree_count_distribution(n, d, s, budget=DEFAULT_STATE_BUDGET):
    """Exact law of (D_0, ..., D_d) at s edges, conditioned on reaching s."""
    graphs = exact_state_distribution(n, d, s, budget)
    space = _Space(n, d)
    out = {}
    for code, p in graphs.entries.items():
        key = space.degree_counts(code)
        out[key] = out.get(key, 0) + p
    return ExactDistribution(n, d, s, out, graphs.reach, keys="degree_counts")


def terminal_classes(n, d, budget=DEFAULT_STATE_BUDGET):
    """Terminal codes with their exact probabilities, sorted by code."""
    dist = exact_outcome_distribution(n, d, budget)
    return sorted(dist.entries.items())
