"""Estimators for the acceptance experiments.

Everything here works on integer count maps so that partial results from
different workers can be merged in any order.
"""

import math
from collections import Counter

from .analytics import poisson_pmf

POISSON_TAIL = 1e-12


class EmpiricalPmf:
    """Counts per nonnegative integer value; mergeable."""

    def __init__(self, counts=None):
        self.counts = Counter()
        if counts:
            for k, c in dict(counts).items():
                if c:
                    self.counts[int(k)] += int(c)

    @classmethod
    def from_samples(cls, samples):
        return cls(Counter(int(x) for x in samples))

    @property
    def total(self):
        return sum(self.counts.values())

    def add(self, value, count=1):
        self.counts[int(value)] += count

    def merge(self, other):
        out = EmpiricalPmf(self.counts)
        out.counts.update(other.counts)
        return out

    def pmf(self):
        total = self.total
        if total == 0:
            raise ValueError("empty pmf")
        return {k: c / total for k, c in sorted(self.counts.items())}

    def mean(self):
        return factorial_moment_counts(self.counts, 1)

    def factorial_moment(self, k):
        return factorial_moment_counts(self.counts, k)

    def variance(self):
        total = self.total
        if total < 2:
            return 0.0
        mu = self.mean()
        return sum(c * (x - mu) ** 2 for x, c in self.counts.items()) / (total - 1)

    def to_dict(self):
        return {str(k): c for k, c in sorted(self.counts.items())}

    def __eq__(self, other):
        return isinstance(other, EmpiricalPmf) and +self.counts == +other.counts

    def __repr__(self):
        return f"EmpiricalPmf({dict(sorted(self.counts.items()))})"


def _falling(x, k):
    out = 1
    for r in range(k):
        out *= x - r
    return out


def factorial_moment_counts(counts, k):
    if k < 1 or int(k) != k:
        raise ValueError(f"k must be a positive integer, got {k}")
    total = sum(counts.values())
    if total == 0:
        raise ValueError("factorial moment of an empty sample")
    return math.fsum(c * _falling(int(x), k) for x, c in counts.items()) / total


def factorial_moment(samples, k):
    """Mean of [x]_k over the samples."""
    samples = list(samples)
    if not samples:
        raise ValueError("factorial moment of an empty sample")
    return factorial_moment_counts(Counter(samples), k)


class PoissonPmf:
    """Analytic Poisson law, usable wherever a pmf dict is expected."""

    def __init__(self, lam):
        self.lam = float(lam)

    def support(self, tail=POISSON_TAIL):
        """Values up to the point where the remaining upper mass drops below ``tail``."""
        out = {}
        acc = 0.0
        i = 0
        while True:
            p = poisson_pmf(self.lam, i)
            out[i] = p
            acc += p
            if 1.0 - acc < tail and i >= self.lam:
                return out, max(0.0, 1.0 - acc)
            i += 1


def _as_pmf(p):
    if isinstance(p, EmpiricalPmf):
        return p.pmf(), 0.0
    if isinstance(p, PoissonPmf):
        return p.support()
    return {int(k): float(v) for k, v in dict(p).items()}, 0.0


def tv_distance(p, q):
    """Half the L1 distance over the union support.

    Poisson laws are truncated once the upper tail mass falls below 1e-12;
    that remainder counts as a single extra term.
    """
    pp, p_rest = _as_pmf(p)
    qq, q_rest = _as_pmf(q)
    keys = set(pp) | set(qq)
    total = math.fsum(abs(pp.get(k, 0.0) - qq.get(k, 0.0)) for k in keys)
    total += abs(p_rest - q_rest)
    return min(1.0, 0.5 * total)


def chi_square(observed, lam, min_expected=5.0):
    """Pearson statistic against Poisson(lam) with tail cells pooled.

    Secondary diagnostic only. Returns (statistic, degrees of freedom).
    """
    total = observed.total
    cells = []
    obs_acc = 0
    exp_acc = 0.0
    i = 0
    mass = 0.0
    while mass < 1.0 - 1e-12 or i <= max(observed.counts, default=0):
        p = poisson_pmf(lam, i)
        mass += p
        obs_acc += observed.counts.get(i, 0)
        exp_acc += p * total
        if exp_acc >= min_expected:
            cells.append([obs_acc, exp_acc])
            obs_acc, exp_acc = 0, 0.0
        i += 1
    rest = total - sum(c[0] for c in cells)
    rest_exp = total - sum(c[1] for c in cells)
    if cells and rest_exp < min_expected:
        cells[-1][0] += rest
        cells[-1][1] += rest_exp
    else:
        cells.append([rest, rest_exp])
    stat = math.fsum((o - e) ** 2 / e for o, e in cells if e > 0)
    return stat, max(len(cells) - 2, 0)


def wilson_interval(successes, trials, z=1.96):
    if trials < 1 or not 0 <= successes <= trials:
        raise ValueError(f"need 0 <= successes <= trials and trials >= 1, got {successes}/{trials}")
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == trials else min(1.0, centre + half)
    return lo, hi


def window_coverage(samples, center, halfwidth):
    """Fraction of samples in [center - halfwidth, center + halfwidth]."""
    if halfwidth < 0:
        raise ValueError("halfwidth must be >= 0")
    samples = list(samples)
    if not samples:
        raise ValueError("window coverage of an empty sample")
    hit = sum(1 for x in samples if abs(x - center) <= halfwidth)
    return hit / len(samples)


def binomial_sigma(p, trials):
    return math.sqrt(p * (1 - p) / trials)


class RunningStats:
    """Count, mean and M2 with the pairwise merge rule."""

    def __init__(self, count=0, mean=0.0, m2=0.0):
        self.count = count
        self.mean = mean
        self.m2 = m2

    def push(self, x):
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (x - self.mean)

    def merge(self, other):
        if other.count == 0:
            return RunningStats(self.count, self.mean, self.m2)
        if self.count == 0:
            return RunningStats(other.count, other.mean, other.m2)
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / n
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / n
        return RunningStats(n, mean, m2)

    @property
    def variance(self):
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0
