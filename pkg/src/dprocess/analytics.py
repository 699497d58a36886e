"""Closed-form predictions for the d-process.

With mu = x/n, beta_i(x) = n mu^i e^-mu / i! approximates the number of bins
holding i balls after x balls, and

    ell(x) = dn/2 - 1/2 sum_{i<d} (d - i) beta_i(x)

approximates the number of edges present after x balls. ell is strictly
increasing with ell'(x) = tau(x) / 2n, tau = sum_{i<d} beta_i, so it has an
inverse on [0, dn/2). Near the end of the process the number of vertices of
degree j at deficit t is close to Poisson with mean

    f_j(d, t, n) = 2 [d-1]_{d-1-j} t / log^{d-1-j} n.

All logs are natural.
"""

import math

LOG_SPACE_MU = 700.0


def falling_factorial(x, k):
    """[x]_k = x (x-1) ... (x-k+1); [x]_0 = 1."""
    if k < 0 or int(k) != k:
        raise ValueError(f"k must be a nonnegative integer, got {k}")
    out = 1.0 if isinstance(x, float) else 1
    for r in range(int(k)):
        out *= x - r
    return out


def poisson_pmf(lam, i):
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    if i < 0:
        return 0.0
    if lam == 0:
        return 1.0 if i == 0 else 0.0
    return math.exp(i * math.log(lam) - lam - math.lgamma(i + 1))


def poisson_upper_tail(lam, k):
    """Pr(Poisson(lam) > k), summed directly when the tail is small."""
    if lam == 0:
        return 0.0
    if lam > k + 1:
        return max(0.0, 1.0 - math.fsum(poisson_pmf(lam, i) for i in range(k + 1)))
    terms = []
    i = k + 1
    term = poisson_pmf(lam, i)
    while term > 0 and (not terms or term > 1e-18 * terms[0]):
        terms.append(term)
        i += 1
        term *= lam / i
    return math.fsum(terms)


def truncated_poisson_pmf(d, lam, i):
    """Law of Z_d(lambda): Poisson below d, all remaining mass at d."""
    if not 0 <= i <= d:
        return 0.0
    if i < d:
        return poisson_pmf(lam, i)
    # complement rather than summing the infinite tail
    return max(0.0, 1.0 - math.fsum(poisson_pmf(lam, k) for k in range(d)))


def truncated_poisson_vector(d, lam):
    return [truncated_poisson_pmf(d, lam, i) for i in range(d + 1)]


class AnalyticModel:
    """Predictions for a fixed (n, d)."""

    def __init__(self, n, d):
        if n < 1 or int(n) != n:
            raise ValueError(f"n must be a positive integer, got {n}")
        if d < 2 or int(d) != d:
            raise ValueError(f"d must be an integer >= 2, got {d}")
        self.n = int(n)
        self.d = int(d)
        self.log_n = math.log(self.n)
        self.half_total = self.d * self.n / 2.0

    def __repr__(self):
        return f"AnalyticModel(n={self.n}, d={self.d})"

    def beta(self, x, i):
        if x < 0:
            raise ValueError(f"x must be >= 0, got {x}")
        if not 0 <= i < self.d:
            raise ValueError(f"i must lie in [0, {self.d - 1}], got {i}")
        mu = x / self.n
        if mu == 0:
            return float(self.n) if i == 0 else 0.0
        if mu > LOG_SPACE_MU:
            lg = math.log(self.n) + i * math.log(mu) - mu - math.lgamma(i + 1)
            # math.exp underflows to exactly 0.0 below the representable range
            return math.exp(lg)
        return self.n * mu ** i * math.exp(-mu) / math.factorial(i)

    def betas(self, x):
        return [self.beta(x, i) for i in range(self.d)]

    def tau(self, x):
        return math.fsum(self.betas(x))

    def ell(self, x):
        # n/2 E[min(Z, d)] = n/2 sum_{k<d} Pr(Z > k): same value as the defining
        # formula, without its cancellation at small x
        if x < 0:
            raise ValueError(f"x must be >= 0, got {x}")
        mu = x / self.n
        return 0.5 * self.n * math.fsum(poisson_upper_tail(mu, k) for k in range(self.d))

    def ell_prime(self, x):
        return self.tau(x) / (2 * self.n)

    def ell_inverse(self, s, max_iter=200):
        """x with ell(x) = s, by bracket doubling from [0, n] then bisection."""
        if s < 0 or s >= self.half_total:
            raise ValueError(f"s must lie in [0, {self.half_total}), got {s}")
        if s == 0:
            return 0.0
        tol = 1e-13 * s
        lo, hi = 0.0, float(self.n)
        while self.ell(hi) < s:
            lo, hi = hi, 2 * hi
            if math.isinf(hi):
                raise ArithmeticError(f"no bracket found for s={s}")
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            val = self.ell(mid)
            if abs(val - s) <= tol:
                return mid
            if val < s:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-15 * hi:
                break
        return 0.5 * (lo + hi)

    def f(self, t, j):
        """Poisson mean of D_j at deficit t."""
        if not 0 <= j <= self.d - 2:
            raise ValueError(f"j must lie in [0, {self.d - 2}], got {j}")
        k = self.d - 1 - j
        return 2 * falling_factorial(self.d - 1, k) * t / self.log_n ** k

    def degree_law(self, s):
        """Per-vertex truncated Poisson law at s edges, lambda = ell^-1(s)/n."""
        lam = self.ell_inverse(s) / self.n
        return lam, truncated_poisson_vector(self.d, lam)

    def expected_degree_counts(self, s):
        """beta_j(ell^-1(s)) for j < d: predicted D_j at s edges."""
        return self.betas(self.ell_inverse(s))

    def survival(self, t, j):
        """Predicted Pr(S_j < N - t) = exp(-f_j)."""
        return math.exp(-self.f(t, j))

    def nonsaturation_scale(self):
        """Leading term of Pr(F): (d-1)/log n when dn is even, and
        (d-1)(d-2)/log^2 n when dn is odd. Returns (parity, value)."""
        if (self.d * self.n) % 2 == 0:
            return "even", (self.d - 1) / self.log_n
        return "odd", (self.d - 1) * (self.d - 2) / self.log_n ** 2
