"""Seedable xoshiro256** stream usable from numba kernels.

Every trial owns a 4-word uint64 state array. States are expanded from a
64-bit seed with splitmix64, and per-trial seeds are derived from a base
seed with the same splitmix64 output function, so that trial ``i`` of an
experiment always receives the same stream regardless of how trials are
scheduled across workers.
"""

import numpy as np
from numba import njit

RNG_ALGORITHM = "xoshiro256**/splitmix64-seeded"

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

_GAMMA = np.uint64(GOLDEN_GAMMA)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_LOW32 = np.uint64(0xFFFFFFFF)
_TWO32 = np.uint64(1 << 32)
_DOUBLE_UNIT = 1.0 / 9007199254740992.0  # 2**-53


def _mix64_py(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def trial_seed(base_seed, index):
    """Seed of trial ``index``: the ``index``-th splitmix64 output of ``base_seed``."""
    z = (int(base_seed) + (int(index) + 1) * GOLDEN_GAMMA) & MASK64
    return _mix64_py(z)


def trial_seeds(base_seed, start, stop):
    return np.array([trial_seed(base_seed, i) for i in range(start, stop)], dtype=np.uint64)


def as_seed(seed):
    """Reduce any Python int to the 64-bit seed space."""
    return int(seed) & MASK64


@njit(cache=True)
def mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def seed_into(state, seed):
    """Reseed an existing state array in place (allocation is not free)."""
    z = np.uint64(seed)
    for k in range(4):
        z = z + _GAMMA
        state[k] = mix64(z)


@njit(cache=True)
def seed_state(seed):
    state = np.empty(4, dtype=np.uint64)
    seed_into(state, seed)
    return state


@njit(cache=True)
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@njit(cache=True)
def next_u64(state):
    s0 = state[0]
    s1 = state[1]
    s2 = state[2]
    s3 = state[3]
    result = _rotl(s1 * np.uint64(5), 7) * np.uint64(9)
    t = s1 << np.uint64(17)
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, 45)
    state[0] = s0
    state[1] = s1
    state[2] = s2
    state[3] = s3
    return result


@njit(cache=True)
def uniform(state):
    """Uniform double in [0, 1) built from the top 53 bits."""
    return float(next_u64(state) >> np.uint64(11)) * _DOUBLE_UNIT


@njit(cache=True)
def randbelow(state, k):
    """Exactly uniform integer in [0, k) for 1 <= k < 2**32 (Lemire, 32-bit)."""
    bound = np.uint64(k)
    x = next_u64(state) >> np.uint64(32)
    prod = x * bound
    low = prod & _LOW32
    if low < bound:
        threshold = (_TWO32 - bound) % bound
        while low < threshold:
            x = next_u64(state) >> np.uint64(32)
            prod = x * bound
            low = prod & _LOW32
    return np.int64(prod >> np.uint64(32))


@njit(cache=True)
def geometric_failures(state, p):
    """Failures before the first success, success probability ``p``.

    Always consumes exactly one uniform, including the degenerate ``p >= 1``.
    """
    u = uniform(state)
    if p >= 1.0:
        return np.int64(0)
    return np.int64(np.floor(np.log1p(-u) / np.log1p(-p)))


class Xoshiro256:
    """Pure-Python mirror of the kernel stream, for tests and ad hoc use."""

    def __init__(self, seed):
        z = as_seed(seed)
        self.s = []
        for _ in range(4):
            z = (z + GOLDEN_GAMMA) & MASK64
            self.s.append(_mix64_py(z))

    @staticmethod
    def _rotl(x, k):
        return ((x << k) | (x >> (64 - k))) & MASK64

    def next_u64(self):
        s = self.s
        result = (self._rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = self._rotl(s[3], 45)
        return result

    def uniform(self):
        return (self.next_u64() >> 11) * _DOUBLE_UNIT

    def randbelow(self, k):
        x = self.next_u64() >> 32
        prod = x * k
        low = prod & 0xFFFFFFFF
        if low < k:
            threshold = ((1 << 32) - k) % k
            while low < threshold:
                x = self.next_u64() >> 32
                prod = x * k
                low = prod & 0xFFFFFFFF
        return prod >> 32
