"""Deterministic seeded randomness built on splitmix64.

splitmix64 is used (rather than a platform RNG) because its stream is trivially
reproducible across languages and platforms: output i is a pure function of
seed + (i+1) * 0x9E3779B97F4A7C15, which also allows vectorized batch draws
that match the scalar stream exactly.
"""

import math

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB
_TWO64 = float(2**64)


class Rng:
    """splitmix64 generator with uniform, integer, normal, gamma and beta draws."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * _MUL1) & _MASK
        z = ((z ^ (z >> 27)) * _MUL2) & _MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform real in [0, 1)."""
        return self.next_u64() / _TWO64

    def uniforms(self, n: int) -> np.ndarray:
        """n uniforms in [0, 1), identical to n successive uniform() calls."""
        if n < 0:
            raise ValueError("n must be >= 0")
        idx = np.arange(1, n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + idx * np.uint64(_GOLDEN)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(_MUL1)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(_MUL2)
            z = z ^ (z >> np.uint64(31))
        self.state = (self.state + n * _GOLDEN) & _MASK
        return z.astype(np.float64) / _TWO64

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n). Modulo bias is negligible for n << 2^64."""
        if n <= 0:
            raise ValueError("n must be >= 1")
        return int(self.next_u64() % n)

    def normal(self) -> float:
        """Standard normal via Box-Muller; two stream draws per call, no caching."""
        u1 = 1.0 - self.uniform()  # in (0, 1], keeps log() finite
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def gamma(self, alpha: float) -> float:
        """Gamma(alpha, 1) via Marsaglia-Tsang rejection."""
        if alpha <= 0:
            raise ValueError("alpha must be > 0")
        if alpha < 1.0:
            # boost: Gamma(a) = Gamma(a+1) * U^(1/a)
            u = self.uniform()
            return self.gamma(alpha + 1.0) * (u ** (1.0 / alpha) if u > 0 else 0.0)
        d = alpha - 1.0 / 3.0
        c = 1.0 / math.sqrt(9.0 * d)
        while True:
            x = self.normal()
            v = 1.0 + c * x
            if v <= 0:
                continue
            v = v * v * v
            u = self.uniform()
            if u <= 0 or math.log(u) < 0.5 * x * x + d - d * v + d * math.log(v):
                return d * v

    def beta(self, a: float, b: float) -> float:
        """Beta(a, b) as the ratio of two gamma draws."""
        ga = self.gamma(a)
        gb = self.gamma(b)
        total = ga + gb
        return ga / total if total > 0 else 0.5


def derive_seed(base_seed: int, index: int) -> int:
    """Per-item seed for parallel generation: base + index, wrapped to 64 bits."""
    return (base_seed + index) & _MASK
