"""Dense linear algebra primitives and a pinned, reproducible PRNG.

All arithmetic is 64-bit IEEE floating point. Vectors are 1-D and matrices
2-D ``numpy.float64`` arrays; every operation validates shapes at the
boundary so callers get clear errors instead of broadcasting surprises.

The random generator is xoshiro256++ (Blackman & Vigna) seeded through
splitmix64, implemented here in full so the stream for a given seed is
identical on every platform and in every language that copies these
constants:

    splitmix64:  x += 0x9E3779B97F4A7C15
                 z = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9
                 z = (z ^ (z >> 27)) * 0x94D049BB133111EB
                 output = z ^ (z >> 31)
    xoshiro256++: output = rotl64(s0 + s3, 23) + s0, state update as in
                  the reference C implementation (shift 17, rotation 45).

The four 64-bit state words are the first four splitmix64 outputs for the
seed. Doubles in [0, 1) take the top 53 bits: (u64 >> 11) * 2**-53.
Normal variates use the Box-Muller cosine branch and consume exactly two
uniform draws each, in order: z = sqrt(-2*ln(1 - u1)) * cos(2*pi*u2).
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

# Cholesky pivots at or below this are treated as "not SPD".
SPD_PIVOT_TOL = 1e-12


class SingularMatrixError(Exception):
    """Raised when a matrix required to be SPD fails the pivot test."""


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Rng:
    """xoshiro256++ generator with splitmix64 seeding.

    Single-owner mutable state: never share one instance between
    concurrent tasks. Identical seeds produce identical streams.
    """

    __slots__ = ("seed", "_s0", "_s1", "_s2", "_s3")

    def __init__(self, seed: int):
        self.seed = seed & _MASK64
        x = self.seed
        words = []
        for _ in range(4):
            x = (x + _GOLDEN) & _MASK64
            z = x
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
            words.append(z ^ (z >> 31))
        self._s0, self._s1, self._s2, self._s3 = words

    def next_u64(self) -> int:
        """Next raw 64-bit output word."""
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        result = (_rotl((s0 + s3) & _MASK64, 23) + s0) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        return result

    def unit(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits of one word."""
        return (self.next_u64() >> 11) * 1.1102230246251565e-16  # 2**-53

    def uniform(self, lo: float, hi: float) -> float:
        """Uniform double in [lo, hi). Consumes one word."""
        if not lo < hi:
            raise ValueError(f"uniform requires lo < hi, got [{lo}, {hi})")
        value = lo + (hi - lo) * self.unit()
        if value >= hi:  # guard against rounding up at the boundary
            value = math.nextafter(hi, lo)
        return value

    def normal(self) -> float:
        """Standard normal via Box-Muller (cosine branch, two draws)."""
        u1 = self.unit()
        u2 = self.unit()
        return math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(2.0 * math.pi * u2)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n), derived as floor(unit() * n)."""
        if n <= 0:
            raise ValueError(f"below requires n >= 1, got {n}")
        k = int(self.unit() * n)
        return n - 1 if k >= n else k

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle, consuming len(items)-1 draws."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]


def as_vector(v) -> np.ndarray:
    """Coerce to a 1-D float64 array; reject other shapes."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"expected a vector, got shape {arr.shape}")
    return arr


def as_matrix(a) -> np.ndarray:
    """Coerce to a 2-D float64 array; reject other shapes."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {arr.shape}")
    return arr


def matvec(a, v) -> np.ndarray:
    """Matrix-vector product a @ v with shape validation."""
    a = as_matrix(a)
    v = as_vector(v)
    if a.shape[1] != v.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} @ ({v.shape[0]},)")
    return a @ v

def gram(a) -> np.ndarray:
    """Gram matrix a.T @ a, symmetrized so the result is exactly its
    own transpose regardless of BLAS rounding."""
    a = as_matrix(a)
    if a.shape[0] < 1:
        raise ValueError("gram requires at least one row")
    g = a.T @ a
    return (g + g.T) * 0.5


def solve_spd(a, rhs) -> np.ndarray:
    """Solve a @ x = rhs for symmetric positive definite a via Cholesky.

    Raises SingularMatrixError when a pivot falls at or below
    SPD_PIVOT_TOL, which is how rank deficiency (e.g. duplicated columns
    in a design matrix) surfaces.
    """
    a = as_matrix(a)
    rhs = as_vector(rhs)
    n = a.shape[0]
    if a.shape[1] != n:
        raise ValueError(f"solve_spd requires a square matrix, got {a.shape}")
    if rhs.shape[0] != n:
        raise ValueError(f"rhs length {rhs.shape[0]} does not match matrix size {n}")

    lower = np.zeros((n, n))
    for j in range(n):
        pivot = a[j, j] - np.dot(lower[j, :j], lower[j, :j])
        if pivot <= SPD_PIVOT_TOL:
            raise SingularMatrixError(
                f"matrix is not positive definite (pivot {pivot:.3e} at row {j})"
            )
        lower[j, j] = math.sqrt(pivot)
        for i in range(j + 1, n):
            lower[i, j] = (a[i, j] - np.dot(lower[i, :j], lower[j, :j])) / lower[j, j]

    # forward then backward substitution
    y = np.zeros(n)
    for i in range(n):
        y[i] = (rhs[i] - np.dot(lower[i, :i], y[:i])) / lower[i, i]
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        x[i] = (y[i] - np.dot(lower[i + 1 :, i], x[i + 1 :])) / lower[i, i]
    return x
