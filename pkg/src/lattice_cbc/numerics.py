"""Special functions and number-theoretic helpers.

Everything here is a pure function of its arguments and works in 64-bit
floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "PrimeModulus",
    "PowerLawFit",
    "bernoulli2",
    "bernoulli2_frac",
    "bernoulli2_numerators",
    "zeta",
    "zeta_prime",
    "is_prime",
    "prime_factors",
    "primitive_root",
    "euler_totient",
    "units",
    "fit_power_law",
]

# Euler-Maclaurin: direct terms 1..N-1, tail from N with corrections B2, B4, B6.
_EM_TERMS = 64
_EM_BERNOULLI = ((2, 1.0 / 6.0), (4, -1.0 / 30.0), (6, 1.0 / 42.0))


def bernoulli2(x: float) -> float:
    """Degree-2 Bernoulli polynomial ``x**2 - x + 1/6`` on ``[0, 1)``."""
    if not 0.0 <= x < 1.0:
        raise ValueError(f"bernoulli2 is defined on [0, 1), got {x!r}")
    return x * x - x + 1.0 / 6.0


def bernoulli2_frac(m: np.ndarray, n: int) -> np.ndarray:
    """Vectorised ``B2(m / n)`` for integer residues ``0 <= m < n``."""
    x = np.asarray(m, dtype=np.float64) / n
    return x * x - x + 1.0 / 6.0


def bernoulli2_numerators(m: np.ndarray, n: int) -> np.ndarray:
    """Integers ``6 m^2 - 6 m n + n^2`` so that ``B2(m/n) = N / (6 n^2)``.

    Returned as float64; exact for ``n`` below about ``3.8e7``.
    """
    m = np.asarray(m, dtype=np.int64)
    return (6 * m * (m - n) + n * n).astype(np.float64)


def _rising(s: float, m: int) -> float:
    out = 1.0
    for i in range(m):
        out *= s + i
    return out


def _rising_and_derivative(s: float, m: int) -> tuple[float, float]:
    # d/ds prod(s + i) = prod * sum 1/(s + i); s > 1 so no zero factors
    val = _rising(s, m)
    return val, val * sum(1.0 / (s + i) for i in range(m))


def zeta(s: float) -> float:
    """Riemann zeta function for real ``s > 1``.

    Uses Euler-Maclaurin summation with 63 direct terms and tail
    corrections up to the sixth Bernoulli number, which is accurate to
    roughly machine precision on ``(1, 2]``.
    """
    if not s > 1.0:
        raise ValueError(f"zeta requires s > 1, got {s!r}")
    N = _EM_TERMS
    sm1 = s - 1.0
    terms = [k ** -s for k in range(1, N)]
    # N**(1-s)/(s-1) split so the pole part 1/(s-1) is rounded only once
    terms += [1.0 / sm1, math.expm1(-sm1 * math.log(N)) / sm1, 0.5 * N ** -s]
    for order, bern in _EM_BERNOULLI:
        terms.append(bern / math.factorial(order) * _rising(s, order - 1) * N ** (-s - order + 1))
    return math.fsum(terms)


def zeta_prime(s: float) -> float:
    """Derivative of the Riemann zeta function for real ``s > 1``."""
    if not s > 1.0:
        raise ValueError(f"zeta_prime requires s > 1, got {s!r}")
    N = _EM_TERMS
    logN = math.log(N)
    sm1 = s - 1.0
    x = sm1 * logN
    terms = [-math.log(k) * k ** -s for k in range(2, N)]
    # -N**(1-s) * (log N/(s-1) + 1/(s-1)**2) = -1/(s-1)**2 - (e^{-x}(1+x) - 1)/(s-1)**2
    terms += [
        -1.0 / (sm1 * sm1),
        -(math.expm1(-x) * (1.0 + x) + x) / (sm1 * sm1),
        -0.5 * logN * N ** -s,
    ]
    for order, bern in _EM_BERNOULLI:
        c = bern / math.factorial(order)
        p, dp = _rising_and_derivative(s, order - 1)
        terms.append(c * (dp - logN * p) * N ** (-s - order + 1))
    return math.fsum(terms)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def prime_factors(n: int) -> list[int]:
    """Distinct prime factors of ``n >= 1`` in increasing order."""
    out = []
    m = n
    f = 2
    while f * f <= m:
        if m % f == 0:
            out.append(f)
            while m % f == 0:
                m //= f
        f += 1 if f == 2 else 2
    if m > 1:
        out.append(m)
    return out


def primitive_root(n: int) -> int:
    """Smallest generator of the multiplicative group modulo a prime ``n >= 3``."""
    if n < 3 or not is_prime(n):
        raise ValueError(f"primitive_root needs an odd prime, got {n!r}")
    phi = n - 1
    exps = [phi // q for q in prime_factors(phi)]
    for g in range(2, n):
        if all(pow(g, e, n) != 1 for e in exps):
            return g
    raise AssertionError("unreachable: every prime has a primitive root")


def euler_totient(n: int) -> int:
    if n < 1:
        raise ValueError(f"euler_totient needs n >= 1, got {n!r}")
    phi = n
    for q in prime_factors(n):
        phi -= phi // q
    return phi


def units(n: int) -> np.ndarray:
    """The group U_n as a sorted integer array."""
    k = np.arange(1, n, dtype=np.int64)
    return k[np.gcd(k, n) == 1] if n > 2 else np.array([1], dtype=np.int64)


@dataclass(frozen=True)
class PrimeModulus:
    """A prime modulus together with a generator of its unit group."""

    n: int
    phi: int
    generator: int

    @classmethod
    def of(cls, n: int) -> "PrimeModulus":
        return cls(n=n, phi=n - 1, generator=primitive_root(n))


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares fit ``E ~ C * n**(-exponent)``; ``log_constant = log C``."""

    exponent: float
    log_constant: float

    def predict(self, n: float) -> float:
        return math.exp(self.log_constant) * n ** -self.exponent


def fit_power_law(pairs: Iterable[Sequence[float]]) -> PowerLawFit:
    """Fit ``-log E = exponent * log n - log C`` by ordinary least squares."""
    pts = [(float(n), float(e)) for n, e in pairs]
    if len({n for n, _ in pts}) < 2:
        raise ValueError("fit_power_law needs at least two distinct n values")
    if any(e <= 0 for _, e in pts) or any(n <= 0 for n, _ in pts):
        raise ValueError("fit_power_law needs positive n and E")
    x = np.log([n for n, _ in pts])
    y = -np.log([e for _, e in pts])
    xm, ym = x.mean(), y.mean()
    slope = float(np.dot(x - xm, y - ym) / np.dot(x - xm, x - xm))
    intercept = float(ym - slope * xm)
    return PowerLawFit(exponent=slope, log_constant=-intercept)
