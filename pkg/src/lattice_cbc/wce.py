"""Shift-averaged worst-case error of rank-1 lattice rules.

Three evaluators are provided: a literal subset sum (small ``s`` only), an
incremental product-weight recursion, and an order-layered dynamic program
for POD weights. ``wce_upper_bound`` gives the a-priori bound satisfied by
CBC-constructed vectors.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .numerics import bernoulli2_frac, bernoulli2_numerators, euler_totient, zeta
from .weights import WeightScheme, check_lambda

__all__ = [
    "GeneratingVector",
    "WceState",
    "omega_row",
    "wce_bruteforce",
    "wce_product_append",
    "wce_product",
    "wce_pod_fixed_z",
    "wce_upper_bound",
    "upper_bound_bruteforce",
    "rho",
]

BRUTEFORCE_MAX_S = 20

WeightLike = Union[WeightScheme, Callable[[tuple], float]]


@dataclass(frozen=True)
class GeneratingVector:
    n: int
    z: tuple[int, ...]

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"modulus must be at least 2, got {self.n}")
        z = tuple(int(v) for v in self.z)
        for v in z:
            if not 1 <= v < self.n or math.gcd(v, self.n) != 1:
                raise ValueError(f"component {v} is not a unit modulo {self.n}")
        object.__setattr__(self, "z", z)

    @property
    def s(self) -> int:
        return len(self.z)

    def prefix(self, s: int) -> "GeneratingVector":
        return GeneratingVector(self.n, self.z[:s])

    def points(self) -> np.ndarray:
        """Unshifted lattice points, shape ``(n, s)``."""
        k = np.arange(self.n, dtype=np.int64)[:, None]
        return (k * np.array(self.z, dtype=np.int64)[None, :] % self.n) / self.n


def omega_row(n: int, z: int) -> np.ndarray:
    """``B2({k z / n})`` for ``k = 0..n-1``."""
    k = np.arange(n, dtype=np.int64)
    return bernoulli2_frac(k * z % n, n)


def kernel_average(n: int, z: int, v: np.ndarray | None = None) -> float:
    """``(1/n) sum_k B2({k z/n}) v[k]`` (``v = 1`` if omitted).

    Works on the integer numerators of ``B2`` so the heavy cancellation in
    ``sum_k B2(k/n) = 1/(6n)`` happens in exact arithmetic.
    """
    k = np.arange(n, dtype=np.int64)
    num = bernoulli2_numerators(k * z % n, n)
    total = float(np.sum(num)) if v is None else float(np.dot(num, v))
    return total / (6.0 * n * n * n)


def _weight_fn(weights: WeightLike) -> Callable[[tuple], float]:
    return weights.weight if isinstance(weights, WeightScheme) else weights


def wce_bruteforce(gv: GeneratingVector, weights: WeightLike, exact: bool = False) -> float:
    """Literal evaluation over every non-empty subset of coordinates.

    With ``exact=True`` every subset average is summed in integer arithmetic
    from ``B2(m/n) = N / (6 n^2)`` and the weights enter as exact rationals,
    so the only rounding is the final conversion. Float evaluation loses
    about ``eps * n^2`` to cancellation in the averages; the exact mode is
    the oracle for large ``n``.
    """
    if gv.s > BRUTEFORCE_MAX_S:
        raise ValueError(f"brute force limited to s <= {BRUTEFORCE_MAX_S}, got {gv.s}")
    w = _weight_fn(weights)
    if exact:
        return _bruteforce_exact(gv, w)
    rows = [omega_row(gv.n, z) for z in gv.z]
    total = 0.0
    for size in range(1, gv.s + 1):
        for u in itertools.combinations(range(1, gv.s + 1), size):
            g = w(u)
            if g < 0:
                raise ValueError(f"negative weight for subset {u}")
            if g == 0:
                continue
            prod = np.ones(gv.n)
            for j in u:
                prod = prod * rows[j - 1]
            total += g * prod.mean()
    return math.sqrt(max(total, 0.0))


def _bruteforce_exact(gv: GeneratingVector, w: Callable[[tuple], float]) -> float:
    n = gv.n
    k = np.arange(n, dtype=np.int64)
    rows = []
    for z in gv.z:
        m = (k * z) % n
        rows.append((6 * m * (m - n) + n * n).astype(object))  # exact Python ints
    total = Fraction(0)
    # depth-first over subsets so each product extends its parent by one row
    stack = [((), None)]
    while stack:
        u, prod = stack.pop()
        if u:
            g = w(u)
            if g < 0:
                raise ValueError(f"negative weight for subset {u}")
            if g:
                total += Fraction(g) * Fraction(int(prod.sum()), n * (6 * n * n) ** len(u))
        for j in range((u[-1] if u else 0) + 1, gv.s + 1):
            row = rows[j - 1]
            stack.append((u + (j,), row if prod is None else prod * row))
    return math.sqrt(float(total))


@dataclass(frozen=True)
class WceState:
    """Product-weight running state: ``per_point[k] = prod_j (1 + gamma_j B2({k z_j/n}))``."""

    n: int
    e2: float
    per_point: np.ndarray
    s: int = 0

    @classmethod
    def empty(cls, n: int) -> "WceState":
        return cls(n=n, e2=0.0, per_point=np.ones(n), s=0)


def wce_product_append(state: WceState, z_new: int, gamma_new: float) -> WceState:
    """Add one coordinate with product weight ``gamma_new``."""
    n = state.n
    if math.gcd(int(z_new), n) != 1 or not 1 <= z_new < n:
        raise ValueError(f"component {z_new} is not a unit modulo {n}")
    if gamma_new <= 0:
        raise ValueError("weight must be positive")
    om = omega_row(n, z_new)
    G = kernel_average(n, z_new, state.per_point)
    return WceState(
        n=n,
        e2=state.e2 + gamma_new * G,
        per_point=state.per_point * (1.0 + gamma_new * om),
        s=state.s + 1,
    )


def wce_product(gv: GeneratingVector, gamma: Sequence[float]) -> np.ndarray:
    """Squared errors of every prefix for product weights."""
    state = WceState.empty(gv.n)
    out = np.empty(gv.s)
    for i, z in enumerate(gv.z):
        state = wce_product_append(state, z, gamma[i])
        out[i] = state.e2
    return out


def wce_pod_fixed_z(gv: GeneratingVector, scheme: WeightScheme, history: bool = False):
    """Worst-case error for POD weights in ``O(s^2 n)``.

    The table ``p[l, k] = Gamma_l * sum_{|u|=l} prod_{j in u} gamma_j B2({k z_j/n})``
    is built one coordinate at a time using only ``Gamma_l / Gamma_{l-1}``.
    With ``history=True`` the squared errors of all prefixes are returned.
    """
    n, s = gv.n, gv.s
    gamma = scheme.product_part(s)
    ratios = scheme.order_ratios(s)
    p = np.zeros((s + 1, n))
    p[0] = 1.0
    e2 = 0.0
    out = np.empty(s)
    for i, z in enumerate(gv.z):
        om = omega_row(n, z)
        # new sets contain coordinate i+1: delta[l-1] is their order-l layer
        delta = (ratios[: i + 1, None] * gamma[i]) * om[None, :] * p[: i + 1]
        e2 += gamma[i] * kernel_average(n, z, ratios[: i + 1] @ p[: i + 1])
        p[1 : i + 2] += delta
        out[i] = e2
    if history:
        return out
    return math.sqrt(max(e2, 0.0))


def rho(lam: float) -> float:
    """``2 zeta(2 lam) / (2 pi^2)^lam``."""
    return 2.0 * zeta(2.0 * lam) / (2.0 * math.pi ** 2) ** lam


def wce_upper_bound(scheme: WeightScheme, n: int, s: int, lam: float) -> float:
    """A-priori bound on the CBC worst-case error for one ``lam``."""
    check_lambda(lam)
    r = rho(lam)
    x = scheme.product_part(s) ** lam * r
    if scheme.kind == "product":
        total = math.expm1(float(np.sum(np.log1p(x))))
    else:
        g = scheme.order_ratios(s) ** lam
        # e[l] = Gamma_l^lam * e_l(x); sum over l >= 1
        e = np.zeros(s + 1)
        e[0] = 1.0
        for j in range(s):
            e[1 : j + 2] = e[1 : j + 2] + g[: j + 1] * x[j] * e[: j + 1]
        total = float(np.sum(e[1:]))
    return (total / euler_totient(n)) ** (1.0 / (2.0 * lam))


def upper_bound_bruteforce(weights: WeightLike, n: int, s: int, lam: float) -> float:
    w = _weight_fn(weights)
    r = rho(lam)
    total = 0.0
    for size in range(1, s + 1):
        for u in itertools.combinations(range(1, s + 1), size):
            total += w(u) ** lam * r ** size
    return (total / euler_totient(n)) ** (1.0 / (2.0 * lam))
