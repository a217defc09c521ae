"""Fast component-by-component kernel.

For prime ``n`` the matrix ``[B2({k z / n})]`` indexed by ``z`` in ``U_n`` and
``k = 1..n-1`` becomes circulant once both indices are written as powers of
a primitive root ``g``. The product with any vector then reduces to one
length-``(n-1)`` circular correlation, done with real FFTs.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .numerics import PrimeModulus, bernoulli2_frac, is_prime, units
from .results import ConstructionResult
from .wce import GeneratingVector, kernel_average, omega_row
from .weights import NormBoundSpec, WeightScheme, norm_bound

__all__ = [
    "KernelColumn",
    "CandidateScores",
    "CbcEngine",
    "kernel_matvec",
    "naive_matvec",
    "select_candidate",
    "cbc_product",
    "cbc_pod",
]

log = logging.getLogger(__name__)

# Scores within this fraction of mean|v|/6 of the minimum count as ties.
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class KernelColumn:
    """The Bernoulli kernel matrix in generator-permuted (circulant) form."""

    modulus: PrimeModulus
    omega0: float
    perm_values: np.ndarray  # B2(g^a mod n / n), a = 0..n-2
    powers: np.ndarray  # g^a mod n, a = 0..n-2
    inverse_index: np.ndarray  # discrete log of z, indexed by z (entry 0 unused)
    perm_fft: np.ndarray

    @classmethod
    def build(cls, n: int) -> "KernelColumn":
        mod = PrimeModulus.of(n)
        phi, g = mod.phi, mod.generator
        powers = np.empty(phi, dtype=np.int64)
        acc = 1
        for a in range(phi):
            powers[a] = acc
            acc = acc * g % n
        inverse = np.full(n, -1, dtype=np.int64)
        inverse[powers] = np.arange(phi)
        perm = bernoulli2_frac(powers, n)
        return cls(
            modulus=mod,
            omega0=1.0 / 6.0,
            perm_values=perm,
            powers=powers,
            inverse_index=inverse,
            perm_fft=np.fft.rfft(perm),
        )

    @property
    def n(self) -> int:
        return self.modulus.n

    def omega(self, z: int, k: int) -> float:
        """Single kernel entry ``B2({k z / n})`` recovered from the permuted column."""
        if k % self.n == 0:
            return self.omega0
        a = self.inverse_index[z % self.n] + self.inverse_index[k % self.n]
        return float(self.perm_values[a % self.modulus.phi])


@lru_cache(maxsize=16)
def _kernel_column(n: int) -> KernelColumn:
    return KernelColumn.build(n)


def kernel_matvec(col: KernelColumn, v: np.ndarray) -> np.ndarray:
    """``w[z] = sum_k B2({k z / n}) v[k]`` for every unit ``z``.

    Returns a length-``n`` array indexed by ``z``; entry 0 is NaN.
    """
    n = col.n
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (n,):
        raise ValueError(f"expected a vector of length {n}, got shape {v.shape}")
    phi = col.modulus.phi
    u = v[col.powers]
    # circular correlation: c[a] = sum_b perm[(a + b) mod phi] * u[b]
    corr = np.fft.irfft(col.perm_fft * np.conj(np.fft.rfft(u)), n=phi)
    out = np.full(n, np.nan)
    out[col.powers] = corr + col.omega0 * v[0]
    return out


def naive_matvec(n: int, v: np.ndarray) -> np.ndarray:
    """Reference ``O(n^2)`` product, valid for any modulus."""
    v = np.asarray(v, dtype=np.float64)
    out = np.full(n, np.nan)
    for z in units(n):
        out[z] = float(np.dot(omega_row(n, int(z)), v))
    return out


@dataclass(frozen=True)
class CandidateScores:
    """Per-candidate scores ``G(z)`` (indexed by ``z``, NaN off ``U_n``) and the pick."""

    scores: np.ndarray
    argmin: int

    @property
    def minimum(self) -> float:
        return float(self.scores[self.argmin])


def select_candidate(scores: np.ndarray, scale: float) -> CandidateScores:
    """Smallest ``z`` whose score is within ``TIE_RTOL * scale`` of the minimum.

    Scores are symmetrised over ``z <-> n - z`` first, which is exact in
    exact arithmetic and removes rounding asymmetry from the FFT.
    """
    n = len(scores)
    sym = 0.5 * (scores + scores[(n - np.arange(n)) % n])
    sym[0] = np.nan
    best = np.nanmin(sym)
    tol = TIE_RTOL * abs(scale)
    cands = np.flatnonzero(sym <= best + tol)
    return CandidateScores(scores=sym, argmin=int(cands[0]))


class CbcEngine:
    """Score every candidate component for a fixed modulus.

    Uses the circulant FFT kernel for prime ``n`` unless ``naive`` is set;
    composite moduli always use the naive product.
    """

    def __init__(self, n: int, naive: bool = False):
        if n < 2:
            raise ValueError(f"n must be at least 2, got {n}")
        self.n = n
        prime = n >= 3 and is_prime(n)
        if not prime and not naive:
            warnings.warn(f"n = {n} is not an odd prime; using the O(n^2) kernel", stacklevel=2)
        self.naive = naive or not prime
        self.col = None if self.naive else _kernel_column(n)

    @property
    def path(self) -> str:
        return "naive" if self.naive else "fft"

    def matvec(self, v: np.ndarray) -> np.ndarray:
        if self.naive:
            return naive_matvec(self.n, v)
        return kernel_matvec(self.col, v)

    def choose(self, v: np.ndarray) -> CandidateScores:
        """Minimise ``G(z) = (1/n) sum_k B2({k z/n}) v[k]`` over ``U_n``."""
        scores = self.matvec(v) / self.n
        return select_candidate(scores, float(np.mean(np.abs(v))) / 6.0)

    def omega(self, z: int) -> np.ndarray:
        return omega_row(self.n, z)


def _finish(n, z, scheme, e2, spec, algorithm, engine, extra=None) -> ConstructionResult:
    gv = GeneratingVector(n, tuple(z))
    M = None
    if spec is not None:
        s = len(z)
        M = norm_bound(spec.b(s), scheme, spec.B.ratios(s))
    meta = {"algorithm": algorithm, "n": n, "s": len(z), "kernel": engine.path}
    if spec is not None:
        meta["spec"] = spec.describe()
    if extra:
        meta.update(extra)
    return ConstructionResult(gv=gv, scheme=scheme, e2_history=np.asarray(e2), M_history=M, meta=meta)


def cbc_product(n: int, s: int, gamma, spec: NormBoundSpec | None = None,
                naive: bool = False) -> ConstructionResult:
    """Classic CBC with product weights ``gamma_1..gamma_s``."""
    gamma = np.asarray(gamma, dtype=np.float64)[:s]
    if len(gamma) < s or np.any(gamma <= 0):
        raise ValueError("need s strictly positive product weights")
    engine = CbcEngine(n, naive=naive)
    per_point = np.ones(n)
    z = [1]
    om = engine.omega(1)
    e2 = [gamma[0] * kernel_average(n, 1)]
    per_point *= 1.0 + gamma[0] * om
    for i in range(1, s):
        pick = engine.choose(per_point)
        z.append(pick.argmin)
        om = engine.omega(pick.argmin)
        e2.append(e2[-1] + gamma[i] * kernel_average(n, pick.argmin, per_point))
        per_point *= 1.0 + gamma[i] * om
    return _finish(n, z, WeightScheme.product(gamma), e2, spec, "cbc-product", engine)


class PodTable:
    """Order-layered table ``p[l, k]`` for POD weights (``Gamma`` folded in)."""

    def __init__(self, n: int, s: int, Gamma_ratios: np.ndarray):
        self.p = np.zeros((s + 1, n))
        self.p[0] = 1.0
        self.ratios = np.asarray(Gamma_ratios, dtype=np.float64)
        self.dims = 0

    def combined(self) -> np.ndarray:
        """``sum_{l=1}^{i} (Gamma_l/Gamma_{l-1}) p_{i-1, l-1}`` for the next dimension ``i``."""
        i = self.dims + 1
        return self.ratios[:i] @ self.p[:i]

    def append(self, gamma_i: float, om: np.ndarray) -> None:
        i = self.dims + 1
        self.p[1 : i + 1] += (self.ratios[:i, None] * gamma_i) * om[None, :] * self.p[:i]
        self.dims = i


def cbc_pod(n: int, s: int, scheme: WeightScheme, spec: NormBoundSpec | None = None,
            naive: bool = False) -> ConstructionResult:
    """Classic CBC with POD weights, ``O(s n log n + s^2 n)``."""
    scheme = scheme.as_pod(s)
    gamma, ratios = scheme.gamma, scheme.Gamma_ratios
    engine = CbcEngine(n, naive=naive)
    table = PodTable(n, s, ratios)
    z = [1]
    om = engine.omega(1)
    e2 = [gamma[0] * kernel_average(n, 1, table.combined())]
    table.append(gamma[0], om)
    for i in range(1, s):
        v = table.combined()
        pick = engine.choose(v)
        z.append(pick.argmin)
        om = engine.omega(pick.argmin)
        e2.append(e2[-1] + gamma[i] * kernel_average(n, pick.argmin, v))
        table.append(gamma[i], om)
    return _finish(n, z, scheme, e2, spec, "cbc-pod", engine)
