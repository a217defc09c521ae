"""Weight schemes, derivative-bound data and the norm bound M.

Order-dependent sequences (``B_l`` and ``Gamma_l``) are always carried as
successive ratios ``X_l / X_{l-1}`` with ``X_0 = 1``; they are only
exponentiated on request, so ``l!`` at ``l = 100`` never has to be formed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .numerics import zeta, zeta_prime

__all__ = [
    "CoordinateSequence",
    "OrderSequence",
    "NormBoundSpec",
    "WeightScheme",
    "PodNormState",
    "norm_bound_product",
    "norm_bound_pod_step",
    "norm_bound",
    "norm_bound_bruteforce",
    "lambda_weights",
    "lambda_weights_derivative",
    "lambda_log_c",
    "check_lambda",
]

LOG_2PI2 = math.log(2.0 * math.pi ** 2)


def check_lambda(lam: float) -> float:
    if not 0.5 < lam <= 1.0:
        raise ValueError(f"lambda must lie in (1/2, 1], got {lam!r}")
    return float(lam)


@dataclass(frozen=True)
class CoordinateSequence:
    """Per-coordinate positive factors ``b_1, b_2, ...``.

    ``kind`` is one of ``poly`` (``i**-param``), ``geo`` (``param**i``),
    ``const`` (``param``) or ``explicit`` (``values``).
    """

    kind: str
    param: float = 0.0
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("poly", "geo", "const", "explicit"):
            raise ValueError(f"unknown coordinate family {self.kind!r}")
        if self.kind == "explicit":
            if not self.values or min(self.values) <= 0:
                raise ValueError("explicit coordinate values must be positive")
        elif self.kind in ("geo", "const") and self.param <= 0:
            raise ValueError(f"{self.kind} parameter must be positive")

    def __call__(self, s: int) -> np.ndarray:
        i = np.arange(1, s + 1, dtype=np.float64)
        if self.kind == "poly":
            return i ** -self.param
        if self.kind == "geo":
            return self.param ** i
        if self.kind == "const":
            return np.full(s, float(self.param))
        if s > len(self.values):
            raise ValueError(f"explicit sequence has {len(self.values)} entries, need {s}")
        return np.array(self.values[:s], dtype=np.float64)

    def describe(self) -> str:
        if self.kind == "explicit":
            return f"explicit[{len(self.values)}]"
        return f"{self.kind} {self.param:g}"


@dataclass(frozen=True)
class OrderSequence:
    """Order-dependent factors ``X_1, X_2, ...`` with ``X_0 = 1``.

    ``kind`` is ``one``, ``linear`` (``X_l = l``), ``factorial``
    (``X_l = l!``), ``explicit`` (given values) or ``ratios`` (given
    ``X_l / X_{l-1}`` directly).
    """

    kind: str
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("one", "linear", "factorial", "explicit", "ratios"):
            raise ValueError(f"unknown order family {self.kind!r}")
        if self.kind in ("explicit", "ratios") and (not self.values or min(self.values) <= 0):
            raise ValueError("order factors must be positive")

    def ratios(self, s: int) -> np.ndarray:
        """``X_l / X_{l-1}`` for ``l = 1..s``."""
        l = np.arange(1, s + 1, dtype=np.float64)
        if self.kind == "one":
            return np.ones(s)
        if self.kind == "linear":
            out = l / np.maximum(l - 1.0, 1.0)
            return out
        if self.kind == "factorial":
            return l
        if s > len(self.values):
            raise ValueError(f"order sequence has {len(self.values)} entries, need {s}")
        v = np.array(self.values[:s], dtype=np.float64)
        if self.kind == "ratios":
            return v
        return v / np.concatenate(([1.0], v[:-1]))

    def log_values(self, s: int) -> np.ndarray:
        """``log X_l`` for ``l = 0..s``."""
        return np.concatenate(([0.0], np.cumsum(np.log(self.ratios(s)))))

    def values_upto(self, s: int) -> np.ndarray:
        """``X_l`` for ``l = 0..s`` (may overflow for huge sequences)."""
        return np.concatenate(([1.0], np.cumprod(self.ratios(s))))

    @property
    def trivial(self) -> bool:
        return self.kind == "one" or (
            self.kind in ("explicit", "ratios") and all(v == 1.0 for v in self.values)
        )

    def describe(self) -> str:
        return self.kind if self.kind not in ("explicit", "ratios") else f"{self.kind}[{len(self.values)}]"


@dataclass(frozen=True)
class NormBoundSpec:
    """Derivative-bound data: ``b_j`` per coordinate and ``B_l`` per order."""

    b: CoordinateSequence
    B: OrderSequence = field(default_factory=lambda: OrderSequence("one"))

    @property
    def product_form(self) -> bool:
        return self.B.trivial

    def describe(self) -> str:
        return f"b={self.b.describe()}, B={self.B.describe()}"


@dataclass(frozen=True)
class WeightScheme:
    """Product, order-dependent or POD weights in factored form.

    ``gamma`` holds the product part ``gamma_1..gamma_s``;
    ``Gamma_ratios`` holds ``Gamma_l / Gamma_{l-1}`` for ``l = 1..s``.
    """

    kind: str
    gamma: np.ndarray | None = None
    Gamma_ratios: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("product", "order-dependent", "pod"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind != "order-dependent":
            if self.gamma is None:
                raise ValueError(f"{self.kind} weights need a gamma sequence")
            object.__setattr__(self, "gamma", np.asarray(self.gamma, dtype=np.float64))
            if np.any(self.gamma <= 0):
                raise ValueError("product weights must be strictly positive")
        if self.kind != "product":
            if self.Gamma_ratios is None:
                raise ValueError(f"{self.kind} weights need Gamma ratios")
            object.__setattr__(self, "Gamma_ratios", np.asarray(self.Gamma_ratios, dtype=np.float64))
            if np.any(self.Gamma_ratios <= 0):
                raise ValueError("order weights must be strictly positive")

    @classmethod
    def product(cls, gamma: Sequence[float]) -> "WeightScheme":
        return cls("product", gamma=np.asarray(gamma, dtype=np.float64))

    @classmethod
    def pod(cls, gamma: Sequence[float], Gamma_ratios: Sequence[float]) -> "WeightScheme":
        return cls("pod", gamma=np.asarray(gamma, dtype=np.float64),
                   Gamma_ratios=np.asarray(Gamma_ratios, dtype=np.float64))

    @property
    def s(self) -> int:
        return len(self.gamma) if self.gamma is not None else len(self.Gamma_ratios)

    def product_part(self, s: int | None = None) -> np.ndarray:
        s = self.s if s is None else s
        if self.gamma is None:
            return np.ones(s)
        return self.gamma[:s]

    def order_ratios(self, s: int | None = None) -> np.ndarray:
        s = self.s if s is None else s
        if self.Gamma_ratios is None:
            return np.ones(s)
        if len(self.Gamma_ratios) < s:
            raise ValueError(f"need {s} order ratios, have {len(self.Gamma_ratios)}")
        return self.Gamma_ratios[:s]

    def as_pod(self, s: int | None = None) -> "WeightScheme":
        s = self.s if s is None else s
        return WeightScheme.pod(self.product_part(s), self.order_ratios(s))

    def truncated(self, s: int) -> "WeightScheme":
        return WeightScheme(
            self.kind,
            gamma=None if self.gamma is None else self.gamma[:s],
            Gamma_ratios=None if self.Gamma_ratios is None else self.Gamma_ratios[:s],
        )

    def weight(self, u: Sequence[int]) -> float:
        """``gamma_u`` for a set of 1-based coordinate indices."""
        u = tuple(u)
        val = 1.0
        if self.gamma is not None:
            for j in u:
                val *= self.gamma[j - 1]
        if self.Gamma_ratios is not None and u:
            val *= float(np.prod(self.Gamma_ratios[: len(u)]))
        return val


@dataclass(frozen=True)
class PodNormState:
    """Running norm bound ``M`` and the order-layered sums ``H_{s,l}``.

    ``H[l] = (B_{l+1}/Gamma_{l+1}) * e_l(b_j^2/gamma_j, j <= s)`` where
    ``e_l`` is the elementary symmetric polynomial of degree ``l``.
    """

    s: int
    M: float
    H: np.ndarray  # length s_max, entries beyond s are zero
    ratio: np.ndarray  # (B_l/Gamma_l) / (B_{l-1}/Gamma_{l-1}), l = 1..s_max

    @classmethod
    def initial(cls, B_ratios: np.ndarray, Gamma_ratios: np.ndarray) -> "PodNormState":
        ratio = np.asarray(B_ratios, dtype=np.float64) / np.asarray(Gamma_ratios, dtype=np.float64)
        H = np.zeros(len(ratio))
        H[0] = ratio[0]
        return cls(s=0, M=1.0, H=H, ratio=ratio)


def norm_bound_product(b: Sequence[float], gamma: Sequence[float], s: int | None = None) -> float:
    """``prod_j (1 + b_j**2 / gamma_j)`` accumulated dimension by dimension."""
    b = np.asarray(b, dtype=np.float64)
    gamma = np.asarray(gamma, dtype=np.float64)
    s = len(b) if s is None else s
    if len(gamma) < s or len(b) < s:
        raise ValueError("need at least s entries of b and gamma")
    if np.any(gamma[:s] <= 0):
        raise ValueError("weights must be strictly positive")
    M = 1.0
    for j in range(s):
        M *= 1.0 + b[j] ** 2 / gamma[j]
    return M


def norm_bound_pod_step(state: PodNormState, b_s: float, gamma_s: float) -> PodNormState:
    """Append dimension ``state.s + 1`` with coordinate factor ``b_s``."""
    if gamma_s <= 0:
        raise ValueError(f"gamma must be positive, got {gamma_s!r}")
    s = state.s + 1
    if s > len(state.ratio):
        raise ValueError("norm state has no room for another dimension")
    x = b_s * b_s / gamma_s
    H_old = state.H
    M = state.M + x * float(np.sum(H_old[:s]))
    H = H_old.copy()
    # l = 1..s-1 in one sweep; H[l] uses H_old[l-1]
    top = min(s, len(H) - 1)
    if top >= 1:
        H[1 : top + 1] = H_old[1 : top + 1] + x * state.ratio[1 : top + 1] * H_old[:top]
    return PodNormState(s=s, M=M, H=H, ratio=state.ratio)


def norm_bound(b: np.ndarray, scheme: WeightScheme, B_ratios: np.ndarray | None = None) -> np.ndarray:
    """Norm bounds ``M_1..M_s`` for the given weights; ``B_ratios`` default all ones."""
    s = len(b)
    if B_ratios is None:
        B_ratios = np.ones(s)
    state = PodNormState.initial(B_ratios[:s], scheme.order_ratios(s))
    gamma = scheme.product_part(s)
    out = np.empty(s)
    for j in range(s):
        state = norm_bound_pod_step(state, b[j], gamma[j])
        out[j] = state.M
    return out


def norm_bound_bruteforce(b: Sequence[float], B_values: Sequence[float],
                          weight: Callable[[tuple[int, ...]], float]) -> float:
    """Literal sum over all subsets; ``B_values[l]`` is ``B_l`` with ``B_0 = 1``."""
    s = len(b)
    total = 0.0
    for size in range(s + 1):
        for u in itertools.combinations(range(1, s + 1), size):
            prod_b = 1.0
            for j in u:
                prod_b *= b[j - 1] ** 2
            total += B_values[size] * prod_b / weight(u)
    return total


def lambda_log_c(b: np.ndarray, lam: float) -> np.ndarray:
    """``log((2 pi^2)^lam b_j^2 / (2 zeta(2 lam)))``."""
    return lam * LOG_2PI2 + 2.0 * np.log(b) - math.log(2.0 * zeta(2.0 * lam))


def lambda_weights(spec: NormBoundSpec, lam: float, s: int) -> WeightScheme:
    """POD weights minimising the CBC error bound for a given ``lam``."""
    check_lambda(lam)
    b = spec.b(s)
    gamma = np.exp(lambda_log_c(b, lam) / (1.0 + lam))
    Gamma_ratios = spec.B.ratios(s) ** (1.0 / (1.0 + lam))
    return WeightScheme.pod(gamma, Gamma_ratios)


def lambda_weights_derivative(spec: NormBoundSpec, lam: float, u_size: int, b_product_log: float) -> float:
    """d/dlam of ``gamma_u(lam)`` for ``|u| = u_size`` and ``log prod_{j in u} b_j^2 = b_product_log``."""
    check_lambda(lam)
    if u_size < 1:
        raise ValueError("u_size must be at least 1")
    logB = float(spec.B.log_values(u_size)[u_size])
    z2 = zeta(2.0 * lam)
    log_inner = logB + u_size * (lam * LOG_2PI2 - math.log(2.0 * z2)) + b_product_log
    gamma_u = math.exp(log_inner / (1.0 + lam))
    dlog = LOG_2PI2 - 2.0 * zeta_prime(2.0 * lam) / z2
    return gamma_u * (-log_inner / (1.0 + lam) ** 2 + u_size * dlog / (1.0 + lam))
