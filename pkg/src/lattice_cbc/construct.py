"""Double CBC and iterated CBC constructions.

Both choose the weights together with the generating vector so that the
root-mean-square error bound ``E = e_sh * sqrt(M)`` is small, given only the
derivative-bound data ``(b, B)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .engine import CbcEngine, PodTable, cbc_pod, cbc_product
from .numerics import zeta, zeta_prime
from .results import ConstructionResult
from .wce import GeneratingVector, kernel_average, omega_row
from .weights import (
    LOG_2PI2,
    NormBoundSpec,
    OrderSequence,
    PodNormState,
    WeightScheme,
    check_lambda,
    lambda_log_c,
    lambda_weights,
    norm_bound,
    norm_bound_pod_step,
)

__all__ = [
    "ConstructionResult",
    "IcbcTrace",
    "MinimizerInputs",
    "lemma_minimizer",
    "DEFAULT_GAMMA1",
    "lambda1_gamma1",
    "dcbc_product",
    "dcbc_pod",
    "icbc",
    "icbc_objective",
    "icbc_objective_derivative",
    "minimize_on_interval",
    "LAMBDA_EPS",
]

LAMBDA_EPS = 1e-3
LAMBDA_XTOL = 1e-6
CYCLE_TOL = 1e-6
# Layers of the order tables below this magnitude are dropped (avoids subnormals).
LAYER_FLOOR = 1e-280


@dataclass(frozen=True)
class MinimizerInputs:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if min(self.a, self.b, self.c, self.d) <= 0:
            raise ValueError(f"all of a, b, c, d must be positive: {self}")

    def h(self, x: float) -> float:
        return (self.a + self.b * x) * (self.c + self.d / x)


def lemma_minimizer(m: MinimizerInputs) -> float:
    """Minimiser ``sqrt(a d / (b c))`` of ``(a + b x)(c + d / x)`` on ``x > 0``."""
    if not isinstance(m, MinimizerInputs):
        m = MinimizerInputs(*m)
    return math.sqrt(m.a * m.d / (m.b * m.c))


DEFAULT_GAMMA1 = 1.0


def lambda1_gamma1(spec: NormBoundSpec, Gamma_ratio1: float = 1.0) -> float:
    """Alternative first weight: the singleton weight of the ``lam = 1``
    family, ``sqrt(6 B_1) b_1``, divided by ``Gamma_1``."""
    B1 = float(spec.B.ratios(1)[0])
    b1 = float(spec.b(1)[0])
    return math.sqrt(6.0 * B1) * b1 / Gamma_ratio1


def dcbc_product(n: int, s: int, spec: NormBoundSpec, gamma1: float | None = None,
                 naive: bool = False) -> ConstructionResult:
    """Double CBC for product weights (requires ``B_l = 1``)."""
    if not spec.product_form:
        raise ValueError("dcbc_product needs B_l = 1 for all l; use dcbc_pod")
    if gamma1 is None:
        gamma1 = DEFAULT_GAMMA1
    if gamma1 <= 0:
        raise ValueError(f"gamma1 must be positive, got {gamma1!r}")
    b = spec.b(s)
    engine = CbcEngine(n, naive=naive)
    gamma = np.empty(s)
    gamma[0] = gamma1
    z = [1]
    om = engine.omega(1)
    e2 = [gamma1 * kernel_average(n, 1)]
    M = [1.0 + b[0] ** 2 / gamma1]
    per_point = 1.0 + gamma1 * om
    for i in range(1, s):
        pick = engine.choose(per_point)
        z.append(pick.argmin)
        om = engine.omega(pick.argmin)
        G = kernel_average(n, pick.argmin, per_point)
        g = lemma_minimizer(MinimizerInputs(e2[-1], G, M[-1], M[-1] * b[i] ** 2))
        gamma[i] = g
        e2.append(e2[-1] + g * G)
        M.append(M[-1] * (1.0 + b[i] ** 2 / g))
        per_point *= 1.0 + g * om
    return ConstructionResult(
        gv=GeneratingVector(n, tuple(z)),
        scheme=WeightScheme.product(gamma),
        e2_history=np.array(e2),
        M_history=np.array(M),
        meta={"algorithm": "dcbc-product", "n": n, "s": s, "spec": spec.describe(),
              "gamma1": gamma1, "kernel": engine.path},
    )


def _resolve_gamma(spec: NormBoundSpec, Gamma) -> tuple[OrderSequence, str]:
    if Gamma is None or Gamma == "equal-B":
        return spec.B, "equal-B"
    if isinstance(Gamma, str):
        return OrderSequence(Gamma), Gamma
    return Gamma, Gamma.describe()


def dcbc_pod(n: int, s: int, spec: NormBoundSpec, Gamma=None, gamma1: float | None = None,
             naive: bool = False) -> ConstructionResult:
    """Double CBC for POD weights with fixed order factors ``Gamma``.

    ``Gamma`` is an :class:`OrderSequence`, a family name (``linear``,
    ``factorial``, ``one``) or ``"equal-B"`` / ``None`` for ``Gamma_l = B_l``.
    """
    Gseq, Gsource = _resolve_gamma(spec, Gamma)
    ratios = Gseq.ratios(s)
    if gamma1 is None:
        gamma1 = DEFAULT_GAMMA1
    if gamma1 <= 0:
        raise ValueError(f"gamma1 must be positive, got {gamma1!r}")
    b = spec.b(s)
    engine = CbcEngine(n, naive=naive)
    table = PodTable(n, s, ratios)
    norm = norm_bound_pod_step(PodNormState.initial(spec.B.ratios(s), ratios), b[0], gamma1)
    gamma = np.empty(s)
    gamma[0] = gamma1
    z = [1]
    om = engine.omega(1)
    e2 = [gamma1 * kernel_average(n, 1, table.combined())]
    M = [norm.M]
    table.append(gamma1, om)
    for i in range(1, s):
        v = table.combined()
        pick = engine.choose(v)
        z.append(pick.argmin)
        om = engine.omega(pick.argmin)
        G = kernel_average(n, pick.argmin, v)
        Hsum = float(np.sum(norm.H[: i + 1]))
        g = lemma_minimizer(MinimizerInputs(e2[-1], G, norm.M, b[i] ** 2 * Hsum))
        gamma[i] = g
        e2.append(e2[-1] + g * G)
        norm = norm_bound_pod_step(norm, b[i], g)
        M.append(norm.M)
        table.append(g, om)
    return ConstructionResult(
        gv=GeneratingVector(n, tuple(z)),
        scheme=WeightScheme.pod(gamma, ratios),
        e2_history=np.array(e2),
        M_history=np.array(M),
        meta={"algorithm": "dcbc-pod", "n": n, "s": s, "spec": spec.describe(),
              "Gamma": Gsource, "gamma1": gamma1, "kernel": engine.path},
    )


# ---------------------------------------------------------------------------
# iterated CBC


def _lambda_parts(spec: NormBoundSpec, s: int, lam: float):
    """Weights ``gamma_j(lam)``, order ratios and the log-derivative pieces.

    ``gamma_u'/gamma_u = alpha[|u|] + sum_{j in u} beta[j]``.
    """
    b = spec.b(s)
    logc = lambda_log_c(b, lam)
    gamma = np.exp(logc / (1.0 + lam))
    B_ratios = spec.B.ratios(s)
    Gamma_ratios = B_ratios ** (1.0 / (1.0 + lam))
    dlogc = LOG_2PI2 - 2.0 * zeta_prime(2.0 * lam) / zeta(2.0 * lam)
    beta = -logc / (1.0 + lam) ** 2 + dlogc / (1.0 + lam)
    alpha = -spec.B.log_values(s) / (1.0 + lam) ** 2
    return b, gamma, B_ratios, Gamma_ratios, alpha, beta


def _objective_product(gv, b, gamma, beta):
    n = gv.n
    P = np.ones(n)
    Q = np.zeros(n)
    e2 = S1 = 0.0
    M = 1.0
    S2 = 0.0
    for j, zj in enumerate(gv.z):
        w = gamma[j] * omega_row(n, zj)
        e2 += float(np.mean(w * P))
        S1 += float(np.mean(w * (Q + beta[j] * P)))
        Q = Q * (1.0 + w) + beta[j] * w * P
        P = P * (1.0 + w)
        x = b[j] ** 2 / gamma[j]
        S2 = S2 * (1.0 + x) + beta[j] * x * M
        M *= 1.0 + x
    return e2, S1, M, S2


def _objective_pod(gv, b, gamma, B_ratios, Gamma_ratios, alpha, beta):
    n, s = gv.n, gv.s
    p = np.zeros((s + 1, n))
    q = np.zeros((s + 1, n))
    p[0] = 1.0
    h = np.zeros(s + 1)
    hq = np.zeros(s + 1)
    h[0] = 1.0
    c = B_ratios / Gamma_ratios
    e2 = S1 = 0.0
    top = 0  # highest populated layer of p
    for j, zj in enumerate(gv.z):
        w = gamma[j] * omega_row(n, zj)
        L = top + 1
        g = Gamma_ratios[:L]
        # layer sums of the new sets only need p @ w and q @ w
        pw = p[:L] @ w
        qw = q[:L] @ w
        e2 += float(g @ pw) / n
        S1 += float((alpha[1 : L + 1] * g) @ pw + g @ (qw + beta[j] * pw)) / n
        dq = q[:L] + beta[j] * p[:L]
        dq *= w
        dq *= g[:, None]
        q[1 : L + 1] += dq
        dp = p[:L] * w
        dp *= g[:, None]
        p[1 : L + 1] += dp
        if L <= s and np.max(np.abs(p[L])) > LAYER_FLOOR:
            top = L
        x = b[j] ** 2 / gamma[j]
        m = j + 1
        dh = c[:m] * x * h[:m]
        dhq = c[:m] * x * (hq[:m] + beta[j] * h[:m])
        h[1 : m + 1] += dh
        hq[1 : m + 1] += dhq
    M = float(np.sum(h))
    S2 = float(alpha @ h + np.sum(hq))
    return e2, S1, M, S2


def icbc_objective(gv: GeneratingVector, spec: NormBoundSpec, lam: float) -> tuple[float, float]:
    """Squared bound ``E^2 = e^2 M`` for weights ``gamma(lam)`` and fixed ``gv``,
    together with its derivative in ``lam``."""
    check_lambda(lam)
    s = gv.s
    b, gamma, B_ratios, Gamma_ratios, alpha, beta = _lambda_parts(spec, s, lam)
    if spec.product_form:
        e2, S1, M, S2 = _objective_product(gv, b, gamma, beta)
    else:
        e2, S1, M, S2 = _objective_pod(gv, b, gamma, B_ratios, Gamma_ratios, alpha, beta)
    return e2 * M, S1 * M - e2 * S2


def icbc_objective_derivative(gv: GeneratingVector, spec: NormBoundSpec, lam: float) -> float:
    """``d/dlam`` of the squared bound ``E^2_{n,s,z}(lam)`` with ``z`` fixed."""
    return icbc_objective(gv, spec, lam)[1]


def minimize_on_interval(f, lo: float, hi: float, x0: float, fx0=None,
                         xtol: float = LAMBDA_XTOL, maxiter: int = 60):
    """Minimise a smooth 1-D function on ``[lo, hi]`` from its derivative.

    ``f(x)`` returns ``(value, derivative)``. Secant steps on the derivative
    are kept inside a sign-change bracket; a bisection is taken instead when
    the step leaves the bracket or two steps fail to halve it. Returns
    ``(x, value, derivative, at_boundary, evaluations)``.
    """
    evals = []

    def call(x):
        v = f(x)
        evals.append((x, v[0], v[1]))
        return v

    x0 = min(max(x0, lo), hi)
    v0 = call(x0) if fx0 is None else fx0
    if v0[1] == 0:
        return x0, v0[0], v0[1], x0 in (lo, hi), evals
    # bracket the stationary point on the side the derivative points to
    if v0[1] > 0:
        edge, edge_sign = lo, 1.0
    else:
        edge, edge_sign = hi, -1.0
    if x0 == edge:
        return x0, v0[0], v0[1], True, evals
    ve = call(edge)
    if edge_sign * ve[1] >= 0:
        return edge, ve[0], ve[1], True, evals
    (a, va), (b, vb) = sorted([(x0, v0), (edge, ve)], key=lambda t: t[0])

    x1, d1 = a, va[1]
    x2, d2 = b, vb[1]
    width_ref = b - a
    for it in range(maxiter):
        if b - a < 2.0 * xtol:
            break
        mid = 0.5 * (a + b)
        x = x2 - d2 * (x2 - x1) / (d2 - d1) if d2 != d1 else mid
        if not a < x < b or (it % 2 == 1 and b - a > 0.5 * width_ref):
            x = mid
        if abs(x - x2) < xtol:
            # a tiny secant step cannot shrink the bracket; step by xtol instead
            x = x2 + math.copysign(xtol, x - x2)
            if not a < x < b:
                x = mid
        if it % 2 == 1:
            width_ref = b - a
        v = call(x)
        if v[1] < 0:
            a = x
        elif v[1] > 0:
            b = x
        else:
            a = b = x
        x1, d1 = x2, d2
        x2, d2 = x, v[1]
    inside = [e for e in evals if lo <= e[0] <= hi]
    xb, fb, db = min(inside, key=lambda e: e[1])
    return xb, fb, db, False, evals


@dataclass
class IcbcTrace:
    """Outer iterations ``(lam_k, z_k, E_k, dE2_k)`` of the iterated CBC."""

    iterates: list = field(default_factory=list)
    lambda_star: float = float("nan")
    stop_reason: str = ""
    inner_evaluations: int = 0


def icbc(n: int, s: int, spec: NormBoundSpec, lambda0: float = 0.75, tau: float = 1e-3,
         k_max: int = 10, naive: bool = False) -> tuple[ConstructionResult, IcbcTrace]:
    """Iterated CBC over the ``lam``-indexed optimal POD weight family.

    Stops when ``|dE^2/dlam| < tau * E^2`` at the current iterate, when a new
    ``lam`` repeats an earlier one, or after ``k_max`` refinements. The
    iterate with the smallest bound is returned.
    """
    check_lambda(lambda0)
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau!r}")
    if k_max < 1:
        raise ValueError(f"k_max must be at least 1, got {k_max!r}")
    lo, hi = 0.5 + LAMBDA_EPS, 1.0
    trace = IcbcTrace()
    results = []
    lam = lambda0
    for k in range(k_max + 1):
        scheme = lambda_weights(spec, lam, s)
        if spec.product_form:
            res = cbc_product(n, s, scheme.gamma, spec, naive=naive)
        else:
            res = cbc_pod(n, s, scheme, spec, naive=naive)
        E2, dE2 = icbc_objective(res.gv, spec, lam)
        trace.iterates.append((lam, res.gv, math.sqrt(E2), dE2))
        results.append(res)
        if abs(dE2) < tau * E2:
            trace.stop_reason = "gradient-below-tau"
            break
        if k == k_max:
            trace.stop_reason = "max-iterations"
            break
        x, _, _, at_edge, evals = minimize_on_interval(
            lambda t, gv=res.gv: icbc_objective(gv, spec, t), lo, hi, lam, fx0=(E2, dE2))
        trace.inner_evaluations += len(evals)
        if any(abs(x - it[0]) < CYCLE_TOL for it in trace.iterates):
            trace.stop_reason = "boundary" if at_edge else "cycle-detected"
            break
        lam = x
    best = min(range(len(results)), key=lambda i: trace.iterates[i][2])
    lam_star = trace.iterates[best][0]
    trace.lambda_star = lam_star
    out = results[best]
    out.meta.update({
        "algorithm": "icbc", "lambda_star": lam_star, "lambda0": lambda0, "tau": tau,
        "k_max": k_max, "stop_reason": trace.stop_reason,
        "lambda_trace": [it[0] for it in trace.iterates],
    })
    return out, trace
