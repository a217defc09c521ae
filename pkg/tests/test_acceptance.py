"""Acceptance gate: one test and one printed verdict line per criterion.

The table criteria share a single full-grid reproduction (``s = 100``,
``n = 251 .. 32003``, all eight tables), which takes several minutes.
"""

import itertools
import math
import time

import mpmath
import numpy as np
import pytest

from lattice_cbc.construct import (
    MinimizerInputs, dcbc_pod, dcbc_product, icbc_objective, icbc_objective_derivative,
)
from lattice_cbc.engine import KernelColumn, cbc_pod, cbc_product, kernel_matvec, naive_matvec
from lattice_cbc.numerics import is_prime, units, zeta, zeta_prime
from lattice_cbc.reference import GRID
from lattice_cbc.tables import TABLES, reproduce
from lattice_cbc.wce import (
    GeneratingVector, omega_row, wce_bruteforce, wce_pod_fixed_z, wce_product, wce_upper_bound,
)
from lattice_cbc.weights import (
    CoordinateSequence, NormBoundSpec, OrderSequence, WeightScheme, lambda_weights,
    lambda_weights_derivative, norm_bound, norm_bound_bruteforce,
)

from conftest import SMALL_PRIMES, record_criterion

PRIMES_509 = [p for p in range(3, 510) if is_prime(p)]
LAMBDA_GRID = [round(0.55 + 0.05 * k, 2) for k in range(10)]


@pytest.fixture(scope="module")
def reproduction():
    return reproduce()


def _cells(rep, pred):
    return [c for c in rep.cells if pred(c)]


def _describe(cells, limit=8):
    parts = [f"T{c.table} {c.column} n={c.n}: {c.value:.4e} vs {c.published:g} "
             f"(dev {c.deviation:.3f})" for c in cells[:limit]]
    more = f" (+{len(cells) - limit} more)" if len(cells) > limit else ""
    return "; ".join(parts) + more


# 1 --------------------------------------------------------------------------

def test_criterion_01_deterministic_columns(reproduction):
    rep = reproduction
    cells = _cells(rep, lambda c: c.table in (1, 2, 3) and c.deterministic and c.n is not None)
    bad = [c for c in cells if not c.ok]
    fast = rep.wall_time < 30 * 60
    ok = not bad and fast and len(cells) == 3 * 4 * len(GRID)
    detail = (f"{len(cells) - len(bad)}/{len(cells)} cells within 2% at 2 s.f.; "
              f"all 8 tables in {rep.wall_time / 60:.1f} min")
    if bad:
        detail += "; outside: " + _describe(bad)
    record_criterion(1, ok, detail)
    assert ok, detail


# 2 --------------------------------------------------------------------------

def _abs_subset_sum(gv, sch):
    """Sum of |terms| of the subset expansion of e^2, for the rounding bound."""
    n, s = gv.n, gv.s
    gamma, ratios = sch.gamma, sch.Gamma_ratios
    p = np.zeros((s + 1, n))
    p[0] = 1.0
    total = 0.0
    for i, z in enumerate(gv.z):
        d = (ratios[: i + 1, None] * gamma[i]) * np.abs(omega_row(n, z)) * p[: i + 1]
        total += d.sum() / n
        p[1 : i + 2] += d
    return total


def test_criterion_02_dcbc_icbc_cells_and_certificates(reproduction):
    rep = reproduction
    cells = _cells(rep, lambda c: not c.deterministic and c.n is not None
                   and c.column not in ("lambda*",) and c.table != 4)
    bad = [c for c in cells if not c.ok]
    # E^2 = e^2 M to a few ulps; e^2 within the float rounding bound
    # s * eps * kappa of the exact-arithmetic brute force, where kappa is the
    # sum of absolute subset terms over e^2 (cancellation grows it with n)
    worst_cert = worst_ratio = worst_prod = 0.0
    seen = set()
    for (t, name, n), res in rep.runs.items():
        col = next(c for c in TABLES[t] if c.name == name)
        if col.kind not in ("dcbc", "icbc") or id(res) in seen:
            continue
        seen.add(id(res))
        E = res.E_history
        worst_prod = max(worst_prod, float(np.max(np.abs(E ** 2 - res.e2_history * res.M_history)
                                                  / (res.e2_history * res.M_history))))
        sch = res.scheme.as_pod().truncated(8)
        gv8 = res.gv.prefix(8)
        e2 = wce_bruteforce(gv8, sch, exact=True) ** 2
        err = abs(e2 - res.e2_history[7]) / e2
        kappa = _abs_subset_sum(gv8, sch) / e2
        worst_cert = max(worst_cert, err)
        worst_ratio = max(worst_ratio, err / (8 * np.finfo(float).eps * kappa))
    ok = not bad and worst_prod <= 1e-14 and worst_ratio <= 1.0
    detail = (f"{len(cells) - len(bad)}/{len(cells)} cells within 25%; {len(seen)} runs certified: "
              f"E^2 vs e^2 M {worst_prod:.1e}, e^2 vs exact brute force {worst_cert:.1e} "
              f"({worst_ratio:.3f} of the s*eps*kappa rounding bound)")
    if bad:
        detail += "; outside: " + _describe(bad)
    record_criterion(2, ok, detail)
    assert ok, detail


# 3 --------------------------------------------------------------------------

def test_criterion_03_rate_rows(reproduction):
    rep = reproduction
    rates = _cells(rep, lambda c: c.n is None)
    bad = [c for c in rates if not c.ok]
    worst_det = max(c.deviation for c in rates if c.deterministic)
    worst_var = max(c.deviation for c in rates if not c.deterministic)
    ok = not bad and len(rates) > 0
    detail = (f"{len(rates) - len(bad)}/{len(rates)} rates within tolerance; worst deviation "
              f"{worst_det:.3f} (deterministic, tol 0.03), {worst_var:.3f} (DCBC/ICBC, tol 0.06)")
    if bad:
        detail += "; outside: " + "; ".join(
            f"T{c.table} {c.column}: {c.value:.3f} vs {c.published}" for c in bad)
    record_criterion(3, ok, detail)
    assert ok, detail


# 4 --------------------------------------------------------------------------

def test_criterion_04_lambda_star_trend(reproduction):
    rep = reproduction
    cells = _cells(rep, lambda c: c.table == 4)
    bad = [c for c in cells if not c.ok]
    nonmono = []
    for col in TABLES[4]:
        vals = rep.values[(4, col.name)]
        nonmono += [(col.name, a, b) for a, b in zip(vals, vals[1:]) if b > a + 0.005]
    worst = max(c.deviation for c in cells)
    ok = not bad and not nonmono
    detail = f"{len(cells) - len(bad)}/{len(cells)} cells within 0.02 (worst {worst:.4f}); " \
             f"{'weakly decreasing' if not nonmono else 'increase beyond 0.005: ' + str(nonmono)}"
    if bad:
        detail += "; outside: " + _describe(bad)
    record_criterion(4, ok, detail)
    assert ok, detail


# 5 --------------------------------------------------------------------------

def test_criterion_05_oracle_equivalence():
    rng = np.random.default_rng(5)
    t0 = time.perf_counter()
    worst_e, worst_M = 0.0, 0.0
    for _ in range(500):
        n = int(rng.choice(SMALL_PRIMES))
        s = int(rng.integers(1, 9))
        gv = GeneratingVector(n, tuple(int(z) for z in rng.choice(units(n), s)))
        gamma = rng.uniform(0.01, 2.0, s)
        b = rng.uniform(0.05, 2.0, s)
        if rng.integers(2):
            sch = WeightScheme.product(gamma)
            e2 = wce_product(gv, gamma)[-1]
            B_ratios = np.ones(s)
        else:
            sch = WeightScheme.pod(gamma, rng.uniform(0.2, 4.0, s))
            e2 = wce_pod_fixed_z(gv, sch) ** 2
            B_ratios = rng.uniform(0.2, 4.0, s)
        ref = wce_bruteforce(gv, sch) ** 2
        worst_e = max(worst_e, abs(e2 - ref) / ref)
        M = norm_bound(b, sch, B_ratios)[-1]
        Mref = norm_bound_bruteforce(b, np.concatenate(([1.0], np.cumprod(B_ratios))), sch.weight)
        worst_M = max(worst_M, abs(M - Mref) / Mref)
    elapsed = time.perf_counter() - t0
    ok = worst_e <= 1e-12 and worst_M <= 1e-12 and elapsed < 60
    detail = f"500 instances: worst e^2 rel {worst_e:.1e}, worst M rel {worst_M:.1e}, {elapsed:.1f} s"
    record_criterion(5, ok, detail)
    assert ok, detail


# 6 --------------------------------------------------------------------------

def test_criterion_06_fast_kernel():
    rng = np.random.default_rng(6)
    worst = 0.0
    mismatched = []
    for n in PRIMES_509:
        col = KernelColumn.build(n)
        for _ in range(50):
            v = rng.uniform(-1.0, 2.0, n)
            fast = kernel_matvec(col, v)[1:]
            slow = naive_matvec(n, v)[1:]
            worst = max(worst, float(np.max(np.abs(fast - slow)) / np.max(np.abs(slow))))
        s = 10
        gamma = rng.uniform(0.01, 1.0, s)
        sch = WeightScheme.pod(gamma, rng.uniform(0.5, 2.0, s))
        if (cbc_product(n, s, gamma).gv.z != cbc_product(n, s, gamma, naive=True).gv.z
                or cbc_pod(n, s, sch).gv.z != cbc_pod(n, s, sch, naive=True).gv.z):
            mismatched.append(n)
    ok = worst <= 1e-10 and not mismatched
    detail = (f"{len(PRIMES_509)} primes x 50 vectors: worst relative difference {worst:.1e}; "
              f"identical vectors for {len(PRIMES_509) - len(mismatched)}/{len(PRIMES_509)} primes")
    record_criterion(6, ok, detail)
    assert ok, detail


# 7 --------------------------------------------------------------------------

def test_criterion_07_first_dimension_identity():
    worst = 0.0
    count = 0
    for n in (3, 5, 7, 251):
        for z in units(n):
            for g in (1.0, 0.3):
                e2 = wce_product(GeneratingVector(n, (int(z),)), [g])[-1]
                worst = max(worst, abs(e2 - g / (6 * n * n)) / (g / (6 * n * n)))
                count += 1
    ok = worst <= 1e-14
    detail = f"{count} cases, worst relative error {worst:.1e}"
    record_criterion(7, ok, detail)
    assert ok, detail


# 8 --------------------------------------------------------------------------

def _subset_objective(gv, spec, lam):
    s, n = gv.s, gv.n
    sch = lambda_weights(spec, lam, s)
    b = spec.b(s)
    B = spec.B.values_upto(s)
    rows = [omega_row(n, z) for z in gv.z]
    e2 = dE = dM = 0.0
    M = 1.0
    for size in range(1, s + 1):
        for u in itertools.combinations(range(s), size):
            g = sch.weight(tuple(j + 1 for j in u))
            logb = sum(2 * math.log(b[j]) for j in u)
            dg = lambda_weights_derivative(spec, lam, size, logb)
            K = np.prod([rows[j] for j in u], axis=0).mean()
            c = B[size] * math.exp(logb)
            e2 += g * K
            dE += dg * K
            M += c / g
            dM -= c * dg / (g * g)
    return dE * M + e2 * dM


def test_criterion_08_derivative():
    rng = np.random.default_rng(8)
    worst_fd = worst_bf = 0.0
    for B in ("one", "linear", "factorial"):
        for b in (CoordinateSequence("poly", 2), CoordinateSequence("geo", 0.6)):
            spec = NormBoundSpec(b, OrderSequence(B))
            gv = GeneratingVector(53, tuple(int(z) for z in rng.choice(units(53), 8)))
            for lam in (0.6, 0.75, 0.9):
                h = 1e-6
                fd = (icbc_objective(gv, spec, lam + h)[0] - icbc_objective(gv, spec, lam - h)[0]) / (2 * h)
                d = icbc_objective_derivative(gv, spec, lam)
                worst_fd = max(worst_fd, abs(d - fd) / abs(fd))
            for s in range(1, 7):
                gv6 = gv.prefix(s)
                for lam in (0.6, 0.75, 0.9):
                    ref = _subset_objective(gv6, spec, lam)
                    worst_bf = max(worst_bf, abs(icbc_objective_derivative(gv6, spec, lam) - ref) / abs(ref))
    ok = worst_fd <= 1e-6 and worst_bf <= 1e-11
    detail = f"finite differences: worst rel {worst_fd:.1e}; subset oracle s <= 6: worst rel {worst_bf:.1e}"
    record_criterion(8, ok, detail)
    assert ok, detail


# 9 --------------------------------------------------------------------------

def test_criterion_09_bound_dominance(reproduction):
    rng = np.random.default_rng(9)
    vectors = {id(r): r for r in reproduction.runs.values()}.values()
    extra = []
    for _ in range(50):
        n = int(rng.choice(PRIMES_509))
        s = int(rng.integers(1, 30))
        gamma = rng.uniform(0.01, 1.5, s)
        extra.append(cbc_product(n, s, gamma))
        extra.append(cbc_pod(n, s, WeightScheme.pod(gamma, rng.uniform(0.3, 3.0, s))))
    worst = 0.0
    checked = 0
    for res in list(vectors) + extra:
        sch = res.scheme
        e = math.sqrt(res.e2)
        for lam in LAMBDA_GRID:
            ub = wce_upper_bound(sch, res.gv.n, res.gv.s, lam)
            worst = max(worst, e / ub)
            checked += 1
    ok = worst <= 1.0
    detail = f"{checked} (vector, lambda) pairs; largest e / bound = {worst:.3f}"
    record_criterion(9, ok, detail)
    assert ok, detail


# 10 -------------------------------------------------------------------------

def test_criterion_10_per_step_optimality():
    rng = np.random.default_rng(10)
    grid = np.logspace(-8, 4, 10_000)
    steps = 0
    gamma_fail = z_fail = 0
    while steps < 100:
        n = int(rng.choice(PRIMES_509))
        s = int(rng.integers(3, 9))
        B = str(rng.choice(["one", "linear", "factorial"]))
        spec = NormBoundSpec(CoordinateSequence("geo", float(rng.uniform(0.3, 0.9))), OrderSequence(B))
        res = dcbc_product(n, s, spec) if B == "one" else dcbc_pod(n, s, spec)
        sch = res.scheme.as_pod()
        b = spec.b(s)
        ratios = sch.Gamma_ratios
        p = np.zeros((s + 1, n))
        p[0] = 1.0
        p[1] = ratios[0] * sch.gamma[0] * omega_row(n, 1)
        for i in range(1, s):
            # gamma_i against a log-grid scan of the step objective
            e2_prev, M_prev = res.e2_history[i - 1], res.M_history[i - 1]
            G = (res.e2_history[i] - e2_prev) / sch.gamma[i]
            M_i = norm_bound(b[: i + 1], sch.truncated(i + 1), spec.B.ratios(i + 1))[-1]
            c = (M_i - M_prev) * sch.gamma[i]
            h = lambda g: (e2_prev + g * G) * (M_prev + c / g)
            if h(sch.gamma[i]) > h(grid).min() * (1 + 1e-12):
                gamma_fail += 1
            # z_i against every candidate under the naive kernel
            v = ratios[: i + 1] @ p[: i + 1]
            scores = naive_matvec(n, v)
            z = res.gv.z[i]
            if scores[z] > np.nanmin(scores) + 1e-12 * np.abs(v).mean():
                z_fail += 1
            p[1 : i + 2] += (ratios[: i + 1, None] * sch.gamma[i]) * omega_row(n, z) * p[: i + 1]
            steps += 1
    ok = gamma_fail == 0 and z_fail == 0
    detail = f"{steps} DCBC steps: gamma beaten by grid {gamma_fail} times, z beaten by a candidate {z_fail} times"
    record_criterion(10, ok, detail)
    assert ok, detail


# 11 -------------------------------------------------------------------------

def _em_zeta(s, N=40, J=20):
    """Euler-Maclaurin at 50 digits with ``J`` Bernoulli corrections.

    Returns ``(zeta(s), zeta'(s))``; the derivative differentiates every
    term of the expansion analytically.
    """
    with mpmath.workdps(50):
        s = mpmath.mpf(s)
        N = mpmath.mpf(N)
        logN = mpmath.log(N)
        val = mpmath.fsum(mpmath.mpf(k) ** -s for k in range(1, int(N)))
        der = -mpmath.fsum(mpmath.log(k) * mpmath.mpf(k) ** -s for k in range(2, int(N)))
        val += N ** (1 - s) / (s - 1) + N ** -s / 2
        der += -logN * N ** (1 - s) / (s - 1) - N ** (1 - s) / (s - 1) ** 2 - logN * N ** -s / 2
        # rising factorial s (s+1) ... (s+2j-2) and its derivative
        r, dr = s, mpmath.mpf(1)
        for j in range(1, J + 1):
            c = mpmath.bernoulli(2 * j) / mpmath.factorial(2 * j)
            p = N ** (-s - 2 * j + 1)
            val += c * r * p
            der += c * (dr * p - r * logN * p)
            a, b = s + 2 * j - 1, s + 2 * j
            dr = dr * a * b + r * (a + b)
            r = r * a * b
        return val, der


def test_criterion_11_special_functions():
    z2 = abs(zeta(2.0) - math.pi ** 2 / 6) / (math.pi ** 2 / 6)
    grid = np.linspace(1.001, 2.0, 50)
    worst_z = worst_d = 0.0
    with mpmath.workdps(50):
        for s in grid:
            ref, dref = _em_zeta(s)
            assert abs(ref - mpmath.zeta(s)) < mpmath.mpf(10) ** -30
            assert abs(dref - mpmath.zeta(s, derivative=1)) < mpmath.mpf(10) ** -25
            worst_z = max(worst_z, float(abs(mpmath.mpf(zeta(float(s))) - ref) / abs(ref)))
            worst_d = max(worst_d, float(abs(mpmath.mpf(zeta_prime(float(s))) - dref) / abs(dref)))
    ok = z2 <= 1e-13 and worst_z <= 1e-12 and worst_d <= 1e-9
    detail = f"zeta(2) rel {z2:.1e}; 50-point grid: zeta rel {worst_z:.1e}, zeta' rel {worst_d:.1e}"
    record_criterion(11, ok, detail)
    assert ok, detail
