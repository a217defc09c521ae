import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lattice_cbc.weights import (
    CoordinateSequence, NormBoundSpec, OrderSequence, PodNormState, WeightScheme,
    lambda_weights, lambda_weights_derivative, norm_bound, norm_bound_bruteforce,
    norm_bound_pod_step, norm_bound_product,
)


def _subset_M(b, B_values, scheme):
    return norm_bound_bruteforce(b, B_values, scheme.weight)


def test_coordinate_families():
    assert np.allclose(CoordinateSequence("poly", 2)(3), [1, 0.25, 1 / 9])
    assert np.allclose(CoordinateSequence("geo", 0.5)(3), [0.5, 0.25, 0.125])
    assert np.allclose(CoordinateSequence("const", 0.3)(2), [0.3, 0.3])
    with pytest.raises(ValueError):
        CoordinateSequence("explicit", values=(1.0, -1.0))
    with pytest.raises(ValueError):
        CoordinateSequence("explicit", values=(1.0,))(2)


def test_order_ratios_reproduce_explicit_values():
    vals = (2.0, 6.0, 30.0, 24.0)
    seq = OrderSequence("explicit", vals)
    assert np.allclose(seq.values_upto(4)[1:], vals, rtol=1e-14)
    assert np.allclose(OrderSequence("factorial").values_upto(5), [1, 1, 2, 6, 24, 120])
    assert np.allclose(OrderSequence("linear").values_upto(4), [1, 1, 2, 3, 4])


def test_factorial_ratios_at_s100_stay_finite():
    seq = OrderSequence("factorial")
    r = seq.ratios(100)
    assert np.all(np.isfinite(r)) and r[-1] == 100
    assert seq.log_values(100)[-1] == pytest.approx(math.lgamma(101), rel=1e-13)
    spec = NormBoundSpec(CoordinateSequence("poly", 2), seq)
    M = norm_bound(spec.b(100), lambda_weights(spec, 0.7, 100), seq.ratios(100))
    assert np.all(np.isfinite(M)) and np.all(np.diff(M) > 0)


def test_weight_reconstruction():
    sch = WeightScheme.pod([0.5, 0.25, 2.0], [1.0, 2.0, 3.0])
    assert sch.weight((1, 3)) == pytest.approx(2 * 0.5 * 2.0)
    assert sch.weight((1, 2, 3)) == pytest.approx(6 * 0.25)
    assert WeightScheme.product([0.5, 0.25]).weight((1, 2)) == pytest.approx(0.125)
    od = WeightScheme("order-dependent", Gamma_ratios=[2.0, 3.0])
    assert od.weight((2,)) == 2.0 and od.weight((1, 2)) == 6.0
    with pytest.raises(ValueError):
        WeightScheme.product([1.0, 0.0])


@pytest.mark.parametrize("b,gamma,expected", [
    ((1, 1), (1, 1), 4.0),
    ((1,), (0.5,), 3.0),
    ((1, 0.25, 1 / 9), (1, 0.25, 1 / 9), 2 * 1.25 * (1 + 1 / 9)),
])
def test_norm_bound_product_examples(b, gamma, expected):
    assert norm_bound_product(b, gamma) == pytest.approx(expected, rel=1e-14)


def test_norm_bound_pod_examples():
    M = norm_bound(np.ones(2), WeightScheme.pod([1, 1], [1, 2]), np.array([1.0, 2.0]))
    assert M[-1] == pytest.approx(4.0, rel=1e-14)
    M = norm_bound(np.ones(1), WeightScheme.pod([1], [1]), np.array([2.0]))
    assert M[-1] == pytest.approx(3.0, rel=1e-14)


def test_pod_state_invariants():
    B_r, G_r = np.array([2.0, 1.5, 3.0]), np.array([1.0, 2.0, 0.5])
    st_ = PodNormState.initial(B_r, G_r)
    for i, (b, g) in enumerate([(0.7, 0.3), (0.2, 1.1), (0.9, 0.4)], start=1):
        st_ = norm_bound_pod_step(st_, b, g)
        assert st_.H[0] == pytest.approx(B_r[0] / G_r[0])
        assert np.all(st_.H[i + 1:] == 0)
        assert st_.M >= 1


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 20), st.integers(0, 2 ** 31))
def test_equal_order_factors_reduce_to_product(s, seed):
    rng = np.random.default_rng(seed)
    b = rng.uniform(0.05, 2, s)
    gamma = rng.uniform(0.05, 2, s)
    B = rng.uniform(0.5, 3, s)
    M_pod = norm_bound(b, WeightScheme.pod(gamma, B), B)
    prod = [norm_bound_product(b, gamma, k) for k in range(1, s + 1)]
    assert np.allclose(M_pod, prod, rtol=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 10), st.integers(0, 2 ** 31))
def test_norm_bound_matches_subset_sum(s, seed):
    rng = np.random.default_rng(seed)
    b = rng.uniform(0.05, 2, s)
    B_ratios = rng.uniform(0.3, 4, s)
    sch = WeightScheme.pod(rng.uniform(0.05, 2, s), rng.uniform(0.3, 4, s))
    B_values = np.concatenate(([1.0], np.cumprod(B_ratios)))
    got = norm_bound(b, sch, B_ratios)[-1]
    assert got == pytest.approx(_subset_M(b, B_values, sch), rel=1e-12)


def test_lambda_weights_closed_forms():
    spec = NormBoundSpec(CoordinateSequence("geo", 0.5), OrderSequence("factorial"))
    w = lambda_weights(spec, 1.0, 4)
    assert np.allclose(w.gamma, math.sqrt(6) * 0.5 ** np.arange(1, 5), rtol=1e-13)
    assert np.allclose(np.cumprod(w.Gamma_ratios), np.sqrt([1, 2, 6, 24]), rtol=1e-13)

    mpmath.mp.dps = 30
    lam = mpmath.mpf("0.6")
    ref = ((2 * mpmath.pi ** 2) ** lam * mpmath.mpf("0.25") / (2 * mpmath.zeta(2 * lam))) ** (1 / (1 + lam))
    w = lambda_weights(NormBoundSpec(CoordinateSequence("const", 0.5)), 0.6, 2)
    assert w.gamma[0] == pytest.approx(float(ref), rel=1e-13)


def test_lambda_weights_continuous():
    spec = NormBoundSpec(CoordinateSequence("poly", 2), OrderSequence("linear"))
    a, b = lambda_weights(spec, 0.8, 10), lambda_weights(spec, 0.8 + 1e-9, 10)
    for u in [(1,), (2, 5), (1, 3, 7, 10)]:
        assert abs(a.weight(u) - b.weight(u)) <= 1e-6 * a.weight(u)


def _gamma_u(spec, lam, u):
    return lambda_weights(spec, lam, max(u)).weight(u)


@pytest.mark.parametrize("B", ["one", "linear", "factorial"])
@pytest.mark.parametrize("u", [(1,), (2, 3), (1, 2, 4)])
def test_weight_derivative_finite_difference(B, u):
    spec = NormBoundSpec(CoordinateSequence("geo", 0.5), OrderSequence(B))
    lam, h = 0.75, 1e-6
    logb = sum(2 * math.log(0.5 ** j) for j in u)
    d = lambda_weights_derivative(spec, lam, len(u), logb)
    fd = (_gamma_u(spec, lam + h, u) - _gamma_u(spec, lam - h, u)) / (2 * h)
    assert d == pytest.approx(fd, rel=1e-6)


def test_weight_derivative_unit_weight():
    # b chosen so that gamma_{j}(1) = 1
    mpmath.mp.dps = 30
    spec = NormBoundSpec(CoordinateSequence("const", 1 / math.sqrt(6)))
    d = lambda_weights_derivative(spec, 1.0, 1, 2 * math.log(1 / math.sqrt(6)))
    ref = (mpmath.log(2 * mpmath.pi ** 2) - 2 * mpmath.zeta(2, derivative=1) / mpmath.zeta(2)) / 2
    assert d == pytest.approx(float(ref), rel=1e-9)


def test_weight_derivative_sign_matches_grid_slope():
    spec = NormBoundSpec(CoordinateSequence("const", 0.01))
    grid = np.linspace(0.55, 1.0, 10)
    vals = [_gamma_u(spec, l, (1, 2)) for l in grid]
    assert max(vals) < 1
    logb = 2 * 2 * math.log(0.01)
    for l, slope in zip(grid[:-1], np.diff(vals)):
        assert np.sign(lambda_weights_derivative(spec, l, 2, logb)) == np.sign(slope)
