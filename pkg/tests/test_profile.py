import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qes2.errors import AmbiguousBranchError, DomainError, InvalidParameterError, NotApplicableError
from qes2.profile import (
    Branch,
    ModelParams,
    alpha,
    eval_B,
    first_order_residual,
    first_order_rhs,
    make_profile,
    ode_lhs,
    ode_residual,
)


def prof(m, lam, c, b=0.0, branch=Branch.NON_CLOSED):
    return make_profile(ModelParams(m=m, lam=lam, c=c, b=b, branch=branch))


def fd5(f, x, h):
    return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12.0 * h)


class Perturbed:
    """B + eps x^2 with the same parameters; no longer solves the ODE."""

    def __init__(self, base, eps):
        self.base, self.eps, self.params = base, eps, base.params

    def value(self, x):
        return self.base.value(x) + self.eps * x * x

    def derivative(self, x):
        return self.base.derivative(x) + 2.0 * self.eps * x


# -- closed forms ---------------------------------------------------------

def test_kerr_closed_form():
    p = prof(2, 0, 1)
    xs = np.linspace(-10, 10, 1001)
    assert np.max(np.abs(p.value(xs) - (1 - xs**2) / (1 + xs**2))) <= 1e-12


@pytest.mark.parametrize("lam, c", [(0.0, 1.0), (1.0, 2.5), (-3.0, 0.7)])
def test_m2_reduction(lam, c):
    p = prof(2, lam, c)
    xs = np.linspace(-6, 6, 601)
    ref = c * (1 - xs**2) / (1 + xs**2) - lam * (1 + xs**2) / 3.0
    assert np.max(np.abs(p.value(xs) - ref) / np.maximum(1.0, np.abs(ref))) <= 1e-12


def test_m_minus_one_closed_form():
    p = prof(-1, 1, 1)
    xs = np.linspace(-5, 5, 201)
    ref = -xs * np.arcsinh(xs) * np.sqrt(xs**2 + 1) + (xs**2 + 1)
    assert np.allclose(p.value(xs), ref, rtol=1e-14, atol=1e-14)


def test_closed_log_branch():
    p = prof(1, 0, 0, b=1, branch=Branch.CLOSED)
    xs = np.array([0.3, 1.0, 4.0])
    assert np.allclose(p.value(xs), np.log(xs), rtol=1e-15)


def test_eval_at_kerr_root():
    ev = eval_B(prof(2, 0, 1), 1.0)
    assert ev.B == pytest.approx(0.0, abs=1e-15)
    assert ev.B1 == pytest.approx(-1.0, rel=1e-12)
    assert ev.B2 == pytest.approx(1.0, rel=1e-12)


def test_value_at_origin_is_alpha():
    p = prof(3, 1, 1)
    assert p.value(0.0) == pytest.approx(0.75, abs=1e-15)
    assert p.alpha == 0.75
    assert alpha(-1, 2.0, 0.4) == 0.4
    ev = eval_B(p, 0.0)
    assert ev.B1 == 0.0
    assert ev.B2 == pytest.approx(-2.0 - 2 * 3 * 0.75, rel=1e-14)


# -- ODE and first-order identity ---------------------------------------------

def test_ode_residual_examples():
    assert abs(ode_residual(prof(2, 0, 1), 0.5)) <= 1e-10
    assert abs(ode_residual(prof(-1, 1, 1), 1.2)) <= 1e-8


def test_ode_residual_detects_perturbation():
    eps = 1e-3
    r = ode_residual(Perturbed(prof(2, 0, 1), eps), 1.0)
    # eps * (2 + m (2 x^2 u + 2 x^2) / u^2) at m = 2, x = 1
    assert r == pytest.approx(5.0 * eps, rel=1e-6)
    assert abs(r) > 1e-5


def _draw_nonclosed(data):
    m = data.draw(st.floats(-4.0, 4.0).filter(lambda v: abs(v) > 0.05 and abs(v + 1) > 0.05))
    lam = data.draw(st.floats(-2.0, 2.0))
    c = data.draw(st.floats(-3.0, 3.0))
    b = data.draw(st.floats(-2.0, 2.0))
    return prof(m, lam, c, b)


@settings(max_examples=20, deadline=None)
@given(st.data())
def test_ode_closure_general_branch(data):
    p = _draw_nonclosed(data)
    for x in np.linspace(-5, 5, 41):
        assert abs(ode_residual(p, x)) <= 1e-8 * (1 + abs(p.second_derivative(x)))


@settings(max_examples=20, deadline=None)
@given(st.floats(-2.0, 2.0), st.floats(-3.0, 3.0), st.floats(-2.0, 2.0))
def test_ode_closure_m_minus_one(lam, c, b):
    p = prof(-1, lam, c, b)
    for x in np.linspace(-5, 5, 41):
        assert abs(ode_residual(p, x)) <= 1e-8 * (1 + abs(p.second_derivative(x)))


@settings(max_examples=20, deadline=None)
@given(
    st.sampled_from([-3.0, -1.0, 0.5, 1.0, 2.0, 3.0]),
    st.floats(-2.0, 2.0),
    st.floats(-3.0, 3.0),
    st.floats(-2.0, 2.0),
)
def test_ode_closure_closed_branches(m, lam, c, b):
    p = prof(m, lam, c, b, branch=Branch.CLOSED)
    for x in np.linspace(0.2, 5, 25):
        assert abs(ode_residual(p, x)) <= 1e-8 * (1 + abs(p.second_derivative(x)))


@settings(max_examples=30, deadline=None)
@given(st.data())
def test_derivative_matches_finite_difference(data):
    p = _draw_nonclosed(data)
    for x in np.linspace(-4, 4, 33):
        fd = fd5(p.value, x, 1e-3)
        assert abs(p.derivative(x) - fd) <= 1e-8 * (1 + abs(fd))


@pytest.mark.parametrize("params", [(3, 1, 1), (-0.5, 1, 3), (2.5, -1, 4)])
def test_derivative_near_axis_uses_consistent_series(params):
    p = prof(*params)
    for x in [3e-5, 9.9e-5, 1.01e-4, 3e-4]:
        assert p.derivative(x) == pytest.approx(fd5(p.value, x, 1e-5), rel=1e-6, abs=1e-10)


@settings(max_examples=30, deadline=None)
@given(
    st.floats(-4.0, 4.0).filter(lambda v: abs(v) > 0.05),
    st.floats(-2.0, 2.0),
    st.floats(-3.0, 3.0),
)
def test_parity(m, lam, c):
    p = prof(m, lam, c)
    xs = np.linspace(0, 8, 1000)
    assert np.array_equal(p.value(xs), p.value(-xs))


@settings(max_examples=30, deadline=None)
@given(
    st.floats(-4.0, 4.0).filter(lambda v: abs(v) > 0.05 and abs(v + 1) > 0.05),
    st.floats(-2.0, 2.0),
    st.floats(-3.0, 3.0),
    st.floats(0.1, 2.0),
)
def test_parity_decomposition(m, lam, c, b):
    even, full = prof(m, lam, c), prof(m, lam, c, b)
    xs = np.linspace(0.01, 6, 200)
    d_plus = full.value(xs) - even.value(xs)
    d_minus = full.value(-xs) - even.value(-xs)
    assert np.allclose(d_plus, -d_minus, rtol=1e-12, atol=1e-12)
    assert np.allclose(d_plus, b * xs * (1 + xs**2) ** (-0.5 * m), rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("params, x", [((2, 0, 1), 1.5), ((3, 1, 1), 0.8), ((-1, 1, 1), -1.1)])
def test_first_order_identity(params, x):
    p = prof(*params)
    assert abs(first_order_residual(p, x)) <= 1e-7 * max(1.0, abs(first_order_rhs(p, x)))


def test_first_order_identity_near_axis_is_finite():
    r = first_order_residual(prof(2, 0, 1), 1e-6)
    assert math.isfinite(r)


def test_first_order_identity_needs_even_profile():
    with pytest.raises(NotApplicableError):
        first_order_residual(prof(2, 0, 1, b=0.5), 1.0)


def test_ode_lhs_matches_second_derivative_route():
    p = prof(1.5, 0.3, 2.0)
    x = 0.7
    ev = eval_B(p, x)
    assert ode_lhs(1.5, 0.3, 1.0, x, ev.B, ev.B1, ev.B2) == pytest.approx(0.0, abs=1e-14)


# -- errors -----------------------------------------------------------------

def test_zero_m():
    with pytest.raises(InvalidParameterError):
        ModelParams(m=0, lam=1, c=1)


@pytest.mark.parametrize("m", [-1 + 1e-13, 1 - 5e-13])
def test_ambiguous_branch(m):
    with pytest.raises(AmbiguousBranchError):
        make_profile(ModelParams(m=m, lam=0, c=1))


def test_exact_branch_points_are_not_ambiguous():
    make_profile(ModelParams(m=-1.0, lam=1, c=1))
    make_profile(ModelParams(m=1.0, lam=1, c=1, branch=Branch.CLOSED))


def test_closed_domain_error():
    p = prof(1, 0, 0, b=1, branch=Branch.CLOSED)
    with pytest.raises(DomainError):
        p.value(-0.5)
    with pytest.raises(DomainError):
        p.value(np.array([0.5, 0.0]))
