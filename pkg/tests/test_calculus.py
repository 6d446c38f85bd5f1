import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from gibbsform import calculus as calc
from gibbsform.calculus import (
    DomainError,
    Dual,
    QuadratureError,
    QuadratureSpec,
    RootError,
    ScalarField,
    adaptive_simpson,
    fd_gradient,
    gradient,
    hessian,
    integrate_one_form,
    second_partial,
    solve_bracketed,
)
from gibbsform.systems import EosConstraint


def test_dual_arithmetic_chain_rule():
    x = Dual(2.0, (1.0, 0.0))
    y = Dual(3.0, (0.0, 1.0))
    r = (x * y + x / y - 1) ** 2
    # hand derivative of (xy + x/y - 1)^2
    base = 6 + 2 / 3 - 1
    assert r.value == pytest.approx(base**2)
    assert r.partials[0] == pytest.approx(2 * base * (3 + 1 / 3))
    assert r.partials[1] == pytest.approx(2 * base * (2 - 2 / 9))
    assert (1 / x).partials[0] == pytest.approx(-0.25)
    assert (x**-2).partials[0] == pytest.approx(-2 / 8)
    assert calc.log(x).partials[0] == pytest.approx(0.5)
    assert calc.exp(x).partials[0] == pytest.approx(math.exp(2))
    assert (2.0**x).partials[0] == pytest.approx(4 * math.log(2))
    assert (x**y).partials[1] == pytest.approx(8 * math.log(2))


def test_dual_domain_errors():
    with pytest.raises(DomainError):
        calc.log(Dual(-1.0, (1.0,)))
    with pytest.raises(DomainError):
        calc.log(0.0)
    with pytest.raises(DomainError):
        Dual(-2.0, (1.0,)) ** 0.5


def test_gradient_examples():
    f = ScalarField(2, lambda q: q[0] * q[1])
    assert gradient(f, [3, 5]).tolist() == [5, 3]
    g = ScalarField(3, lambda q: -q[2] * q[0] * calc.log(q[1] / q[2]))
    assert gradient(g, [1, math.e, 1])[1] == pytest.approx(-1 / math.e, rel=1e-15)
    c = ScalarField(3, lambda q: 4.2)
    assert gradient(c, [1, 2, 3]).tolist() == [0, 0, 0]


def test_second_partial_examples():
    f = ScalarField(2, lambda q: q[0] ** 2 * q[1])
    assert second_partial(f, [2, 3], 0, 0) == 6
    assert second_partial(f, [2, 3], 0, 1) == 4 == second_partial(f, [2, 3], 1, 0)
    assert second_partial(f, [2, 3], 0, 1, method="fd") == pytest.approx(4, rel=1e-6)
    with pytest.raises(IndexError):
        second_partial(f, [2, 3], 0, 2)


def test_ideal_gas_mixed_partial_against_symbolic_oracle():
    T, V, N = sp.symbols("T V N", positive=True)
    F = -N * T * (sp.log(V / N) + sp.Rational(3, 2) * sp.log(T))
    want = float((-sp.diff(F, T, V)).subs({T: 1, V: sp.E, N: 1}))
    f = ScalarField(3, lambda q: -q[2] * q[0] * (calc.log(q[1] / q[2]) + 1.5 * calc.log(q[0])))
    got = -second_partial(f, [1.0, math.e, 1.0], 0, 1)
    assert want == pytest.approx(1 / math.e, rel=1e-15)
    assert got == pytest.approx(want, rel=1e-14)


@given(st.floats(0.2, 5), st.floats(0.2, 5), st.floats(0.2, 5))
def test_hessian_symmetric_and_matches_fd(a, b, c):
    f = ScalarField(3, lambda q: q[0] * q[1] ** 2 * calc.exp(-q[2]) + calc.log(q[0] + q[1] * q[2]))
    H = hessian(f, [a, b, c])
    assert np.allclose(H, H.T, rtol=0, atol=1e-12)
    g = gradient(f, [a, b, c])
    assert np.allclose(g, fd_gradient(f, [a, b, c]), rtol=1e-6, atol=1e-8)


def test_quadrature_examples():
    assert integrate_one_form(lambda t: 1.0) == pytest.approx(1.0, abs=1e-15)
    assert abs(integrate_one_form(lambda t: 2 * math.pi * math.cos(2 * math.pi * t))) <= 1e-6
    assert integrate_one_form(lambda t: t * t) == pytest.approx(1 / 3, abs=1e-6)


@given(st.lists(st.floats(-10, 10), min_size=4, max_size=4))
def test_simpson_exact_on_cubics(c):
    f = lambda t: c[0] + c[1] * t + c[2] * t**2 + c[3] * t**3  # noqa: E731
    exact = c[0] + c[1] / 2 + c[2] / 3 + c[3] / 4
    assert integrate_one_form(f, QuadratureSpec(1e-6)) == pytest.approx(exact, abs=1e-12)


def test_quadrature_failure_carries_estimate():
    spec = QuadratureSpec(abs_tol=1e-14, max_depth=4, min_depth=1)
    with pytest.raises(QuadratureError) as info:
        adaptive_simpson(lambda t: math.sqrt(t), 0.0, 1.0, spec)
    assert info.value.estimate == pytest.approx(2 / 3, abs=1e-2)
    assert info.value.error_bound > 0


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(abs_tol=0)
    with pytest.raises(ValueError):
        QuadratureSpec(max_depth=61)


def test_root_examples():
    assert solve_bracketed(lambda v: 2 * v - 1, 0, 1) == pytest.approx(0.5, abs=1e-12)
    ideal = EosConstraint("ideal_gas", R=1.0)
    assert solve_bracketed(lambda v: ideal.law(2.0, v, 1.0, 1.0), 0.1, 10) == pytest.approx(0.5, abs=1e-12)
    vdw0 = EosConstraint("van_der_waals", R=1.0, a=0.0, b=0.0)
    assert solve_bracketed(lambda v: vdw0.law(2.0, v, 1.0, 1.0), 0.1, 10) == pytest.approx(0.5, abs=1e-12)


def test_root_errors():
    with pytest.raises(RootError):
        solve_bracketed(lambda v: v * v + 1, -1, 1)
    with pytest.raises(RootError):
        solve_bracketed(lambda v: math.nan, 0, 1)


@given(st.floats(-50, 50), st.floats(0.01, 50), st.floats(-3, 3))
def test_root_stays_in_bracket(lo, width, shift):
    hi = lo + width
    r = lo + (0.5 + shift / 7) * width
    f = lambda v: (v - r) ** 3  # noqa: E731
    x = solve_bracketed(f, lo, hi, tol=0.0, xtol=0.0)
    assert lo <= x <= hi
    assert x == pytest.approx(r, abs=1e-9 * max(1, abs(r)))


def test_root_without_dual_support_falls_back_to_bisection():
    x = solve_bracketed(lambda v: float(v) - 0.25 if isinstance(v, float) else (_ for _ in ()).throw(TypeError()), 0, 1)
    assert x == pytest.approx(0.25, abs=1e-12)
