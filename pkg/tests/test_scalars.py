"""Opaque bumps and sampled scalar equality."""

import random

import pytest
import sympy

from conftest import real_chart
from gcx import register_bump, opaque_function
from gcx.scalars import bump_spec, expr_equal, pin_bumps


def test_bump_thresholds():
    xi = register_bump("xi_t", 0.25, 0.5)
    assert xi(sympy.Float(0.1)) == 0
    assert xi(sympy.Float(0.25)) == 0
    assert xi(sympy.Float(0.9)) == 1
    mid = float(xi(sympy.Float(0.4)))
    assert 0.0 < mid < 1.0


def test_bump_derivative_vanishes_on_plateaus():
    register_bump("xi_d", 0.25, 0.5)
    xi = opaque_function("xi_d")
    t = sympy.Symbol("t", real=True)
    deriv = sympy.diff(xi(t), t)
    assert float(deriv.subs(t, 0.1)) == 0.0
    assert float(deriv.subs(t, 0.9)) == 0.0
    assert float(deriv.subs(t, 0.4)) != 0.0


def test_bump_smooth_and_monotone_in_window():
    spec = bump_spec("xi_t") or register_bump("xi_t", 0.25, 0.5) and bump_spec("xi_t")
    values = [spec.value(0.25 + 0.25 * k / 20) for k in range(21)]
    assert values == sorted(values)
    assert values[0] == pytest.approx(0.0, abs=1e-12)
    assert values[-1] == pytest.approx(1.0, abs=1e-12)


def test_pin_bumps_kills_derivatives():
    register_bump("xi_p", 0.25, 0.5)
    xi = opaque_function("xi_p")
    r = sympy.Symbol("r", positive=True)
    expr = xi(r) * r + sympy.diff(xi(r), r)
    assert pin_bumps(expr, {"xi_p": 0}) == 0
    assert pin_bumps(expr, {"xi_p": 1}) == r


def test_expr_equal_algebraic_exact():
    ch = real_chart(2)
    x1, x2 = ch.symbols
    assert expr_equal((x1 + x2) ** 2, x1 ** 2 + 2 * x1 * x2 + x2 ** 2, ch)
    assert not expr_equal(x1 * x2, x1 * x2 + sympy.Rational(1, 10 ** 9), ch)


def test_expr_equal_transcendental_sampled():
    ch = real_chart(1)
    (x1,) = ch.symbols
    assert expr_equal(sympy.sin(2 * x1), 2 * sympy.sin(x1) * sympy.cos(x1), ch)
    assert not expr_equal(sympy.sin(x1), sympy.cos(x1), ch)
