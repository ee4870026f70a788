"""Coordinate maps: construction, composition, conjugate auto-fill."""

import pytest
import sympy

from conftest import real_chart
from gcx import Chart, CoordinateMap, MixedForm, pullback
from gcx.maps import MapError


def test_identity_pullback_is_identity():
    ch = real_chart(3)
    ident = CoordinateMap.identity(ch)
    a = MixedForm(ch, {(0, 1): ch.symbol("x3"), (): sympy.Integer(2)})
    assert (pullback(ident, a) - a).is_zero()


def test_conjugate_leg_autofill():
    cx = Chart("cx", [("z1", "complex")])
    pol = Chart("pol", [("r", "radial"), ("t", "angle")])
    r, t = pol.symbols
    f = CoordinateMap.make(pol, cx, {"z1": r * sympy.exp(sympy.I * t)})
    assert f.table["z1b"] == r * sympy.exp(-sympy.I * t)


def test_missing_leg_rejected():
    A = real_chart(1, "A")
    B = real_chart(2, "B")
    with pytest.raises(MapError):
        CoordinateMap.make(A, B, {"x1": A.symbol("x1")})


def test_non_source_symbol_rejected():
    A = real_chart(1, "A")
    B = real_chart(1, "B")
    alien = sympy.Symbol("alien")
    with pytest.raises(MapError):
        CoordinateMap.make(A, B, {"x1": alien})


def test_apply_point_matches_substitution():
    A = real_chart(2, "A")
    B = real_chart(2, "B")
    x1, x2 = A.symbols
    f = CoordinateMap.make(A, B, {"x1": x1 + x2, "x2": x1 * x2})
    out = f.apply_point({"x1": 2.0, "x2": 3.0})
    assert out["x1"] == pytest.approx(5.0)
    assert out["x2"] == pytest.approx(6.0)


def test_compose_shared_names_simultaneous():
    # source and target share symbol names; composition must not chain
    # substitutions through the shared symbols
    A = real_chart(2, "A")
    B = real_chart(2, "B")
    C = real_chart(2, "C")
    x1, x2 = A.symbols
    f = CoordinateMap.make(A, B, {"x1": x2, "x2": x1})  # swap
    g = CoordinateMap.make(B, C, {"x1": x1 + x2, "x2": x1 - x2})
    gf = f.compose(g)
    assert sympy.expand(gf.table["x1"] - (x1 + x2)) == 0
    assert sympy.expand(gf.table["x2"] - (x2 - x1)) == 0
