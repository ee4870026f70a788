"""Exterior algebra kernel: exact identities on randomized instances."""

import random

import pytest
import sympy

from conftest import (
    random_form,
    random_polynomial_map,
    random_poly,
    random_section,
    random_vector,
    real_chart,
)
from gcx import (
    Chart,
    FormError,
    GeneralizedSection,
    MixedForm,
    courant_bracket,
    d,
    exp_form,
    form_equal,
    interior,
    pairing,
    pullback,
    wedge,
)
from gcx.forms import lie_derivative, vector_bracket, wedge_power


def is_structurally_zero(a: MixedForm) -> bool:
    return all(sympy.expand(c) == 0 for c in a.terms.values())


def test_wedge_antisymmetry_basics():
    ch = real_chart(3)
    dx = MixedForm.basis(ch, "x1")
    dy = MixedForm.basis(ch, "x2")
    assert wedge(dx, dx).is_zero()
    assert wedge(dx, dy).coefficient((0, 1)) == 1
    assert wedge(dy, dx).coefficient((0, 1)) == -1


def test_d_squared_zero_200():
    rng = random.Random(0)
    ch = real_chart(4)
    for _ in range(200):
        a = random_form(ch, rng)
        assert is_structurally_zero(d(d(a)))


def test_leibniz_200():
    rng = random.Random(1)
    ch = real_chart(4)
    for _ in range(200):
        ka = rng.randint(0, 2)
        a = random_form(ch, rng, degree=ka)
        b = random_form(ch, rng, degree=rng.randint(0, 2))
        lhs = d(wedge(a, b))
        rhs = wedge(d(a), b) + wedge(a, d(b)).scale((-1) ** ka)
        assert is_structurally_zero(lhs - rhs)


def test_pullback_functoriality_200():
    rng = random.Random(2)
    A, B, C = real_chart(2, "A"), real_chart(2, "B"), real_chart(2, "C")
    for _ in range(200):
        f = random_polynomial_map(A, B, rng)
        g = random_polynomial_map(B, C, rng)
        a = random_form(C, rng)
        lhs = pullback(f.compose(g), a)
        rhs = pullback(f, pullback(g, a))
        assert is_structurally_zero(lhs - rhs)


def test_pullback_commutes_with_d_200():
    rng = random.Random(3)
    A, B = real_chart(2, "A"), real_chart(2, "B")
    for _ in range(200):
        f = random_polynomial_map(A, B, rng)
        a = random_form(B, rng)
        assert is_structurally_zero(pullback(f, d(a)) - d(pullback(f, a)))


def test_interior_squared_zero_200():
    rng = random.Random(4)
    ch = real_chart(4)
    for _ in range(200):
        X = random_vector(ch, rng)
        a = random_form(ch, rng)
        assert is_structurally_zero(interior(X, interior(X, a)))


def test_interior_antiderivation():
    rng = random.Random(5)
    ch = real_chart(4)
    for _ in range(50):
        X = random_vector(ch, rng)
        ka = rng.randint(0, 2)
        a = random_form(ch, rng, degree=ka)
        b = random_form(ch, rng, degree=rng.randint(0, 2))
        lhs = interior(X, wedge(a, b))
        rhs = wedge(interior(X, a), b) + wedge(a, interior(X, b)).scale((-1) ** ka)
        assert is_structurally_zero(lhs - rhs)


def test_pairing_symmetry_200():
    rng = random.Random(6)
    ch = real_chart(3)
    for _ in range(200):
        s1 = random_section(ch, rng)
        s2 = random_section(ch, rng)
        assert sympy.expand(pairing(s1, s2).expr - pairing(s2, s1).expr) == 0


def test_exp_form_additivity_200():
    rng = random.Random(7)
    ch = real_chart(6)
    for _ in range(200):
        a = random_form(ch, rng, degree=2)
        b = random_form(ch, rng, degree=2)
        lhs = exp_form(a + b) if not (a + b).is_zero() else MixedForm.one(ch)
        ea = exp_form(a) if not a.is_zero() else MixedForm.one(ch)
        eb = exp_form(b) if not b.is_zero() else MixedForm.one(ch)
        assert is_structurally_zero(lhs - wedge(ea, eb))


def test_exp_form_rejects_odd_degrees():
    ch = real_chart(3)
    with pytest.raises(FormError):
        exp_form(MixedForm.basis(ch, "x1"))


def test_wedge_power_matches_repeated_wedge():
    rng = random.Random(8)
    ch = real_chart(6)
    a = random_form(ch, rng, degree=2)
    assert is_structurally_zero(wedge_power(a, 3) - wedge(a, wedge(a, a)))


# ---------------------------------------------------------------------------
# Courant bracket against an independent term-by-term oracle
# ---------------------------------------------------------------------------


def _oracle_courant(ch: Chart, X, xi, Y, eta, H3):
    """Direct coordinate computation of the H-twisted Courant bracket.

    Sections are (vector dict, 1-form dict leg->coeff); H3 is a dict of
    increasing index triples -> coefficient.  Every term is computed by
    raw partial derivatives, independent of the library's d / interior /
    Lie-derivative implementations.
    """
    syms = {leg.name: leg.symbol for leg in ch.legs}
    names = [leg.name for leg in ch.legs]

    def get(m, k):
        return sympy.sympify(m.get(k, 0))

    # Lie bracket of vectors
    vec = {}
    for k in names:
        acc = sympy.Integer(0)
        for j in names:
            acc += get(X, j) * sympy.diff(get(Y, k), syms[j])
            acc -= get(Y, j) * sympy.diff(get(X, k), syms[j])
        vec[k] = acc
    # Lie derivative of a 1-form: (L_X w)_k = X^j d_j w_k + w_j d_k X^j
    def lie(V, w):
        out = {}
        for k in names:
            acc = sympy.Integer(0)
            for j in names:
                acc += get(V, j) * sympy.diff(get(w, k), syms[j])
                acc += get(w, j) * sympy.diff(get(V, j), syms[k])
            out[k] = acc
        return out

    # d of a scalar
    def grad(f):
        return {k: sympy.diff(f, syms[k]) for k in names}

    pair_eta_x = sum(get(X, k) * get(eta, k) for k in names)
    pair_xi_y = sum(get(Y, k) * get(xi, k) for k in names)
    lx_eta, ly_xi = lie(X, eta), lie(Y, xi)
    dpair = grad(pair_eta_x - pair_xi_y)
    # i_Y i_X H with H given on increasing triples
    iyix = {k: sympy.Integer(0) for k in names}
    for (i, j, k), c in H3.items():
        for perm, sign in (
            ((i, j, k), 1), ((j, k, i), 1), ((k, i, j), 1),
            ((j, i, k), -1), ((i, k, j), -1), ((k, j, i), -1),
        ):
            a, b, c2 = perm
            iyix[names[c2]] += sign * c * get(X, names[a]) * get(Y, names[b])
    cov = {
        k: lx_eta[k] - ly_xi[k] - sympy.Rational(1, 2) * dpair[k] + iyix[k]
        for k in names
    }
    return vec, cov


def test_courant_bracket_vs_oracle_50():
    rng = random.Random(9)
    ch = real_chart(3)
    names = [leg.name for leg in ch.legs]
    for _ in range(50):
        s1, s2 = random_section(ch, rng), random_section(ch, rng)
        H = random_form(ch, rng, degree=3)
        got = courant_bracket(s1, s2, H)
        xi = {names[k[0]]: c for k, c in s1.covector.terms.items()}
        eta = {names[k[0]]: c for k, c in s2.covector.terms.items()}
        H3 = dict(H.terms)
        vec, cov = _oracle_courant(ch, s1.vector_map, xi, s2.vector_map, eta, H3)
        got_vec = got.vector_map
        for k in names:
            assert sympy.expand(sympy.sympify(got_vec.get(k, 0)) - vec[k]) == 0
            idx = ch.leg_index(k)
            assert sympy.expand(got.covector.coefficient((idx,)) - cov[k]) == 0


def test_vector_bracket_jacobi():
    rng = random.Random(10)
    ch = real_chart(3)
    for _ in range(25):
        X, Y, Z = (random_vector(ch, rng) for _ in range(3))
        ab = vector_bracket(X, Y, ch)
        bc = vector_bracket(Y, Z, ch)
        ca = vector_bracket(Z, X, ch)
        total = {}
        for first, second in ((ab, Z), (bc, X), (ca, Y)):
            term = vector_bracket(first, second, ch)
            for k, v in term.items():
                total[k] = total.get(k, sympy.Integer(0)) + v
        assert all(sympy.expand(v) == 0 for v in total.values())


def test_lie_derivative_cartan_consistency():
    rng = random.Random(11)
    ch = real_chart(3)
    for _ in range(25):
        X = random_vector(ch, rng)
        a = random_form(ch, rng)
        lhs = lie_derivative(X, d(a))
        rhs = d(lie_derivative(X, a))
        assert is_structurally_zero(lhs - rhs)


def test_form_equal_detects_difference():
    ch = real_chart(2)
    x1 = ch.symbol("x1")
    a = MixedForm.scalar(ch, x1 ** 2)
    b = MixedForm.scalar(ch, x1 ** 2 + sympy.Rational(1, 10 ** 6))
    assert form_equal(a, a)
    assert not form_equal(a, b)
