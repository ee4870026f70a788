"""Mixed-degree differential forms and the exterior-calculus operation set.

A :class:`MixedForm` maps strictly increasing leg-index tuples (the
empty tuple is degree 0) to sympy coefficients.  Keys are canonically
sorted on construction with the antisymmetry sign applied, and zero
coefficients are dropped.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

import sympy

from .chart import Chart, Region, RegionError
from .scalars import (
    EvaluationError,
    ScalarExpr,
    evaluate_expr,
    expr_equal,
    merge_domains,
    pin_bumps,
)


class FormError(ValueError):
    """Ill-formed differential-form operation (chart/degree mismatch...)."""


def _sort_key(key: Iterable[int]) -> tuple[tuple[int, ...], int]:
    """Sorted key and the permutation sign; sign 0 for repeated indices."""
    key = tuple(key)
    if len(set(key)) != len(key):
        return (), 0
    perm = sorted(range(len(key)), key=lambda i: key[i])
    inv = 0
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                inv += 1
    return tuple(sorted(key)), (-1) ** inv


def _merge_sign(k1: tuple[int, ...], k2: tuple[int, ...]) -> int:
    """Sign of sorting the concatenation of two sorted disjoint keys."""
    inv = sum(1 for i in k1 for j in k2 if i > j)
    return (-1) ** inv


class MixedForm:
    """Immutable mixed-degree complex differential form on a chart."""

    __slots__ = ("chart", "terms", "domain")

    def __init__(self, chart: Chart, terms: Mapping | None = None,
                 domain: Optional[Region] = None):
        self.chart = chart
        self.domain = domain
        data: dict[tuple[int, ...], sympy.Expr] = {}
        for key, coeff in (terms or {}).items():
            if isinstance(coeff, ScalarExpr):
                if coeff.chart != chart:
                    raise FormError("coefficient chart mismatch")
                self.domain = merge_domains(self.domain, coeff.domain)
                coeff = coeff.expr
            coeff = sympy.sympify(coeff)
            skey, sign = _sort_key(key)
            if sign == 0:
                continue
            coeff = sign * coeff
            if skey in data:
                coeff = data[skey] + coeff
            data[skey] = coeff
        self.terms = {
            k: v for k, v in data.items() if not sympy.sympify(v).is_zero
        }

    # -- constructors ----------------------------------------------------

    @classmethod
    def zero(cls, chart: Chart) -> "MixedForm":
        return cls(chart, {})

    @classmethod
    def one(cls, chart: Chart) -> "MixedForm":
        return cls(chart, {(): sympy.Integer(1)})

    @classmethod
    def scalar(cls, chart: Chart, expr, domain: Optional[Region] = None) -> "MixedForm":
        return cls(chart, {(): expr}, domain)

    @classmethod
    def basis(cls, chart: Chart, leg: str) -> "MixedForm":
        return cls(chart, {(chart.leg_index(leg),): sympy.Integer(1)})

    # -- queries ---------------------------------------------------------

    def coefficient(self, key: Iterable[int]) -> sympy.Expr:
        skey, sign = _sort_key(key)
        if sign == 0:
            return sympy.Integer(0)
        return sign * self.terms.get(skey, sympy.Integer(0))

    def degree_block(self, k: int) -> "MixedForm":
        return MixedForm(
            self.chart,
            {key: c for key, c in self.terms.items() if len(key) == k},
            self.domain,
        )

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(sorted({len(k) for k in self.terms}))

    def is_zero(self) -> bool:
        return not self.terms

    def is_homogeneous(self, k: int | None = None) -> bool:
        degs = self.degrees
        if k is None:
            return len(degs) <= 1
        return degs in ((), (k,))

    def key_name(self, key: tuple[int, ...]) -> str:
        return "^".join("d" + self.chart.legs[i].name for i in key) or "1"

    def __repr__(self):
        if not self.terms:
            return "MixedForm(0)"
        bits = [f"({c})*{self.key_name(k)}" for k, c in sorted(self.terms.items())]
        return "MixedForm(" + " + ".join(bits) + ")"

    # -- algebra -----------------------------------------------------------

    def _check(self, other: "MixedForm"):
        if not isinstance(other, MixedForm):
            raise FormError(f"expected MixedForm, got {type(other).__name__}")
        if self.chart != other.chart:
            raise FormError(
                f"chart mismatch: {self.chart.name!r} vs {other.chart.name!r}"
            )

    def __add__(self, other: "MixedForm") -> "MixedForm":
        self._check(other)
        data = dict(self.terms)
        for key, c in other.terms.items():
            data[key] = data.get(key, sympy.Integer(0)) + c
        return MixedForm(self.chart, data, merge_domains(self.domain, other.domain))

    def __sub__(self, other: "MixedForm") -> "MixedForm":
        return self + (-other)

    def __neg__(self) -> "MixedForm":
        return MixedForm(self.chart, {k: -c for k, c in self.terms.items()}, self.domain)

    def scale(self, scalar) -> "MixedForm":
        dom = self.domain
        if isinstance(scalar, ScalarExpr):
            dom = merge_domains(dom, scalar.domain)
            scalar = scalar.expr
        scalar = sympy.sympify(scalar)
        return MixedForm(self.chart, {k: scalar * c for k, c in self.terms.items()}, dom)

    def __mul__(self, scalar):
        return self.scale(scalar)

    __rmul__ = __mul__

    def conjugate(self) -> "MixedForm":
        data = {}
        for key, c in self.terms.items():
            ckey = tuple(self.chart.conj_index(i) for i in key)
            skey, sign = _sort_key(ckey)
            data[skey] = data.get(skey, sympy.Integer(0)) + sign * self.chart.conj_expr(c)
        return MixedForm(self.chart, data, self.domain)

    def map_coefficients(self, fn) -> "MixedForm":
        return MixedForm(self.chart, {k: fn(c) for k, c in self.terms.items()}, self.domain)

    def real_part(self) -> "MixedForm":
        return (self + self.conjugate()).scale(sympy.Rational(1, 2))

    def imag_part(self) -> "MixedForm":
        return (self - self.conjugate()).scale(sympy.Rational(1, 2) / sympy.I)

    # -- evaluation --------------------------------------------------------

    def evaluate_at(self, point, region: Optional[Region] = None) -> dict[tuple[int, ...], complex]:
        """Numeric coefficients at a point, after region bump pinnings."""
        pins = region.bump_map if region is not None else {}
        out = {}
        for key, c in self.terms.items():
            if pins:
                c = pin_bumps(c, pins)
            c = sympy.cancel(sympy.together(c)) if c.free_symbols else c
            if c.is_zero:
                continue
            out[key] = evaluate_expr(c, self.chart, point)
        return out


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def wedge(a: MixedForm, b: MixedForm) -> MixedForm:
    """Graded-commutative exterior product."""
    a._check(b)
    data: dict[tuple[int, ...], sympy.Expr] = {}
    for k1, c1 in a.terms.items():
        for k2, c2 in b.terms.items():
            if set(k1) & set(k2):
                continue
            key = tuple(sorted(k1 + k2))
            sign = _merge_sign(k1, k2)
            data[key] = data.get(key, sympy.Integer(0)) + sign * c1 * c2
    return MixedForm(a.chart, data, merge_domains(a.domain, b.domain))


def wedge_list(forms: Iterable[MixedForm]) -> MixedForm:
    forms = list(forms)
    if not forms:
        raise FormError("empty wedge")
    out = forms[0]
    for f in forms[1:]:
        out = wedge(out, f)
    return out


def wedge_power(a: MixedForm, n: int) -> MixedForm:
    if n < 0:
        raise FormError("negative wedge power")
    out = MixedForm.one(a.chart)
    for _ in range(n):
        out = wedge(out, a)
    return out


def d(a: MixedForm) -> MixedForm:
    """Exterior derivative; opaque symbols use their formal derivatives."""
    chart = a.chart
    data: dict[tuple[int, ...], sympy.Expr] = {}
    for key, c in a.terms.items():
        for j, leg in enumerate(chart.legs):
            if j in key:
                continue
            dc = sympy.diff(c, leg.symbol)
            if dc.is_zero:
                continue
            pos = sum(1 for i in key if i < j)
            nkey = tuple(sorted(key + (j,)))
            data[nkey] = data.get(nkey, sympy.Integer(0)) + (-1) ** pos * dc
    return MixedForm(chart, data, a.domain)


def d_scalar(chart: Chart, expr) -> MixedForm:
    return d(MixedForm.scalar(chart, expr))


def interior(X: Mapping[str, sympy.Expr], a: MixedForm) -> MixedForm:
    """Interior product with a vector field given as leg-name -> coefficient."""
    chart = a.chart
    idx = {chart.leg_index(name): sympy.sympify(c) for name, c in X.items()}
    data: dict[tuple[int, ...], sympy.Expr] = {}
    for key, c in a.terms.items():
        for t, j in enumerate(key):
            xc = idx.get(j)
            if xc is None:
                continue
            nkey = key[:t] + key[t + 1:]
            data[nkey] = data.get(nkey, sympy.Integer(0)) + (-1) ** t * xc * c
    return MixedForm(chart, data, a.domain)


def lie_derivative(X: Mapping[str, sympy.Expr], a: MixedForm) -> MixedForm:
    """Cartan's formula: L_X = d(i_X a) + i_X(d a)."""
    return d(interior(X, a)) + interior(X, d(a))


def exp_form(b: MixedForm) -> MixedForm:
    """Finite exponential series of a nilpotent even-degree form."""
    degs = b.degrees
    if any(k == 0 or k % 2 for k in degs):
        raise FormError(
            f"exp_form needs even positive degrees, got degrees {degs}"
        )
    out = MixedForm.one(b.chart)
    power = MixedForm.one(b.chart)
    kfact = 1
    for k in range(1, b.chart.dim // 2 + 1):
        power = wedge(power, b)
        if power.is_zero():
            break
        kfact *= k
        out = out + power.scale(sympy.Rational(1, kfact))
    return out


@dataclass(frozen=True)
class GeneralizedSection:
    """A section X + xi of TM + T*M on a single chart."""

    chart: Chart
    vector: tuple[tuple[str, sympy.Expr], ...]
    covector: MixedForm

    @staticmethod
    def make(chart: Chart, vector: Mapping[str, object] | None = None,
             covector: MixedForm | None = None) -> "GeneralizedSection":
        vec = tuple(
            sorted((name, sympy.sympify(v)) for name, v in (vector or {}).items())
        )
        for name, _ in vec:
            chart.leg_index(name)
        cov = covector if covector is not None else MixedForm.zero(chart)
        if cov.chart != chart:
            raise FormError("covector part lives on a different chart")
        if not cov.is_homogeneous(1):
            raise FormError("covector part must be a 1-form")
        return GeneralizedSection(chart, vec, cov)

    @staticmethod
    def zero(chart: Chart) -> "GeneralizedSection":
        return GeneralizedSection.make(chart)

    @property
    def vector_map(self) -> dict[str, sympy.Expr]:
        return dict(self.vector)

    def is_zero(self) -> bool:
        return all(sympy.sympify(v).is_zero for _, v in self.vector) and self.covector.is_zero()

    def __add__(self, other: "GeneralizedSection") -> "GeneralizedSection":
        if other.chart != self.chart:
            raise FormError("chart mismatch")
        vec = self.vector_map
        for name, v in other.vector:
            vec[name] = vec.get(name, sympy.Integer(0)) + v
        return GeneralizedSection.make(self.chart, vec, self.covector + other.covector)

    def scale(self, c) -> "GeneralizedSection":
        c = sympy.sympify(c)
        return GeneralizedSection.make(
            self.chart,
            {name: c * v for name, v in self.vector},
            self.covector.scale(c),
        )


def clifford(section: GeneralizedSection, rho: MixedForm) -> MixedForm:
    """(X + xi) . rho = i_X rho + xi ^ rho."""
    if section.chart != rho.chart:
        raise FormError("chart mismatch")
    return interior(section.vector_map, rho) + wedge(section.covector, rho)


def pairing(s1: GeneralizedSection, s2: GeneralizedSection) -> ScalarExpr:
    """Symmetric pairing <X+xi, Y+eta> = (eta(X) + xi(Y)) / 2."""
    if s1.chart != s2.chart:
        raise FormError("chart mismatch")
    chart = s1.chart
    val = sympy.Integer(0)
    for name, x in s1.vector:
        val += x * s2.covector.coefficient((chart.leg_index(name),))
    for name, y in s2.vector:
        val += y * s1.covector.coefficient((chart.leg_index(name),))
    dom = merge_domains(s1.covector.domain, s2.covector.domain)
    return ScalarExpr(chart, sympy.Rational(1, 2) * val, dom)


def vector_bracket(X: Mapping[str, sympy.Expr], Y: Mapping[str, sympy.Expr],
                   chart: Chart) -> dict[str, sympy.Expr]:
    """Coordinate Lie bracket [X, Y]."""
    out: dict[str, sympy.Expr] = {}
    for leg in chart.legs:
        acc = sympy.Integer(0)
        for j, legj in enumerate(chart.legs):
            xj = sympy.sympify(X.get(legj.name, 0))
            yj = sympy.sympify(Y.get(legj.name, 0))
            yk = sympy.sympify(Y.get(leg.name, 0))
            xk = sympy.sympify(X.get(leg.name, 0))
            acc += xj * sympy.diff(yk, legj.symbol) - yj * sympy.diff(xk, legj.symbol)
        if not acc.is_zero:
            out[leg.name] = acc
    return out


def courant_bracket(s1: GeneralizedSection, s2: GeneralizedSection,
                    H: MixedForm | None = None) -> GeneralizedSection:
    """H-twisted Courant bracket of two generalized sections."""
    if s1.chart != s2.chart:
        raise FormError("chart mismatch")
    chart = s1.chart
    if H is None:
        H = MixedForm.zero(chart)
    if not H.is_zero() and not H.is_homogeneous(3):
        raise FormError("twisting form must be of pure degree 3")
    X, Y = s1.vector_map, s2.vector_map
    xi, eta = s1.covector, s2.covector
    vec = vector_bracket(X, Y, chart)
    cov = lie_derivative(X, eta) - lie_derivative(Y, xi)
    eta_x = interior(X, eta)  # scalar eta(X) as a 0-form
    xi_y = interior(Y, xi)
    half = sympy.Rational(1, 2)
    cov = cov - d(eta_x - xi_y).scale(half)
    cov = cov + interior(Y, interior(X, H))
    return GeneralizedSection.make(chart, vec, cov)


def form_equal(a: MixedForm, b: MixedForm, region: Optional[Region] = None,
               samples: int = 32, seed: int = 0, tol: float = 1e-9) -> bool:
    """Coefficient-wise expr_equal over the union of the two key sets."""
    a._check(b)
    region = merge_domains(merge_domains(region, a.domain), b.domain)
    rng = random.Random(seed)
    keys = sorted(set(a.terms) | set(b.terms))
    for key in keys:
        if not expr_equal(
            a.coefficient(key), b.coefficient(key), a.chart,
            region=region, samples=samples, tol=tol, rng=rng,
        ):
            return False
    return True


def first_disagreement(a: MixedForm, b: MixedForm, region=None, samples: int = 16,
                       seed: int = 0, tol: float = 1e-9):
    """The first key whose coefficients differ, or None."""
    a._check(b)
    region = merge_domains(merge_domains(region, a.domain), b.domain)
    rng = random.Random(seed)
    for key in sorted(set(a.terms) | set(b.terms)):
        if not expr_equal(a.coefficient(key), b.coefficient(key), a.chart,
                          region=region, samples=samples, tol=tol, rng=rng):
            return key
    return None
