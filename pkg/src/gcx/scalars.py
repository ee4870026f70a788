"""Exact symbolic scalars with opaque smooth symbols and region-aware equality.

Scalars are sympy expressions over the chart symbols.  Algebraic
operations stay exact (Gaussian rationals); transcendental nodes (log,
exp, sqrt, trig) and opaque bump functions are kept symbolic, with
derivative rules built in, and are only ever evaluated numerically
during sampling.

An opaque smooth symbol like the radial bump ``xi`` carries

* a named formal derivative ``xi_prime`` produced by differentiation,
* interval constraints (identically 0 below one threshold, identically
  1 above another), and
* a concrete smooth-step instance used for numeric evaluation on the
  interpolation interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

import sympy

from .chart import Chart, Region, RegionError

_CACHE: dict[str, type] = {}
_BUMPS: dict[str, "BumpSpec"] = {}


class EvaluationError(ValueError):
    """Numeric evaluation hit a singularity or an unbound symbol."""


@dataclass(frozen=True)
class BumpSpec:
    """Concrete smooth-step backing an opaque bump: 0 below, 1 above."""

    name: str
    zero_upto: float
    one_from: float

    def __post_init__(self):
        if not self.zero_upto < self.one_from:
            raise ValueError("bump thresholds must satisfy zero_upto < one_from")

    def value(self, t: float) -> float:
        if t <= self.zero_upto:
            return 0.0
        if t >= self.one_from:
            return 1.0
        return _smoothstep((t - self.zero_upto) / (self.one_from - self.zero_upto))

    def derivative(self, t: float) -> float:
        if t <= self.zero_upto or t >= self.one_from:
            return 0.0
        w = self.one_from - self.zero_upto
        return _smoothstep_d((t - self.zero_upto) / w) / w


def _bump_f(s: float) -> float:
    return math.exp(-1.0 / s) if s > 0.0 else 0.0


def _smoothstep(s: float) -> float:
    a, b = _bump_f(s), _bump_f(1.0 - s)
    return a / (a + b)


def _smoothstep_d(s: float) -> float:
    h = 1e-6
    lo, hi = max(s - h, 0.0), min(s + h, 1.0)
    return (_smoothstep(hi) - _smoothstep(lo)) / (hi - lo)


def opaque_function(name: str) -> type:
    """A sympy Function class for an opaque smooth real-valued symbol.

    Differentiation produces the opaque symbol ``<name>_prime``; numeric
    arguments are resolved through the registered bump instance, if any.
    """
    cls = _CACHE.get(name)
    if cls is not None:
        return cls

    def eval_(cls_, arg):
        spec = _BUMPS.get(cls_.__name__)
        if spec is not None and arg.is_Number and arg.is_real:
            t = float(arg)
            base = cls_.__name__
            if base.endswith("_prime"):
                root = base[: -len("_prime")]
                root_spec = _BUMPS.get(root)
                if root_spec is not None:
                    return sympy.Float(root_spec.derivative(t))
            if t <= spec.zero_upto:
                return sympy.Integer(0)
            if t >= spec.one_from:
                return sympy.Integer(1)
            return sympy.Float(spec.value(t))
        return None

    def fdiff(self, argindex=1):
        return opaque_function(self.func.__name__ + "_prime")(self.args[0])

    cls = type(
        name,
        (sympy.Function,),
        {
            "eval": classmethod(eval_),
            "fdiff": fdiff,
            "is_real": True,
            "_gcx_opaque": True,
        },
    )
    _CACHE[name] = cls
    return cls


def register_bump(name: str, zero_upto: float, one_from: float) -> type:
    """Declare an opaque bump with its 0/1 thresholds; returns its Function."""
    spec = BumpSpec(name, float(zero_upto), float(one_from))
    _BUMPS[name] = spec
    # derivative shares the interpolation window; eval_ dispatches on suffix
    _BUMPS[name + "_prime"] = BumpSpec(name + "_prime", spec.zero_upto, spec.one_from)
    opaque_function(name + "_prime")
    return opaque_function(name)


def bump_spec(name: str) -> Optional[BumpSpec]:
    return _BUMPS.get(name)


def pin_bumps(expr: sympy.Expr, bump_values: Mapping[str, int]) -> sympy.Expr:
    """Substitute region-pinned bump values (0 or 1) and kill derivatives."""
    if not bump_values:
        return expr
    expr = sympy.sympify(expr)

    def repl(node):
        if getattr(node.func, "_gcx_opaque", False):
            base = node.func.__name__
            if base.endswith("_prime"):
                root = base[: -len("_prime")]
                if root in bump_values:
                    return sympy.Integer(0)
            elif base in bump_values:
                return sympy.Integer(bump_values[base])
        return node

    return expr.replace(
        lambda n: getattr(n.func, "_gcx_opaque", False), repl
    )


# ---------------------------------------------------------------------------
# ScalarExpr: a sympy expression plus the region where it is defined.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalarExpr:
    """An exact symbolic scalar on a chart, with a validity region.

    Division by a possibly-vanishing expression must carry a region
    annotation excluding the singular locus; operations propagate the
    intersection of regions.
    """

    chart: Chart
    expr: sympy.Expr
    domain: Optional[Region] = None

    def __post_init__(self):
        object.__setattr__(self, "expr", sympy.sympify(self.expr))

    def _combine(self, other) -> tuple[sympy.Expr, Optional[Region]]:
        if isinstance(other, ScalarExpr):
            if other.chart != self.chart:
                raise ValueError("scalar operands live on different charts")
            dom = merge_domains(self.domain, other.domain)
            return other.expr, dom
        return sympy.sympify(other), self.domain

    def __add__(self, other):
        e, d = self._combine(other)
        return ScalarExpr(self.chart, self.expr + e, d)

    __radd__ = __add__

    def __sub__(self, other):
        e, d = self._combine(other)
        return ScalarExpr(self.chart, self.expr - e, d)

    def __rsub__(self, other):
        e, d = self._combine(other)
        return ScalarExpr(self.chart, e - self.expr, d)

    def __mul__(self, other):
        e, d = self._combine(other)
        return ScalarExpr(self.chart, self.expr * e, d)

    __rmul__ = __mul__

    def __neg__(self):
        return ScalarExpr(self.chart, -self.expr, self.domain)

    def __pow__(self, n: int):
        return ScalarExpr(self.chart, self.expr ** int(n), self.domain)

    def div(self, other, nonzero: Optional[Region] = None) -> "ScalarExpr":
        """Division; ``nonzero`` annotates where the denominator lives."""
        e, d = self._combine(other)
        if nonzero is not None:
            d = merge_domains(d, nonzero)
        return ScalarExpr(self.chart, self.expr / e, d)

    def __truediv__(self, other):
        return self.div(other)

    def diff(self, leg: str) -> "ScalarExpr":
        return ScalarExpr(self.chart, sympy.diff(self.expr, self.chart.symbol(leg)), self.domain)

    def conjugate(self) -> "ScalarExpr":
        return ScalarExpr(self.chart, self.chart.conj_expr(self.expr), self.domain)

    def evaluate(self, point: Mapping[str, complex]) -> complex:
        if self.domain is not None and not self.domain.contains(point):
            raise RegionError(
                f"point outside declared domain {self.domain.name!r}"
            )
        return evaluate_expr(self.expr, self.chart, point)


def merge_domains(a: Optional[Region], b: Optional[Region]) -> Optional[Region]:
    if a is None:
        return b
    if b is None or b is a:
        return a
    return a.intersect(b)


# ---------------------------------------------------------------------------
# Numeric evaluation and structural/probabilistic equality.
# ---------------------------------------------------------------------------


def evaluate_expr(expr: sympy.Expr, chart: Chart, point: Mapping[str, complex]) -> complex:
    expr = sympy.sympify(expr)
    subs = chart.point_subs(point)
    val = expr.subs(subs)
    if val.has(sympy.zoo, sympy.oo, -sympy.oo, sympy.nan):
        raise EvaluationError(f"singular value at {dict(point)!r}")
    if val.free_symbols:
        val = sympy.simplify(val)
    if val.free_symbols:
        raise EvaluationError(f"unbound symbols {val.free_symbols} after substitution")
    try:
        num = complex(sympy.N(val))
    except (TypeError, ValueError) as exc:
        raise EvaluationError(f"cannot evaluate numerically: {val}") from exc
    if not (math.isfinite(num.real) and math.isfinite(num.imag)):
        raise EvaluationError(f"non-finite value at {dict(point)!r}")
    return num


def is_algebraic_expr(expr: sympy.Expr) -> bool:
    """True when the expression uses only exact field operations."""
    expr = sympy.sympify(expr)
    for node in sympy.preorder_traversal(expr):
        if isinstance(node, sympy.Float):
            return False
        if node.is_Pow and not (node.exp.is_Integer):
            return False
        if isinstance(node, sympy.Function):
            return False
    return True


def expr_equal(
    a,
    b,
    chart: Chart = None,
    region: Optional[Region] = None,
    samples: int = 32,
    seed: int = 0,
    tol: float = 1e-9,
    rng=None,
) -> bool:
    """Structural-then-probabilistic equality of two scalars on a region.

    Exact on purely algebraic expressions (Gaussian-rational sampling);
    probabilistic with tolerance ``tol`` once transcendental or opaque
    nodes are present.
    """
    import random

    if isinstance(a, ScalarExpr):
        chart = chart or a.chart
        region = merge_domains(region, a.domain)
        a = a.expr
    if isinstance(b, ScalarExpr):
        chart = chart or b.chart
        region = merge_domains(region, b.domain)
        b = b.expr
    if chart is None:
        raise ValueError("expr_equal needs a chart")
    diff = sympy.expand(sympy.sympify(a) - sympy.sympify(b))
    if region is not None:
        diff = pin_bumps(diff, region.bump_map)
    if diff.is_zero:
        return True
    diff = sympy.cancel(sympy.together(diff))
    if diff.is_zero:
        return True
    if region is None:
        region = Region(chart, "everywhere")
    if rng is None:
        rng = random.Random(seed)
    algebraic = is_algebraic_expr(diff)
    failures = 0
    tried = 0
    for _ in range(samples * 4):
        if tried >= samples:
            break
        point = region.sample(rng, rational=False)
        try:
            va = evaluate_expr(diff, chart, point)
        except EvaluationError:
            failures += 1
            if failures > samples * 3:
                raise EvaluationError("sampling cannot avoid singular loci")
            continue
        tried += 1
        scale = 1.0
        try:
            scale = max(1.0, abs(evaluate_expr(sympy.sympify(a), chart, point)))
        except EvaluationError:
            pass
        limit = 1e-12 if algebraic else tol
        if abs(va) > limit * scale:
            return False
    if tried == 0:
        raise EvaluationError("sampling cannot avoid singular loci")
    return True
