"""The .gcx scenario language: declarations plus a command script.

Line-oriented; ``#`` starts a comment.  Declarations build named
charts, regions, bumps, forms, maps, spinors, groups, and manifold
descriptors; commands run checks and surgeries with machine-checkable
expected outcomes.  Statement clauses are separated by ``;``.

Form expressions use ``^`` for the wedge product, ``**`` for scalar
powers, ``d(...)`` for the exterior derivative, ``i`` for the imaginary
unit, and ``exp/re/im/conj/pullback`` plus the usual scalar functions.
A wedge with a repeated differential (``dx1^dx1``) parses to the zero
form with a warning.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Optional

import sympy

from .chart import Chart, Interval, Region
from .forms import FormError, GeneralizedSection, MixedForm, d as ext_d, exp_form, wedge
from .maps import CoordinateMap, pullback
from .scalars import opaque_function, register_bump
from .groups import GroupPresentation, parse_word
from .spinor import DecompositionHints, SpinorStructure
from .topology import (
    BranchComponent,
    BranchingData,
    ManifoldDescriptor,
    SurgeryLocus,
    TypeChangeComponent,
)


class ParseError(ValueError):
    """Syntax or semantic error, carrying the line number."""

    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""\s*(?:
        (?P<string>"[^"]*")
      | (?P<number>\d+\.\d*|\.\d+|\d+)
      | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
      | (?P<op>\*\*|->|<=|>=|[][()<>|,;=+\-*/^:])
    )""",
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # string | number | name | op
    text: str
    line: int


def tokenize(text: str, line: int) -> list[Token]:
    out = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if not m or m.start() != pos:
            raise ParseError(f"unexpected character {text[pos]!r}", line)
        kind = m.lastgroup
        out.append(Token(kind, m.group(kind), line))
        pos = m.end()
    return out


class TokenStream:
    def __init__(self, tokens: list[Token], line: int):
        self.tokens = tokens
        self.pos = 0
        self.line = line

    def peek(self) -> Optional[Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of statement", self.line)
        self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.next()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, got {tok.text!r}", self.line)
        return tok

    def accept(self, text: str) -> bool:
        tok = self.peek()
        if tok is not None and tok.text == text:
            self.pos += 1
            return True
        return False

    def at_end(self) -> bool:
        return self.pos >= len(self.tokens)

    def rest(self) -> list[Token]:
        return self.tokens[self.pos:]


# ---------------------------------------------------------------------------
# Scenario object
# ---------------------------------------------------------------------------


@dataclass
class Command:
    kind: str
    payload: dict
    line: int
    text: str


@dataclass
class Scenario:
    title: str = ""
    charts: dict[str, Chart] = field(default_factory=dict)
    regions: dict[str, Region] = field(default_factory=dict)
    bumps: dict[str, tuple[float, float]] = field(default_factory=dict)
    forms: dict[str, MixedForm] = field(default_factory=dict)
    maps: dict[str, CoordinateMap] = field(default_factory=dict)
    spinors: dict[str, SpinorStructure] = field(default_factory=dict)
    groups: dict[str, GroupPresentation] = field(default_factory=dict)
    manifolds: dict[str, ManifoldDescriptor] = field(default_factory=dict)
    commands: list[Command] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    statements: list[str] = field(default_factory=list)

    def pretty(self) -> str:
        """Canonical text whose re-parse is structurally identical."""
        return "\n".join(self.statements) + "\n"

    def only_chart(self, line: int) -> Chart:
        if len(self.charts) != 1:
            raise ParseError(
                "statement needs an explicit 'on <chart>' clause", line
            )
        return next(iter(self.charts.values()))


# ---------------------------------------------------------------------------
# Expression parser (forms and scalars, uniformly as mixed forms)
# ---------------------------------------------------------------------------

_SCALAR_FUNCS = {
    "sqrt": sympy.sqrt, "log": sympy.log, "sin": sympy.sin, "cos": sympy.cos,
}


class ExprParser:
    """Pratt parser producing MixedForm values on a fixed chart."""

    def __init__(self, scenario: Scenario, chart: Chart, ts: TokenStream):
        self.sc = scenario
        self.chart = chart
        self.ts = ts

    def parse(self, min_prec: int = 0) -> MixedForm:
        left = self.atom()
        while True:
            tok = self.ts.peek()
            if tok is None or tok.kind != "op":
                break
            prec = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3, "**": 4}.get(tok.text)
            if prec is None or prec < min_prec:
                break
            self.ts.next()
            if tok.text == "**":
                n = self.ts.next()
                if n.kind != "number":
                    raise ParseError("** needs an integer exponent", tok.line)
                left = self.power(left, int(n.text), tok.line)
                continue
            right = self.parse(prec + 1)
            left = self.combine(tok.text, left, right, tok.line)
        return left

    def atom(self) -> MixedForm:
        tok = self.ts.next()
        if tok.kind == "number":
            return MixedForm.scalar(self.chart, sympy.Rational(tok.text))
        if tok.text == "(":
            inner = self.parse()
            self.ts.expect(")")
            return inner
        if tok.text == "-":
            return -self.parse(5)
        if tok.text == "+":
            return self.parse(5)
        if tok.kind == "name":
            return self.name_atom(tok)
        raise ParseError(f"unexpected token {tok.text!r} in expression", tok.line)

    def name_atom(self, tok: Token) -> MixedForm:
        name = tok.text
        if name == "i":
            return MixedForm.scalar(self.chart, sympy.I)
        if name == "pi":
            return MixedForm.scalar(self.chart, sympy.pi)
        if self.ts.peek() is not None and self.ts.peek().text == "(":
            return self.call(name, tok.line)
        # differential of a leg
        if name.startswith("d") and name[1:] in {l.name for l in self.chart.legs}:
            return MixedForm.basis(self.chart, name[1:])
        if name in {l.name for l in self.chart.legs}:
            return MixedForm.scalar(self.chart, self.chart.symbol(name))
        if name in self.sc.forms:
            f = self.sc.forms[name]
            if f.chart != self.chart:
                raise ParseError(
                    f"form {name!r} lives on chart {f.chart.name!r}", tok.line
                )
            return f
        raise ParseError(f"unknown name {name!r}", tok.line)

    def call(self, name: str, line: int) -> MixedForm:
        self.ts.expect("(")
        if name == "pullback":
            mname = self.ts.next().text
            if mname not in self.sc.maps:
                raise ParseError(f"unknown map {mname!r}", line)
            cmap = self.sc.maps[mname]
            self.ts.expect(",")
            inner_parser = ExprParser(self.sc, cmap.target, self.ts)
            arg = inner_parser.parse()
            self.ts.expect(")")
            if cmap.source != self.chart:
                raise ParseError(
                    f"pullback along {mname!r} lands on {cmap.source.name!r}", line
                )
            return pullback(cmap, arg)
        arg = self.parse()
        self.ts.expect(")")
        if name == "d":
            return ext_d(arg)
        if name == "exp":
            return self.exp(arg, line)
        if name == "re":
            return arg.real_part()
        if name == "im":
            return arg.imag_part()
        if name == "conj":
            return arg.conjugate()
        if name in _SCALAR_FUNCS:
            return MixedForm.scalar(self.chart, _SCALAR_FUNCS[name](self.as_scalar(arg, line)))
        if name in self.sc.bumps:
            fn = opaque_function(name)
            return MixedForm.scalar(self.chart, fn(self.as_scalar(arg, line)))
        raise ParseError(f"unknown function {name!r}", line)

    def exp(self, arg: MixedForm, line: int) -> MixedForm:
        scalar = arg.coefficient(())
        rest = arg - MixedForm.scalar(self.chart, scalar)
        out = exp_form(rest) if not rest.is_zero() else MixedForm.one(self.chart)
        if not sympy.sympify(scalar).is_zero:
            out = out.scale(sympy.exp(scalar))
        return out

    def as_scalar(self, f: MixedForm, line: int) -> sympy.Expr:
        if not f.is_homogeneous(0):
            raise ParseError("expected a scalar expression", line)
        return f.coefficient(())

    def power(self, base: MixedForm, n: int, line: int) -> MixedForm:
        s = self.as_scalar(base, line)
        return MixedForm.scalar(self.chart, s ** n)

    def combine(self, op: str, a: MixedForm, b: MixedForm, line: int) -> MixedForm:
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "^":
            keys = set(a.terms) | set(b.terms)
            out = wedge(a, b)
            if out.is_zero() and not a.is_zero() and not b.is_zero() and keys:
                shared = any(set(k1) & set(k2) for k1 in a.terms for k2 in b.terms)
                if shared:
                    self.sc.warnings.append(
                        f"line {line}: wedge with repeated differential is zero"
                    )
            return out
        if op == "*":
            if a.is_homogeneous(0):
                return b.scale(a.coefficient(()))
            if b.is_homogeneous(0):
                return a.scale(b.coefficient(()))
            raise ParseError("'*' needs a scalar factor; use '^' to wedge forms", line)
        if op == "/":
            return a.scale(1 / self.as_scalar(b, line))
        raise ParseError(f"unknown operator {op!r}", line)


def parse_expr(sc: Scenario, chart: Chart, ts: TokenStream) -> MixedForm:
    return ExprParser(sc, chart, ts).parse()


# ---------------------------------------------------------------------------
# Statement parsing
# ---------------------------------------------------------------------------


def _strip_comment(raw: str) -> str:
    in_string = False
    for i, ch in enumerate(raw):
        if ch == '"':
            in_string = not in_string
        elif ch == "#" and not in_string:
            return raw[:i]
    return raw


def parse_scenario(text: str) -> Scenario:
    sc = Scenario()
    # join continuation lines ending in a comma or an opening bracket
    for raw_no, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        line = re.sub(r"\s+", " ", line)
        sc.statements.append(line)
        ts = TokenStream(tokenize(line, raw_no), raw_no)
        _parse_statement(sc, ts, line)
    return sc


def _parse_statement(sc: Scenario, ts: TokenStream, text: str):
    head = ts.next()
    line = head.line
    table: dict[str, Callable] = {
        "title": _stmt_title, "chart": _stmt_chart, "region": _stmt_region,
        "bump": _stmt_bump, "form": _stmt_form, "scalar": _stmt_form,
        "map": _stmt_map, "spinor": _stmt_spinor, "build": _stmt_build,
        "group": _stmt_group, "manifold": _stmt_manifold, "locus": _stmt_locus,
        "check": _stmt_check, "surgery": _stmt_surgery, "cover": _stmt_cover,
        "report": _stmt_report,
    }
    if head.text == "branched" and ts.accept("-"):
        ts.expect("cover")
        return _stmt_branched_cover(sc, ts, line, text)
    fn = table.get(head.text)
    if fn is None:
        raise ParseError(f"unknown statement {head.text!r}", line)
    fn(sc, ts, line, text)


def _stmt_title(sc, ts, line, text):
    tok = ts.next()
    if tok.kind != "string":
        raise ParseError("title needs a quoted string", line)
    sc.title = tok.text.strip('"')


def _stmt_chart(sc, ts, line, text):
    name = ts.next().text
    ts.expect("=")
    coords = []
    while not ts.at_end():
        kind = ts.next().text
        cname = ts.next().text
        coords.append((cname, kind))
        if not ts.accept(","):
            break
    sc.charts[name] = Chart(name, coords)


def _read_number(ts, line) -> float:
    sign = 1.0
    if ts.accept("-"):
        sign = -1.0
    tok = ts.next()
    if tok.kind != "number":
        raise ParseError(f"expected a number, got {tok.text!r}", line)
    return sign * float(sympy.Rational(tok.text))


def _stmt_region(sc, ts, line, text):
    name = ts.next().text
    ts.expect("on")
    chart = _chart_ref(sc, ts, line)
    ts.expect("=")
    bounds: dict[str, tuple] = {}
    nonzero: list[str] = []
    bump_values: dict[str, int] = {}
    while not ts.at_end():
        if ts.accept("nonzero"):
            nonzero.append(ts.next().text)
        elif ts.accept("|"):
            cname = ts.next().text
            ts.expect("|")
            ts.expect("in")
            bounds[cname] = _interval(ts, line)
        else:
            cname = ts.next().text
            if ts.accept("in"):
                bounds[cname] = _interval(ts, line)
            else:
                ts.expect("=")
                val = int(_read_number(ts, line))
                if val not in (0, 1):
                    raise ParseError("bump pinning must be 0 or 1", line)
                bump_values[cname] = val
        if not ts.accept(","):
            break
    sc.regions[name] = Region.make(chart, name, bounds, nonzero, bump_values)


def _interval(ts, line) -> tuple[float, float]:
    ts.expect("(")
    lo = _read_number(ts, line)
    ts.expect(",")
    hi = _read_number(ts, line)
    ts.expect(")")
    return (lo, hi)


def _stmt_bump(sc, ts, line, text):
    name = ts.next().text
    ts.expect("=")
    ts.expect("0")
    ts.expect("upto")
    zero_upto = _read_number(ts, line)
    ts.expect(",")
    ts.expect("1")
    ts.expect("from")
    one_from = _read_number(ts, line)
    register_bump(name, zero_upto, one_from)
    sc.bumps[name] = (zero_upto, one_from)


def _chart_ref(sc, ts, line) -> Chart:
    tok = ts.peek()
    if tok is not None and tok.kind == "name" and tok.text in sc.charts:
        ts.next()
        return sc.charts[tok.text]
    raise ParseError("expected a chart name", line)


def _opt_chart(sc, ts, line) -> Chart:
    if ts.accept("on"):
        return _chart_ref(sc, ts, line)
    return sc.only_chart(line)


def _stmt_form(sc, ts, line, text):
    name = ts.next().text
    chart = _opt_chart(sc, ts, line)
    ts.expect("=")
    sc.forms[name] = parse_expr(sc, chart, ts)
    _assert_consumed(ts, line)


def _stmt_map(sc, ts, line, text):
    name = ts.next().text
    ts.expect(":")
    source = _chart_ref(sc, ts, line)
    ts.expect("->")
    target = _chart_ref(sc, ts, line)
    ts.expect("=")
    table = {}
    while not ts.at_end():
        leg = ts.next().text
        ts.expect("->")
        expr_form = parse_expr(sc, source, ts)
        if not expr_form.is_homogeneous(0):
            raise ParseError("map assignments must be scalar expressions", line)
        table[leg] = expr_form.coefficient(())
        if not ts.accept(","):
            break
    sc.maps[name] = CoordinateMap.make(source, target, table, name=name)


def _region_ref(sc, ts, line) -> Region:
    tok = ts.next()
    if tok.text not in sc.regions:
        raise ParseError(f"unknown region {tok.text!r}", line)
    return sc.regions[tok.text]


_SPINOR_CLAUSES = ("on", "rho", "h", "region", "vector", "covector",
                   "hint_b", "hint_omega", "hint_Omega", "hint_region")


def _stmt_spinor(sc, ts, line, text):
    name = ts.next().text
    ts.expect("=")
    first = ts.peek()
    if first is None or first.text not in _SPINOR_CLAUSES:
        # shorthand: the whole right-hand side is the spinor expression
        rho = parse_expr(sc, sc.only_chart(line), ts)
        _assert_consumed(ts, line)
        sc.spinors[name] = SpinorStructure.make(rho)
        return
    chart: Optional[Chart] = None
    rho = h = None
    region = None
    vector: dict[str, sympy.Expr] = {}
    covector = None
    hints: dict[str, object] = {}
    while not ts.at_end():
        key = ts.next().text
        if key == "on":
            chart = _chart_ref(sc, ts, line)
        elif key == "rho":
            chart = chart or sc.only_chart(line)
            rho = parse_expr(sc, chart, ts)
        elif key == "h":
            chart = chart or sc.only_chart(line)
            h = parse_expr(sc, chart, ts)
        elif key == "region":
            region = _region_ref(sc, ts, line)
        elif key == "vector":
            chart = chart or sc.only_chart(line)
            while True:
                leg = ts.next().text
                ts.expect("=")
                val = parse_expr(sc, chart, ts)
                vector[leg] = val.coefficient(())
                if not ts.accept(","):
                    break
        elif key == "covector":
            chart = chart or sc.only_chart(line)
            covector = parse_expr(sc, chart, ts)
        elif key in ("hint_b", "hint_omega", "hint_Omega"):
            chart = chart or sc.only_chart(line)
            hints[key[5:]] = parse_expr(sc, chart, ts)
        elif key == "hint_region":
            hints["region"] = _region_ref(sc, ts, line)
        else:
            raise ParseError(f"unknown spinor clause {key!r}", line)
        if not ts.accept(";"):
            break
    if rho is None:
        raise ParseError("spinor needs a 'rho' clause", line)
    chart = chart or sc.only_chart(line)
    certificate = None
    if vector or covector is not None:
        certificate = GeneralizedSection.make(chart, vector, covector)
    hint_obj = None
    if hints:
        for k in ("b", "omega", "Omega"):
            if k not in hints:
                raise ParseError(f"hints need hint_{k}", line)
        hint_obj = DecompositionHints(
            hints["b"], hints["omega"], hints["Omega"], hints.get("region")
        )
    sc.spinors[name] = SpinorStructure.make(
        rho, h, region=region, certificate=certificate, hints=hint_obj
    )


def _params(ts, line) -> tuple[int, int, int, int]:
    ts.expect("(")
    vals = []
    for k in range(4):
        vals.append(int(_read_number(ts, line)))
        if k < 3:
            ts.expect(",")
    ts.expect(")")
    return tuple(vals)


def _stmt_build(sc, ts, line, text):
    from .spinor import build_gluck_spinor, build_luttinger_spinor

    which = ts.next().text
    if which not in ("luttinger", "gluck"):
        raise ParseError("build needs 'luttinger' or 'gluck'", line)
    name = ts.next().text
    ts.expect("=")
    ts.expect("params")
    params = _params(ts, line)
    chart = None
    extra = None
    while ts.accept(";"):
        key = ts.next().text
        if key == "on":
            chart = _chart_ref(sc, ts, line)
        elif key == "sigma":
            chart = chart or sc.only_chart(line)
            extra = parse_expr(sc, chart, ts)
        else:
            raise ParseError(f"unknown build clause {key!r}", line)
    if which == "luttinger":
        sc.spinors[name] = build_luttinger_spinor(params, sigma_form=extra, chart=chart)
    else:
        sc.spinors[name] = build_gluck_spinor(params, r_form=extra, chart=chart)
    sc.bumps.setdefault("xi", (0.25, 0.5))


def _presentation(ts, line) -> GroupPresentation:
    ts.expect("<")
    gens = []
    while True:
        tok = ts.next()
        if tok.text == "|":
            break
        if tok.text == ",":
            continue
        gens.append(tok.text)
    relators = []
    depth = 0
    word: list[str] = []
    while True:
        tok = ts.next()
        if tok.text == "[":
            depth += 1
        elif tok.text == "]":
            depth -= 1
        if tok.text == ">" and depth == 0:
            break
        if tok.text == "," and depth == 0:
            if word:
                relators.append("".join(word))
            word = []
            continue
        word.append(tok.text)
    if word:
        relators.append("".join(word))
    return GroupPresentation.make(gens, relators)


def _stmt_group(sc, ts, line, text):
    name = ts.next().text
    ts.expect("=")
    sc.groups[name] = _presentation(ts, line)


def _stmt_manifold(sc, ts, line, text):
    name = ts.next().text
    ts.expect("=")
    fields = {
        "name": name, "dimension": None, "euler": None, "signature": None,
        "spin": "unknown", "pi1": None, "b2": None,
    }
    components: list[TypeChangeComponent] = []
    while not ts.at_end():
        key = ts.next().text
        if key == "dim":
            fields["dimension"] = int(_read_number(ts, line))
        elif key == "chi":
            fields["euler"] = int(_read_number(ts, line))
        elif key == "sigma":
            fields["signature"] = int(_read_number(ts, line))
        elif key == "spin":
            tok = ts.next().text
            if tok == "non" and ts.accept("-"):
                tok = "non-" + ts.next().text
            fields["spin"] = tok
        elif key == "pi1":
            tok = ts.peek()
            if tok is not None and tok.text == "<":
                fields["pi1"] = _presentation(ts, line)
            else:
                gname = ts.next().text
                if gname == "unknown":
                    fields["pi1"] = None
                elif gname in sc.groups:
                    fields["pi1"] = sc.groups[gname]
                else:
                    raise ParseError(f"unknown group {gname!r}", line)
        elif key == "b2":
            fields["b2"] = int(_read_number(ts, line))
        elif key == "component":
            components.append(TypeChangeComponent.make(ts.next().text))
        else:
            raise ParseError(f"unknown manifold clause {key!r}", line)
        if not ts.accept(";"):
            break
    if fields["dimension"] is None or fields["euler"] is None:
        raise ParseError("manifold needs 'dim' and 'chi'", line)
    sc.manifolds[name] = ManifoldDescriptor(
        name=name, dimension=fields["dimension"], euler=fields["euler"],
        signature=fields["signature"], spin=fields["spin"], pi1=fields["pi1"],
        b2=fields["b2"], components=tuple(components),
    )


def _word_tokens(ts, line) -> str:
    """Consume tokens of a free-group word up to ';' or end."""
    out = []
    while not ts.at_end():
        tok = ts.peek()
        if tok.text == ";":
            break
        out.append(ts.next().text)
    if not out:
        raise ParseError("expected a group word", line)
    return "".join(out)


def _stmt_locus(sc, ts, line, text):
    name = ts.next().text
    ts.expect("on")
    mname = ts.next().text
    if mname not in sc.manifolds:
        raise ParseError(f"unknown manifold {mname!r}", line)
    ts.expect("=")
    kind = None
    fields = {"complement": None, "meridian": None, "circle1": None,
              "circle2": None, "sigma_label": "Sigma_1", "r_b1": 0, "euler": 0}
    flags = {"neighborhood_trivial": True, "j_symplectic": True}
    while not ts.at_end():
        key = ts.next().text
        if key == "kind":
            kind = ts.next().text
        elif key == "complement":
            tok = ts.peek()
            if tok is not None and tok.text == "<":
                fields["complement"] = _presentation(ts, line)
            else:
                gname = ts.next().text
                if gname not in sc.groups:
                    raise ParseError(f"unknown group {gname!r}", line)
                fields["complement"] = sc.groups[gname]
        elif key in ("meridian", "circle1", "circle2"):
            fields[key] = parse_word(_word_tokens(ts, line))
        elif key == "sigma_label":
            fields["sigma_label"] = ts.next().text
        elif key == "r_b1":
            fields["r_b1"] = int(_read_number(ts, line))
        elif key == "chi":
            fields["euler"] = int(_read_number(ts, line))
        elif key == "nontrivial_neighborhood":
            flags["neighborhood_trivial"] = False
        elif key == "not_j_symplectic":
            flags["j_symplectic"] = False
        else:
            raise ParseError(f"unknown locus clause {key!r}", line)
        if not ts.accept(";"):
            break
    if kind is None:
        raise ParseError("locus needs a 'kind' clause", line)
    locus = SurgeryLocus(name=name, kind=kind, **flags, **fields)
    m = sc.manifolds[mname]
    from dataclasses import replace as _replace

    sc.manifolds[mname] = _replace(m, loci=m.loci + (locus,))


def _point(ts, line) -> dict[str, complex]:
    """name = scalar-constant pairs (i allowed), up to a keyword."""
    out = {}
    while True:
        leg = ts.next().text
        ts.expect("=")
        toks = []
        depth = 0
        while not ts.at_end():
            tok = ts.peek()
            if tok.text == "(":
                depth += 1
            elif tok.text == ")":
                depth -= 1
            if depth == 0 and tok.kind == "name" and tok.text in ("expect", "on") :
                break
            if depth == 0 and tok.text == ",":
                break
            toks.append(ts.next().text)
        expr = sympy.sympify("".join(toks).replace("i", "I"))
        out[leg] = complex(expr)
        if not ts.accept(","):
            break
    return out


def _stmt_check(sc, ts, line, text):
    what = ts.next().text
    payload: dict = {"what": what}
    if what == "params":
        payload["params"] = _params(ts, line)
    elif what == "type":
        payload["spinor"] = ts.next().text
        ts.expect("at")
        payload["point"] = _point(ts, line)
        if ts.accept("on"):
            payload["region"] = _region_ref(sc, ts, line).name
    elif what in ("stable", "integrable"):
        payload["spinor"] = ts.next().text
    elif what == "nondegenerate":
        payload["spinor"] = ts.next().text
        ts.expect("at")
        payload["point"] = _point(ts, line)
    elif what == "equal":
        payload["chart"] = _opt_chart(sc, ts, line).name
        chart = sc.charts[payload["chart"]]
        payload["left"] = parse_expr(sc, chart, ts)
        ts.expect(",")
        payload["right"] = parse_expr(sc, chart, ts)
        if ts.accept("on"):
            payload["region"] = _region_ref(sc, ts, line).name
        if ts.accept("scale"):
            scale = parse_expr(sc, chart, ts)
            payload["scale"] = scale.coefficient(())
    elif what == "lemma":
        ts.expect("params")
        payload["params"] = _params(ts, line)
        if ts.accept("profile"):
            payload["profile"] = ts.next().text
    elif what == "assembly":
        ts.expect("params")
        payload["params"] = _params(ts, line)
        if ts.accept("profile"):
            payload["profile"] = ts.next().text
    elif what in ("chi", "sigma", "components", "hetero"):
        payload["manifold"] = ts.next().text
    elif what == "abelianization":
        payload["target"] = ts.next().text
        ts.expect("expect")
        ts.expect("rank")
        payload["rank"] = int(_read_number(ts, line))
        ts.expect("torsion")
        ts.expect("[")
        torsion = []
        while not ts.accept("]"):
            torsion.append(int(_read_number(ts, line)))
            ts.accept(",")
        payload["torsion"] = torsion
        sc.commands.append(Command("check", payload, line, text))
        return
    elif what == "classify5":
        if ts.accept("k"):
            payload["k"] = int(_read_number(ts, line))
        else:
            ts.expect("b2")
            b2 = int(_read_number(ts, line))
            ts.expect("genus")
            genus = int(_read_number(ts, line))
            payload["k"] = b2 + 2 * genus - 1
        ts.expect("spin")
        tok = ts.next().text
        if tok == "non" and ts.accept("-"):
            tok = "non-" + ts.next().text
        payload["spin"] = tok
        ts.expect("expect")
        s = ts.next()
        if s.kind != "string":
            raise ParseError("classify5 expects a quoted string", line)
        payload["expect"] = s.text.strip('"')
        sc.commands.append(Command("check", payload, line, text))
        return
    elif what == "riemann":
        ts.expect("-")
        ts.expect("hurwitz")
        ts.expect("gcover")
        payload["gcover"] = int(_read_number(ts, line))
        ts.expect("gbase")
        payload["gbase"] = int(_read_number(ts, line))
        ts.expect("degree")
        payload["degree"] = int(_read_number(ts, line))
        ts.expect("indices")
        ts.expect("[")
        idx = []
        while not ts.accept("]"):
            idx.append(int(_read_number(ts, line)))
            ts.accept(",")
        payload["indices"] = idx
        payload["what"] = "riemann-hurwitz"
    else:
        raise ParseError(f"unknown check {what!r}", line)
    ts.expect("expect")
    payload["expect"] = _expect_value(ts, line)
    _assert_consumed(ts, line)
    sc.commands.append(Command("check", payload, line, text))


def _expect_value(ts, line):
    tok = ts.next()
    if tok.kind == "string":
        return tok.text.strip('"')
    if tok.kind == "number":
        return int(float(sympy.Rational(tok.text)))
    if tok.text == "-":
        n = ts.next()
        return -int(float(sympy.Rational(n.text)))
    return tok.text  # ok / reject / true / false / found / infeasible / equal...


def _stmt_surgery(sc, ts, line, text):
    new = ts.next().text
    ts.expect("=")
    which = ts.next().text
    if which not in ("luttinger", "gluck"):
        raise ParseError("surgery needs 'luttinger' or 'gluck'", line)
    mname = ts.next().text
    ts.expect("at")
    lname = ts.next().text
    ts.expect("params")
    params = _params(ts, line)
    _assert_consumed(ts, line)
    sc.commands.append(Command("surgery", {
        "new": new, "which": which, "manifold": mname, "locus": lname,
        "params": params,
    }, line, text))


def _stmt_cover(sc, ts, line, text):
    new = ts.next().text
    ts.expect("=")
    mname = ts.next().text
    ts.expect("degree")
    d = int(_read_number(ts, line))
    _assert_consumed(ts, line)
    sc.commands.append(Command("cover", {"new": new, "manifold": mname, "degree": d},
                               line, text))


def _stmt_branched_cover(sc, ts, line, text):
    new = ts.next().text
    ts.expect("=")
    mname = ts.next().text
    ts.expect("degree")
    deg = int(_read_number(ts, line))
    branches = []
    while ts.accept(";"):
        ts.expect("branch")
        label = ts.next().text
        ts.expect("chi")
        chi = int(_read_number(ts, line))
        ts.expect("indices")
        idx = []
        while not ts.at_end() and ts.peek().kind == "number":
            idx.append(int(_read_number(ts, line)))
            ts.accept(",")
        branches.append(BranchComponent(label, chi, tuple(idx)))
    _assert_consumed(ts, line)
    sc.commands.append(Command("branched-cover", {
        "new": new, "manifold": mname,
        "branching": BranchingData(deg, tuple(branches)),
    }, line, text))


def _stmt_report(sc, ts, line, text):
    ts.expect("components")
    mname = ts.next().text
    _assert_consumed(ts, line)
    sc.commands.append(Command("report", {"manifold": mname}, line, text))


def _assert_consumed(ts: TokenStream, line: int):
    if not ts.at_end():
        rest = " ".join(t.text for t in ts.rest())
        raise ParseError(f"trailing tokens: {rest!r}", line)
