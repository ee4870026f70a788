"""Pure spinors: type, nondegeneracy, stability, twisted integrability,
B-field transforms, and the glued surgery spinors.

A spinor structure is a mixed form rho together with a closed twisting
3-form H.  Integrability means d_H rho = (X + xi) . rho for some
generalized section; certificates are either supplied and verified, or
searched for with a constant-coefficient linear solve followed by
symbolic re-verification.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Mapping, Optional, Sequence

import numpy
import sympy

from .chart import Chart, Coordinate, Region, everywhere
from .forms import (
    FormError,
    GeneralizedSection,
    MixedForm,
    clifford,
    d,
    first_disagreement,
    form_equal,
    interior,
    wedge,
)
from .maps import CoordinateMap, pullback
from .scalars import EvaluationError, merge_domains, opaque_function, register_bump
from .topology import SurgeryParams, validate_surgery_params


class SpinorError(ValueError):
    """Ill-formed spinor structure or failed geometric precondition."""


@dataclass(frozen=True)
class DecompositionHints:
    """A stated local decomposition rho = e^{B + i omega} ^ Omega."""

    b: MixedForm
    omega: MixedForm
    big_omega: MixedForm
    region: Optional[Region] = None


@dataclass(frozen=True)
class SpinorStructure:
    chart: Chart
    rho: MixedForm
    h: MixedForm
    region: Optional[Region] = None
    certificate: Optional[GeneralizedSection] = None
    hints: Optional[DecompositionHints] = None

    @staticmethod
    def make(rho: MixedForm, h: Optional[MixedForm] = None,
             region: Optional[Region] = None,
             certificate: Optional[GeneralizedSection] = None,
             hints: Optional[DecompositionHints] = None,
             samples: int = 8, seed: int = 0, tol: float = 1e-9) -> "SpinorStructure":
        chart = rho.chart
        if h is None:
            h = MixedForm.zero(chart)
        if not h.is_zero() and not h.is_homogeneous(3):
            raise SpinorError("twisting form must be a 3-form")
        if not form_equal(d(h), MixedForm.zero(chart), region=region,
                          samples=samples, seed=seed, tol=tol):
            raise SpinorError("twisting 3-form is not closed")
        s = SpinorStructure(chart, rho, h, region, certificate, hints)
        if hints is not None:
            stated = wedge(
                exp_of(hints.b + hints.omega.scale(sympy.I)), hints.big_omega
            )
            reg = merge_domains(region, hints.region)
            if not form_equal(rho, stated, region=reg, samples=samples,
                              seed=seed, tol=tol):
                raise SpinorError(
                    "decomposition hints do not reproduce rho on their region"
                )
        return s

    def d_h_rho(self) -> MixedForm:
        return d(self.rho) + wedge(self.h, self.rho)


def exp_of(b: MixedForm) -> MixedForm:
    from .forms import exp_form

    return exp_form(b)


# ---------------------------------------------------------------------------
# Pointwise checks
# ---------------------------------------------------------------------------


def type_at(rho: MixedForm, point: Mapping[str, complex],
            region: Optional[Region] = None, tol: float = 1e-9) -> int:
    """Lowest degree with a nonvanishing coefficient block at the point."""
    region = merge_domains(region, rho.domain)
    values = rho.evaluate_at(point, region)
    live = [len(k) for k, v in values.items() if abs(v) > tol]
    if not live:
        raise SpinorError(f"spinor vanishes at {dict(point)!r}: not pure there")
    return min(live)


def check_nondegenerate(s: SpinorStructure, point: Mapping[str, complex],
                        tol: float = 1e-9) -> bool:
    """Test Omega ^ conj(Omega) ^ omega^(m-k) != 0 at the point."""
    if s.hints is None:
        raise SpinorError("nondegeneracy needs decomposition hints")
    chart = s.chart
    if chart.dim % 2:
        raise SpinorError("odd-dimensional chart")
    m = chart.dim // 2
    big = s.hints.big_omega
    degs = [deg for deg in big.degrees if deg > 0] or [0]
    k = degs[0]
    if not big.is_homogeneous(k):
        raise SpinorError("Omega hint is not homogeneous")
    top = wedge(big, big.conjugate())
    from .forms import wedge_power

    top = wedge(top, wedge_power(s.hints.omega, m - k))
    region = merge_domains(s.region, s.hints.region)
    values = top.evaluate_at(point, region)
    full = tuple(range(chart.dim))
    return abs(values.get(full, 0.0)) > tol


# ---------------------------------------------------------------------------
# Integrability
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntegrabilityResult:
    ok: bool
    certificate: Optional[GeneralizedSection]
    message: str

    def __bool__(self):
        return self.ok


def check_integrable(s: SpinorStructure, samples: int = 32, seed: int = 0,
                     tol: float = 1e-9) -> IntegrabilityResult:
    """Verify a stored certificate, or solve for a constant one."""
    target = s.d_h_rho()
    if s.certificate is not None:
        ok = form_equal(target, clifford(s.certificate, s.rho), region=s.region,
                        samples=samples, seed=seed, tol=tol)
        if ok:
            return IntegrabilityResult(True, s.certificate, "stored certificate verified")
        return IntegrabilityResult(False, None, "stored certificate fails to reproduce d_H rho")
    cert = _solve_certificate(s, target, samples=samples, seed=seed, tol=tol)
    if cert is None:
        return IntegrabilityResult(
            False, None, "not integrable (at sampled genericity): no constant certificate"
        )
    return IntegrabilityResult(True, cert, "certificate found by linear solve")


def _solve_certificate(s: SpinorStructure, target: MixedForm,
                       samples: int, seed: int, tol: float) -> Optional[GeneralizedSection]:
    chart = s.chart
    region = s.region if s.region is not None else everywhere(chart)
    # one unknown per vector leg and per covector leg
    actions = [interior({leg.name: 1}, s.rho) for leg in chart.legs]
    actions += [wedge(MixedForm.basis(chart, leg.name), s.rho) for leg in chart.legs]
    keys = sorted(set(target.terms) | {k for a in actions for k in a.terms})
    rng = random.Random(seed)
    rows, rhs = [], []
    points = 0
    attempts = 0
    while points < max(6, min(10, samples)) and attempts < samples * 4:
        attempts += 1
        pt = region.sample(rng)
        try:
            tv = target.evaluate_at(pt, region)
            avs = [a.evaluate_at(pt, region) for a in actions]
        except EvaluationError:
            continue
        points += 1
        for key in keys:
            rows.append([av.get(key, 0.0) for av in avs])
            rhs.append(tv.get(key, 0.0))
    if points == 0:
        raise SpinorError("cannot sample the region for the integrability solve")
    mat = numpy.array(rows, dtype=complex)
    vec = numpy.array(rhs, dtype=complex)
    sol, *_ = numpy.linalg.lstsq(mat, vec, rcond=None)
    residual = numpy.linalg.norm(mat @ sol - vec)
    scale = max(1.0, numpy.linalg.norm(vec))
    if residual > 1e-7 * scale:
        return None
    coeffs = [_rationalize(c) for c in sol]
    n = chart.dim
    vector = {
        leg.name: coeffs[i] for i, leg in enumerate(chart.legs)
        if not sympy.sympify(coeffs[i]).is_zero
    }
    cov = MixedForm(chart, {
        (chart.leg_index(leg.name),): coeffs[n + i]
        for i, leg in enumerate(chart.legs)
        if not sympy.sympify(coeffs[n + i]).is_zero
    })
    cert = GeneralizedSection.make(chart, vector, cov)
    if form_equal(target, clifford(cert, s.rho), region=s.region,
                  samples=samples, seed=seed + 1, tol=tol):
        return cert
    return None


def _rationalize(c: complex) -> sympy.Expr:
    out = sympy.Integer(0)
    for part, unit in ((c.real, sympy.Integer(1)), (c.imag, sympy.I)):
        if abs(part) < 1e-10:
            continue
        frac = Fraction(part).limit_denominator(1000)
        if abs(float(frac) - part) < 1e-9:
            out += sympy.Rational(frac.numerator, frac.denominator) * unit
        else:
            out += sympy.Float(part) * unit
    return out


# ---------------------------------------------------------------------------
# Stability
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StabilityResult:
    stable: bool
    locus: Optional[sympy.Expr]  # None means the anticanonical section never vanishes
    message: str

    def __bool__(self):
        return self.stable


def check_stable(s: SpinorStructure, samples: int = 12, seed: int = 0,
                 witnesses: Optional[Sequence[Mapping[str, complex]]] = None,
                 tol: float = 1e-7) -> StabilityResult:
    """Transversality of the degree-0 part along its zero set.

    Zero-set points are found by solving when s0 is affine in one
    complex coordinate (or polynomial in a single one); otherwise
    witness points must be supplied.
    """
    chart = s.chart
    s0 = sympy.sympify(s.rho.coefficient(()))
    if s0.is_zero:
        raise SpinorError("degree-0 part vanishes identically: not a pure spinor")
    region = s.region if s.region is not None else everywhere(chart)
    rng = random.Random(seed)
    if witnesses is not None:
        zeros = [chart.point(w) for w in witnesses]
    else:
        zeros = _sample_zero_set(chart, s0, region, rng, samples)
    if zeros is None:
        raise SpinorError(
            "cannot sample the zero set of the degree-0 part; supply witness points"
        )
    if not zeros:
        return StabilityResult(True, None, "degree-0 part has empty zero set")
    for pt in zeros:
        if _real_differential_rank(chart, s0, pt, tol) != 2:
            return StabilityResult(
                False, s0, "real differential drops rank on the zero set"
            )
    return StabilityResult(
        True, s0, f"transverse at {len(zeros)} sampled zero(s); type change locus {{{s0} = 0}}"
    )


def _sample_zero_set(chart: Chart, s0: sympy.Expr, region: Region, rng,
                     samples: int):
    """Points with s0 = 0, or [] when s0 never vanishes, or None if stuck."""
    free = s0.free_symbols
    if not free:
        return [] if s0 != 0 else None
    for coord in chart.coords:
        if coord.kind != "complex":
            continue
        z = chart.symbol(coord.name)
        zb = chart.symbol(coord.name + "b")
        if z not in free and zb not in free:
            continue
        fz, fzb = sympy.diff(s0, z), sympy.diff(s0, zb)
        affine = all(
            sympy.diff(g, v).is_zero for g in (fz, fzb) for v in (z, zb)
        )
        if affine:
            pts = _affine_zeros(chart, s0, coord.name, region, rng, samples)
            if pts is not None:
                return pts
        if free <= {z, zb} and zb not in free:
            roots = sympy.solve(s0, z)
            pts = []
            for root in roots:
                if root.free_symbols:
                    continue
                try:
                    base = region.sample(rng)
                except Exception:
                    return None
                base = dict(base)
                base[coord.name] = complex(sympy.N(root))
                base[coord.name + "b"] = complex(sympy.N(root)).conjugate()
                pts.append(chart.point(base))
            return pts if pts else None
    return None


def _affine_zeros(chart: Chart, s0, zname: str, region: Region, rng,
                  samples: int):
    z = chart.symbol(zname)
    zb = chart.symbol(zname + "b")
    alpha, beta = sympy.diff(s0, z), sympy.diff(s0, zb)
    gamma = sympy.expand(s0 - alpha * z - beta * zb)
    pts = []
    tries = 0
    while len(pts) < max(4, samples // 2) and tries < samples * 6:
        tries += 1
        base = region.sample(rng)
        try:
            from .scalars import evaluate_expr

            av = evaluate_expr(alpha, chart, base)
            bv = evaluate_expr(beta, chart, base)
            gv = evaluate_expr(gamma, chart, base)
        except EvaluationError:
            continue
        # alpha z + beta conj(z) + gamma = 0 as a real 2x2 system in (x, y)
        mat = numpy.array(
            [[(av + bv).real, (1j * (av - bv)).real],
             [(av + bv).imag, (1j * (av - bv)).imag]]
        )
        if abs(numpy.linalg.det(mat)) < 1e-12:
            continue
        xy = numpy.linalg.solve(mat, numpy.array([-gv.real, -gv.imag]))
        zval = complex(xy[0], xy[1])
        pt = dict(base)
        pt[zname] = zval
        pt[zname + "b"] = zval.conjugate()
        pts.append(chart.point(pt))
    return pts if pts else None


def _real_differential_rank(chart: Chart, s0: sympy.Expr,
                            point: Mapping[str, complex], tol: float) -> int:
    from .scalars import evaluate_expr, pin_bumps

    cols = []
    for coord in chart.coords:
        if coord.kind == "complex":
            fz = sympy.diff(s0, chart.symbol(coord.name))
            fzb = sympy.diff(s0, chart.symbol(coord.name + "b"))
            cols.append(fz + fzb)                # d/dx
            cols.append(sympy.I * (fz - fzb))    # d/dy
        else:
            cols.append(sympy.diff(s0, chart.symbol(coord.name)))
    vals = []
    for c in cols:
        c = sympy.cancel(sympy.together(c)) if c.free_symbols else c
        vals.append(evaluate_expr(c, chart, point))
    mat = numpy.array([[v.real for v in vals], [v.imag for v in vals]])
    return int(numpy.linalg.matrix_rank(mat, tol=tol))


# ---------------------------------------------------------------------------
# B-field transform
# ---------------------------------------------------------------------------


def b_field_transform(s: SpinorStructure, b: MixedForm,
                      samples: int = 8, seed: int = 0) -> SpinorStructure:
    """rho -> e^B ^ rho, H -> H - dB; the certificate is transported."""
    if not b.is_homogeneous(2):
        raise SpinorError("B-field must be a 2-form")
    if not form_equal(b, b.conjugate(), region=s.region, samples=samples, seed=seed):
        raise SpinorError("B-field must be real")
    rho = wedge(exp_of(b), s.rho)
    h = s.h - d(b)
    cert = s.certificate
    if cert is not None:
        # (X, xi) -> (X, xi - i_X B)
        cert = GeneralizedSection.make(
            s.chart, cert.vector_map, cert.covector - interior(cert.vector_map, b)
        )
    hints = s.hints
    if hints is not None:
        hints = replace(hints, b=hints.b + b)
    return SpinorStructure(s.chart, rho, h, s.region, cert, hints)


# ---------------------------------------------------------------------------
# Surgery spinors (Luttinger and Gluck)
# ---------------------------------------------------------------------------

# bump thresholds shared by all builders: xi = 0 on [0, 1/4], 1 on [1/2, 1]
BUMP_ZERO_UPTO = 0.25
BUMP_ONE_FROM = 0.5


def _as_params(params) -> SurgeryParams:
    if isinstance(params, SurgeryParams):
        return params
    return validate_surgery_params(*params)


def surgery_exponent(chart: Chart, params: SurgeryParams, bump: str = "xi",
                     squared: bool = False, sphere: bool = False) -> MixedForm:
    """The closed 2-form exponent of the surgery spinor z1 e^E.

    ``squared`` selects the bump argument |z1|^2 instead of |z1|;
    ``sphere`` appends the Gluck block in the stereographic coordinate
    z3.
    """
    p, q, a, b = params.p, params.q, params.a, params.b
    z1, z1b = chart.symbol("z1"), chart.symbol("z1b")
    xi = register_bump(bump, BUMP_ZERO_UPTO, BUMP_ONE_FROM)
    arg = z1 * z1b if squared else sympy.sqrt(z1 * z1b)
    i1, i1b = chart.leg_index("z1"), chart.leg_index("z1b")
    i2, i2b = chart.leg_index("z2"), chart.leg_index("z2b")
    half_a = sympy.Rational(a, 2)
    terms = {
        (i1, i1b): -sympy.Rational(p, 4) * xi(arg) / (z1 * z1b),
        (i2, i2b): -sympy.Rational(b, 2),
        (i1, i2): (half_a - q) / (2 * z1),
        (i1, i2b): -(half_a + q) / (2 * z1),
    }
    if sphere:
        z3, z3b = chart.symbol("z3"), chart.symbol("z3b")
        i3, i3b = chart.leg_index("z3"), chart.leg_index("z3b")
        den = (1 + z3 * z3b) ** 2
        terms[(i2, i3)] = -2 * z3b / den
        terms[(i2, i3b)] = -2 * z3 / den
    return MixedForm(chart, terms)


def surgery_certificate(chart: Chart, params: SurgeryParams,
                        exponent: MixedForm) -> GeneralizedSection:
    """The analytic certificate for z1 e^E: d(z1 e^E) = (X + xi) . (z1 e^E).

    X is a constant field in the z2 directions chosen so that i_X E
    reproduces the singular dz1/z1 term; the covector part is then
    dz1/z1 - i_X E, which is smooth.
    """
    a, q = params.a, params.q
    if a != 2 * q:
        vector = {"z2": sympy.Rational(-4, a - 2 * q)}
    else:
        # valid parameters force q != 0 here
        vector = {"z2b": sympy.Rational(1, q)}
    z1 = chart.symbol("z1")
    sing = MixedForm.basis(chart, "z1").scale(1 / z1)
    cov = sing - interior(vector, exponent)
    cov = cov.map_coefficients(lambda c: sympy.cancel(sympy.together(c)))
    if any(c.has(z1) and sympy.denom(c).has(z1) for c in cov.terms.values()):
        raise SpinorError("certificate covector failed to desingularize")
    return GeneralizedSection.make(chart, vector, cov)


def surgery_regions(chart: Chart, bump: str = "xi") -> dict[str, Region]:
    """The sampling regions of the surgery disk: full, bump-0 core, bump-1 annulus."""
    return {
        "disk": Region.make(chart, "disk", bounds={"z1": (0.05, 1.0)}),
        "core": Region.make(chart, "core", bounds={"z1": (0.02, BUMP_ZERO_UPTO)},
                            bump_values={bump: 0}),
        "annulus": Region.make(chart, "annulus", bounds={"z1": (0.6, 0.95)},
                               bump_values={bump: 1}),
    }


def build_luttinger_spinor(params, sigma_form: Optional[MixedForm] = None,
                           chart: Optional[Chart] = None,
                           bump: str = "xi") -> SpinorStructure:
    """The extension spinor z1 e^E ^ e^{i phi*(omega_Sigma)} on D^2 x T^2 x Sigma.

    With no Sigma factor the chart is C^2 = {(z1, z2)}; otherwise the
    supplied chart must contain z1, z2 and the Sigma coordinates of
    sigma_form (on which the gluing acts as the identity, so the
    pullback of omega_Sigma is omega_Sigma itself).
    """
    params = _as_params(params)
    if chart is None:
        chart = sigma_form.chart if sigma_form is not None else Chart(
            "luttinger", [("z1", "complex"), ("z2", "complex")]
        )
    exponent = surgery_exponent(chart, params, bump=bump)
    if sigma_form is not None:
        if not form_equal(d(sigma_form), MixedForm.zero(chart), samples=8):
            raise SpinorError("Sigma symplectic form must be closed")
        exponent = exponent + sigma_form.scale(sympy.I)
    z1 = chart.symbol("z1")
    rho = wedge(MixedForm.scalar(chart, z1), exp_of(exponent))
    rho = rho.map_coefficients(lambda c: sympy.cancel(sympy.together(c)))
    cert = surgery_certificate(chart, params, exponent)
    full = surgery_regions(chart, bump)["disk"]
    return SpinorStructure(chart, rho, MixedForm.zero(chart), full, cert, None)


def build_gluck_spinor(params, r_form: Optional[MixedForm] = None,
                       chart: Optional[Chart] = None,
                       bump: str = "xi") -> SpinorStructure:
    """The Gluck spinor rho~1 ^ e^{i phi*(omega_R)} on D^2 x T^2 x R x S^2.

    z3 is the stereographic coordinate on S^2; with R a point this
    reduces to rho~1 alone.
    """
    params = _as_params(params)
    if chart is None:
        chart = r_form.chart if r_form is not None else Chart(
            "gluck", [("z1", "complex"), ("z2", "complex"), ("z3", "complex")]
        )
    exponent = surgery_exponent(chart, params, bump=bump, squared=True, sphere=True)
    if r_form is not None:
        if not form_equal(d(r_form), MixedForm.zero(chart), samples=8):
            raise SpinorError("R symplectic form must be closed")
        exponent = exponent + r_form.scale(sympy.I)
    z1 = chart.symbol("z1")
    rho = wedge(MixedForm.scalar(chart, z1), exp_of(exponent))
    rho = rho.map_coefficients(lambda c: sympy.cancel(sympy.together(c)))
    cert = surgery_certificate(chart, params, exponent)
    full = surgery_regions(chart, bump)["disk"]
    return SpinorStructure(chart, rho, MixedForm.zero(chart), full, cert, None)


# ---------------------------------------------------------------------------
# The gluing diffeomorphism and the Lemma equivalence
# ---------------------------------------------------------------------------

RADIAL_PROFILES = ("lemma", "paper")


def collar_charts(sigma: Sequence[tuple[str, str]] = ()) -> tuple[Chart, Chart]:
    """Polar collar charts for the two sides of the gluing."""
    src = Chart("collar", [("r", "radial"), ("t0", "angle"), ("t1", "angle"),
                           ("t2", "angle"), *sigma])
    tgt = Chart("collar~", [("rt", "radial"), ("s0", "angle"), ("s1", "angle"),
                            ("s2", "angle"), *sigma])
    return src, tgt


def luttinger_gluing_map(params, sigma: Sequence[tuple[str, str]] = (),
                         profile: str = "lemma") -> tuple[CoordinateMap, MixedForm]:
    """The gluing phi on the collar, and the product form omega~ upstairs.

    The radial profile fixes r_t as a function of r: "paper" uses
    sqrt(2 log(r e)) as displayed; "lemma" uses sqrt(log(r e)), for
    which r_t dr_t = dr/2r and the extension spinor's imaginary
    exponent equals phi*(omega~) exactly.  The angular part is
    (t0, t2) -> (p t0 + a t2, q t0 + b t2), identity on t1 and Sigma.
    """
    params = _as_params(params)
    if profile not in RADIAL_PROFILES:
        raise SpinorError(f"unknown radial profile {profile!r}")
    src, tgt = collar_charts(sigma)
    r = src.symbol("r")
    inner = sympy.log(r * sympy.E)
    rt = sympy.sqrt(2 * inner) if profile == "paper" else sympy.sqrt(inner)
    table = {
        "rt": rt,
        "s0": params.p * src.symbol("t0") + params.a * src.symbol("t2"),
        "s1": src.symbol("t1"),
        "s2": params.q * src.symbol("t0") + params.b * src.symbol("t2"),
    }
    for name, _kind in sigma:
        table[name] = src.symbol(name)
    domain = Region.make(src, "gluing-collar", bounds={"r": (0.45, 0.99)})
    phi = CoordinateMap.make(src, tgt, table, domain=domain, name="phi")
    omega_tilde = MixedForm(tgt, {
        (tgt.leg_index("rt"), tgt.leg_index("s0")): tgt.symbol("rt"),
        (tgt.leg_index("s1"), tgt.leg_index("s2")): sympy.Integer(1),
    })
    return phi, omega_tilde


def disk_to_complex_map(polar: Chart, cx: Chart) -> CoordinateMap:
    """z1 = r e^{i t0}, z2 = t1 + i t2 (plus identity on any extra legs)."""
    r, t0, t1, t2 = (polar.symbol(n) for n in ("r", "t0", "t1", "t2"))
    table = {"z1": r * sympy.exp(sympy.I * t0), "z2": t1 + sympy.I * t2}
    for leg in cx.legs:
        if leg.coord not in ("z1", "z2") and leg.kind not in ("anti",):
            table[leg.name] = polar.symbol(leg.name)
    return CoordinateMap.make(polar, cx, table, name="psi")


def lemma_extension_check(params, profile: str = "lemma", samples: int = 64,
                          seed: int = 0, tol: float = 1e-9) -> bool:
    """On the xi = 1 annulus, z1 e^E equals z1 e^{B0 + i phi*(omega~)}.

    This is the extension lemma with Sigma a point: the imaginary part
    of the pulled-back exponent must coincide with phi*(omega~) for the
    chosen radial profile, the real part being the B-field witness B0.
    """
    params = _as_params(params)
    s = build_luttinger_spinor(params)
    polar, _ = collar_charts()
    psi = disk_to_complex_map(polar, s.chart)
    exponent = surgery_exponent(s.chart, params)
    epull = pullback(psi, exponent).map_coefficients(
        lambda c: sympy.simplify(c)
    )
    phi, omega_tilde = luttinger_gluing_map(params, profile=profile)
    omega_pull = pullback(phi, omega_tilde)
    annulus = Region.make(polar, "annulus", bounds={"r": (0.6, 0.95)},
                          bump_values={"xi": 1})
    if not form_equal(epull.imag_part(), omega_pull, region=annulus,
                      samples=samples, seed=seed, tol=tol):
        return False
    b0 = epull.real_part()
    rho_pull = pullback(psi, s.rho)
    z1_here = polar.symbol("r") * sympy.exp(sympy.I * polar.symbol("t0"))
    stated = wedge(
        MixedForm.scalar(polar, z1_here),
        exp_of(b0 + omega_pull.scale(sympy.I)),
    )
    return form_equal(rho_pull, stated, region=annulus, samples=samples,
                      seed=seed, tol=tol)


# ---------------------------------------------------------------------------
# Piecewise assembly
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Overlap:
    """Required agreement of two pieces on a region, up to a stated scalar.

    Pure spinor lines are defined up to a nonvanishing function; the
    surgery overlaps match only after multiplying the second piece by
    ``scale`` (z1 in the glued construction).  The twisting forms must
    agree on the nose.
    """

    left: int
    right: int
    region: Region
    scale: sympy.Expr = sympy.Integer(1)


@dataclass(frozen=True)
class PiecewiseSpinor:
    pieces: tuple[tuple[Region, SpinorStructure], ...]
    overlaps: tuple[Overlap, ...]


def assemble_piecewise(pieces: Sequence[tuple[Region, SpinorStructure]],
                       overlaps: Sequence[Overlap], samples: int = 32,
                       seed: int = 0, tol: float = 1e-9) -> PiecewiseSpinor:
    """Check spinor and twisting-form agreement on every flagged overlap."""
    pieces = tuple(pieces)
    for ov in overlaps:
        _, left = pieces[ov.left]
        _, right = pieces[ov.right]
        lrho = left.rho
        rrho = right.rho.scale(ov.scale)
        if not form_equal(lrho, rrho, region=ov.region, samples=samples,
                          seed=seed, tol=tol):
            key = first_disagreement(lrho, rrho, region=ov.region, samples=8, seed=seed)
            name = lrho.key_name(key) if key is not None else "?"
            raise SpinorError(
                f"pieces {ov.left} and {ov.right} disagree on overlap "
                f"{ov.region.name!r} at coefficient {name}"
            )
        if not form_equal(left.h, right.h, region=ov.region, samples=samples,
                          seed=seed, tol=tol):
            raise SpinorError(
                f"twisting forms of pieces {ov.left} and {ov.right} disagree "
                f"on overlap {ov.region.name!r}"
            )
    return PiecewiseSpinor(pieces, tuple(overlaps))


def assembly_check(params, samples: int = 16, seed: int = 0,
                   tol: float = 1e-9, perturb=None) -> PiecewiseSpinor:
    """Assemble the glued structure from its two pieces on the collar.

    The inside piece is the extension spinor pulled back to polar
    coordinates; the outside piece is e^{B0} ^ phi*(e^{i omega~}), with
    B0 the real part of the extension exponent.  They must agree on the
    xi = 1 annulus up to the scalar z1 = r e^{i t0}, with equal
    twisting forms.  ``perturb`` optionally rescales B0 on the outside
    piece to exhibit a detected mismatch.  Raises SpinorError on any
    disagreement.
    """
    sparams = _as_params(params)
    s = build_luttinger_spinor(sparams)
    polar, _ = collar_charts()
    psi = disk_to_complex_map(polar, s.chart)
    rho_in = pullback(psi, s.rho)
    phi, omega_tilde = luttinger_gluing_map(sparams)
    rho_out = pullback(phi, exp_of(omega_tilde.scale(sympy.I)))
    b0 = pullback(psi, surgery_exponent(s.chart, sparams)).real_part()
    if perturb is not None:
        b0 = b0.scale(sympy.sympify(perturb))
    annulus = Region.make(polar, "assembly-annulus", bounds={"r": (0.6, 0.95)},
                          bump_values={"xi": 1})
    z1 = polar.symbol("r") * sympy.exp(sympy.I * polar.symbol("t0"))
    piece_in = SpinorStructure(polar, rho_in, MixedForm.zero(polar))
    piece_out = SpinorStructure(
        polar, wedge(exp_of(b0), rho_out), MixedForm.zero(polar)
    )
    return assemble_piecewise(
        [(annulus, piece_in), (annulus, piece_out)],
        [Overlap(0, 1, annulus, z1)], samples=samples, seed=seed, tol=tol,
    )
