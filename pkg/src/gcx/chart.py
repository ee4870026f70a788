"""Coordinate charts, named sub-regions, and sample-point generation.

A chart is an ordered list of coordinates, each of one of four kinds:

* ``real``    -- an unconstrained real coordinate,
* ``radial``  -- a positive real coordinate (r > 0),
* ``angle``   -- a periodic coordinate; its differential is a legal
  global 1-form even though the coordinate itself is only local,
* ``complex`` -- a complex coordinate z; it contributes *two* legs to
  the chart, z and its formal conjugate zb, treated as independent
  symbols (Wirtinger calculus).

The "legs" of a chart index the basis covectors of the (complexified)
cotangent space: one leg per real/radial/angle coordinate, two legs
(dz, dzb) per complex coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping, Optional

import sympy

COORD_KINDS = ("real", "radial", "angle", "complex")

_TWO_PI = 2 * math.pi


class ChartError(ValueError):
    """Malformed chart or region declaration."""


@dataclass(frozen=True)
class Coordinate:
    name: str
    kind: str

    def __post_init__(self):
        if self.kind not in COORD_KINDS:
            raise ChartError(f"unknown coordinate kind {self.kind!r}")


@dataclass(frozen=True)
class Leg:
    """One basis direction of the chart (dz and dzb are separate legs)."""

    name: str
    symbol: sympy.Symbol
    kind: str  # real | radial | angle | holo | anti
    coord: str  # the declaring coordinate's name
    conj: int  # index of the conjugate leg (self for real kinds)


def _symbol_for(name: str, kind: str) -> sympy.Symbol:
    if kind == "radial":
        return sympy.Symbol(name, positive=True)
    if kind in ("real", "angle"):
        return sympy.Symbol(name, real=True)
    return sympy.Symbol(name)


class Chart:
    """A named coordinate chart; immutable after construction."""

    def __init__(self, name: str, coords: Iterable[Coordinate | tuple]):
        self.name = name
        self.coords: tuple[Coordinate, ...] = tuple(
            c if isinstance(c, Coordinate) else Coordinate(*c) for c in coords
        )
        seen: set[str] = set()
        legs: list[Leg] = []
        for c in self.coords:
            if c.name in seen:
                raise ChartError(f"duplicate coordinate name {c.name!r}")
            seen.add(c.name)
            if c.kind == "complex":
                bname = c.name + "b"
                if bname in seen:
                    raise ChartError(f"conjugate name {bname!r} collides")
                seen.add(bname)
                i = len(legs)
                legs.append(Leg(c.name, _symbol_for(c.name, c.kind), "holo", c.name, i + 1))
                legs.append(Leg(bname, _symbol_for(bname, c.kind), "anti", c.name, i))
            else:
                i = len(legs)
                legs.append(Leg(c.name, _symbol_for(c.name, c.kind), c.kind, c.name, i))
        self.legs: tuple[Leg, ...] = tuple(legs)
        self._index = {leg.name: i for i, leg in enumerate(self.legs)}

    # -- basic queries -------------------------------------------------

    @property
    def dim(self) -> int:
        return len(self.legs)

    def leg_index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ChartError(f"chart {self.name!r} has no leg {name!r}") from None

    def symbol(self, name: str) -> sympy.Symbol:
        return self.legs[self.leg_index(name)].symbol

    @property
    def symbols(self) -> tuple[sympy.Symbol, ...]:
        return tuple(leg.symbol for leg in self.legs)

    def conj_index(self, i: int) -> int:
        return self.legs[i].conj

    def coordinate(self, name: str) -> Coordinate:
        for c in self.coords:
            if c.name == name:
                return c
        raise ChartError(f"chart {self.name!r} has no coordinate {name!r}")

    def __repr__(self):
        return f"Chart({self.name!r}, dim={self.dim})"

    def __eq__(self, other):
        return (
            isinstance(other, Chart)
            and self.name == other.name
            and self.coords == other.coords
        )

    def __hash__(self):
        return hash((self.name, self.coords))

    # -- points --------------------------------------------------------

    def point(self, values: Mapping[str, complex]) -> dict[str, complex]:
        """Canonical point: every leg gets a value, conjugates filled in."""
        pt: dict[str, complex] = {}
        for key, val in values.items():
            if key not in self._index:
                raise ChartError(f"chart {self.name!r} has no leg {key!r}")
            pt[key] = complex(val)
        for c in self.coords:
            if c.kind == "complex":
                bname = c.name + "b"
                if c.name in pt and bname not in pt:
                    pt[bname] = pt[c.name].conjugate()
                elif bname in pt and c.name not in pt:
                    pt[c.name] = pt[bname].conjugate()
        missing = [leg.name for leg in self.legs if leg.name not in pt]
        if missing:
            raise ChartError(f"point misses legs {missing} on chart {self.name!r}")
        return pt

    def point_subs(self, point: Mapping[str, complex]) -> dict[sympy.Symbol, complex]:
        pt = self.point(point)
        return {self.symbol(n): v for n, v in pt.items()}

    # -- formal conjugation --------------------------------------------

    def conj_expr(self, expr) -> sympy.Expr:
        """Formal conjugation: swap z <-> zb, conjugate constants.

        Real-valued symbols (real/radial/angle legs, opaque bump
        symbols) are fixed; elementary functions are conjugated
        argument-wise, which is valid on the real domains this toolkit
        restricts them to.
        """
        expr = sympy.sympify(expr)
        swap = {}
        for i, leg in enumerate(self.legs):
            if leg.conj != i:
                swap[leg.symbol] = self.legs[leg.conj].symbol
        return _conj_walk(expr, swap)


def _conj_walk(e: sympy.Expr, swap: dict) -> sympy.Expr:
    if e.is_Symbol:
        return swap.get(e, e)
    if e.is_Number or e is sympy.I:
        return sympy.conjugate(e)
    if not e.args:
        return e
    return e.func(*(_conj_walk(a, swap) for a in e.args))


@dataclass(frozen=True)
class Interval:
    lo: Optional[float] = None
    hi: Optional[float] = None

    def contains(self, x: float, tol: float = 1e-12) -> bool:
        if self.lo is not None and x < self.lo - tol:
            return False
        if self.hi is not None and x > self.hi + tol:
            return False
        return True

    def intersect(self, other: "Interval") -> "Interval":
        lo = self.lo if other.lo is None else (other.lo if self.lo is None else max(self.lo, other.lo))
        hi = self.hi if other.hi is None else (other.hi if self.hi is None else min(self.hi, other.hi))
        return Interval(lo, hi)


# Default sampling windows per coordinate kind.
_DEFAULT_WINDOW = {
    "real": (-2.0, 2.0),
    "radial": (0.25, 2.0),
    "angle": (0.0, _TWO_PI),
    "complex": (-2.0, 2.0),  # box for Re and Im; modulus bounds may refine
}


class RegionError(ValueError):
    """A point lies outside a declared region, or sampling failed."""


@dataclass(frozen=True)
class Region:
    """A coordinate-inequality box on a chart.

    ``bounds`` constrains coordinates by name; for a complex coordinate
    the bound applies to its modulus (so ``z1 in (0.5, 1)`` is an
    annulus).  ``nonzero`` names complex coordinates excluded from 0.
    ``bump_values`` pins declared opaque bump functions to 0 or 1 on
    this region, enabling exact symbolic checks piecewise.
    """

    chart: Chart
    name: str = "region"
    bounds: tuple[tuple[str, Interval], ...] = ()
    nonzero: tuple[str, ...] = ()
    bump_values: tuple[tuple[str, int], ...] = ()

    @staticmethod
    def make(chart: Chart, name: str = "region", bounds: Mapping[str, tuple] | None = None,
             nonzero: Iterable[str] = (), bump_values: Mapping[str, int] | None = None) -> "Region":
        bnds = tuple(
            (k, v if isinstance(v, Interval) else Interval(*v))
            for k, v in (bounds or {}).items()
        )
        return Region(chart, name, bnds, tuple(nonzero), tuple(sorted((bump_values or {}).items())))

    def bound_for(self, coord: str) -> Interval:
        iv = Interval()
        for k, v in self.bounds:
            if k == coord:
                iv = iv.intersect(v)
        return iv

    @property
    def bump_map(self) -> dict[str, int]:
        return dict(self.bump_values)

    def contains(self, point: Mapping[str, complex]) -> bool:
        pt = self.chart.point(point)
        for c in self.chart.coords:
            iv = self.bound_for(c.name)
            if iv.lo is None and iv.hi is None:
                continue
            if c.kind == "complex":
                if not iv.contains(abs(pt[c.name])):
                    return False
            else:
                if not iv.contains(pt[c.name].real):
                    return False
        for name in self.nonzero:
            if abs(pt[name]) == 0.0:
                return False
        return True

    def intersect(self, other: "Region") -> "Region":
        if other is None:
            return self
        if self.chart is not other.chart and self.chart != other.chart:
            raise RegionError("cannot intersect regions on different charts")
        bumps = dict(self.bump_values)
        for k, v in other.bump_values:
            if bumps.setdefault(k, v) != v:
                raise RegionError(f"conflicting bump pinning for {k!r}")
        return Region(
            self.chart,
            f"{self.name}&{other.name}",
            self.bounds + other.bounds,
            tuple(dict.fromkeys(self.nonzero + other.nonzero)),
            tuple(sorted(bumps.items())),
        )

    # -- sampling ------------------------------------------------------

    def sample(self, rng, rational: bool = False) -> dict[str, complex]:
        """One point inside the region; deterministic for a seeded rng."""
        values: dict[str, complex] = {}
        for c in self.chart.coords:
            iv = self.bound_for(c.name)
            if c.kind == "complex":
                if iv.lo is not None or iv.hi is not None or c.name in self.nonzero:
                    mlo = iv.lo if iv.lo is not None else 0.0
                    mhi = iv.hi if iv.hi is not None else 2.0
                    if c.name in self.nonzero:
                        mlo = max(mlo, 0.25)
                    radius = _draw(rng, mlo, mhi, rational)
                    angle = rng.uniform(0.0, _TWO_PI)
                    if rational:
                        # rational points on a rational circle: use tangent half-angle
                        t = Fraction(rng.randint(-12, 12), rng.randint(1, 12))
                        den = 1 + t * t
                        cosv, sinv = (1 - t * t) / den, 2 * t / den
                        values[c.name] = complex(float(radius * cosv), float(radius * sinv))
                    else:
                        values[c.name] = radius * complex(math.cos(angle), math.sin(angle))
                else:
                    re = _draw(rng, -2.0, 2.0, rational)
                    im = _draw(rng, -2.0, 2.0, rational)
                    values[c.name] = complex(float(re), float(im))
            else:
                lo, hi = _window(iv, None, c.kind)
                values[c.name] = complex(float(_draw(rng, lo, hi, rational)))
        return self.chart.point(values)


def _window(iv: Interval, override, kind: str) -> tuple[float, float]:
    dlo, dhi = _DEFAULT_WINDOW[kind]
    lo = iv.lo if iv.lo is not None else dlo
    hi = iv.hi if iv.hi is not None else dhi
    if hi <= lo:
        hi = lo + 1e-6
    return lo, hi


def _draw(rng, lo: float, hi: float, rational: bool):
    if not rational:
        return rng.uniform(lo, hi)
    # rational sample strictly inside (lo, hi)
    f = Fraction(rng.randint(1, 31), 32)
    return Fraction(lo).limit_denominator(64) + f * (Fraction(hi).limit_denominator(64) - Fraction(lo).limit_denominator(64))


def everywhere(chart: Chart) -> Region:
    return Region(chart, "everywhere")
