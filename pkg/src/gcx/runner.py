"""Execute parsed scenarios and render deterministic reports."""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import sympy

from .forms import form_equal
from .groups import GroupPresentation, abelianization
from .scenario import Command, ParseError, Scenario, parse_scenario
from .spinor import (
    SpinorError,
    assembly_check,
    check_integrable,
    check_nondegenerate,
    check_stable,
    lemma_extension_check,
    type_at,
)
from .topology import (
    ManifoldDescriptor,
    TopologyError,
    apply_branched_cover,
    apply_gluck,
    apply_luttinger,
    classify_simply_connected_5,
    components_report,
    riemann_hurwitz_check,
    validate_surgery_params,
)


class RunError(ValueError):
    """A command could not be executed (bad reference, bad state)."""


@dataclass
class Report:
    """Human-readable lines plus a machine-readable key/value block."""

    title: str
    lines: list[str] = field(default_factory=list)
    values: dict[str, str] = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def note(self, line: str):
        self.lines.append(line)

    def record(self, key: str, value) -> None:
        self.values[key] = str(value)

    def check(self, label: str, passed: bool, detail: str = ""):
        tag = "ok" if passed else "FAIL"
        suffix = f"  ({detail})" if detail else ""
        self.lines.append(f"[{tag}] {label}{suffix}")
        if not passed:
            self.failures.append(label)

    def render(self) -> str:
        out = [f"== {self.title}" if self.title else "== (untitled scenario)"]
        out.extend(self.lines)
        out.append("---")
        for key in sorted(self.values):
            out.append(f"{key}: {self.values[key]}")
        out.append(f"result: {'pass' if self.ok else 'fail'}")
        return "\n".join(out) + "\n"


def load_scenario(path: str | Path) -> Scenario:
    return parse_scenario(Path(path).read_text())


def corpus_dir() -> Path:
    override = os.environ.get("GCX_CORPUS_DIR")
    if override:
        return Path(override)
    return Path(__file__).parent / "corpus"


def corpus_files() -> list[Path]:
    base = corpus_dir()
    if not base.is_dir():
        raise RunError(f"corpus directory {base} does not exist")
    return sorted(base.glob("*.gcx"))


def list_corpus() -> list[tuple[str, str]]:
    """(file stem, title) pairs; titles are read without executing."""
    out = []
    for path in corpus_files():
        title = ""
        for raw in path.read_text().splitlines():
            line = raw.split("#", 1)[0].strip()
            if line.startswith("title"):
                title = line.split(None, 1)[1].strip().strip('"')
                break
        out.append((path.stem, title))
    return out


def run(scenario: Scenario | str | Path, seed: int = 0, samples: int = 32,
        tolerance: float = 1e-9) -> Report:
    if not isinstance(scenario, Scenario):
        scenario = load_scenario(scenario)
    runner = _Runner(scenario, seed, samples, tolerance)
    return runner.run()


class _Runner:
    def __init__(self, sc: Scenario, seed: int, samples: int, tol: float):
        self.sc = sc
        self.seed = seed
        self.samples = samples
        self.tol = tol
        self.manifolds: dict[str, ManifoldDescriptor] = dict(sc.manifolds)
        self.report = Report(sc.title)
        self.index = 0

    def run(self) -> Report:
        start = time.monotonic()
        for warning in self.sc.warnings:
            self.report.note(f"[warn] {warning}")
        for cmd in self.sc.commands:
            self.index += 1
            try:
                getattr(self, "cmd_" + cmd.kind.replace("-", "_"))(cmd)
            except ValueError as exc:  # all gcx errors derive from ValueError
                self.report.check(f"#{self.index} {cmd.text}", False, str(exc))
        self.report.record("seed", self.seed)
        self.report.record("samples", self.samples)
        self.report.record("tolerance", self.tol)
        self.report.record("checks", self.index)
        self.report.record("failures", len(self.report.failures))
        self.report.record("elapsed_s", f"{time.monotonic() - start:.2f}")
        return self.report

    # -- helpers ----------------------------------------------------------

    def spinor(self, name: str):
        try:
            return self.sc.spinors[name]
        except KeyError:
            raise RunError(f"unknown spinor {name!r}") from None

    def manifold(self, name: str) -> ManifoldDescriptor:
        try:
            return self.manifolds[name]
        except KeyError:
            raise RunError(f"unknown manifold {name!r}") from None

    def region(self, name):
        if name is None:
            return None
        return self.sc.regions[name]

    def done(self, cmd: Command, passed: bool, detail: str = ""):
        self.report.check(f"#{self.index} {cmd.text}", passed, detail)
        self.report.record(f"check_{self.index}", "pass" if passed else "fail")

    # -- check commands ----------------------------------------------------

    def cmd_check(self, cmd: Command):
        p = cmd.payload
        handler = getattr(self, "chk_" + p["what"].replace("-", "_"))
        handler(cmd, p)

    def chk_params(self, cmd, p):
        try:
            validate_surgery_params(*p["params"])
            verdict = "ok"
        except TopologyError as exc:
            verdict = "reject"
            self.report.note(f"  params rejected: {exc}")
        self.done(cmd, verdict == p["expect"], f"got {verdict}")

    def chk_type(self, cmd, p):
        got = type_at(self.spinor(p["spinor"]).rho, p["point"],
                      region=self.region(p.get("region")), tol=self.tol)
        self.report.record(f"type_{self.index}", got)
        self.done(cmd, got == p["expect"], f"type {got}")

    def chk_stable(self, cmd, p):
        res = check_stable(self.spinor(p["spinor"]), seed=self.seed)
        got = "true" if res.stable else "false"
        self.done(cmd, got == p["expect"], res.message)

    def chk_integrable(self, cmd, p):
        res = check_integrable(self.spinor(p["spinor"]), samples=self.samples,
                               seed=self.seed, tol=self.tol)
        got = "true" if res.ok else "false"
        self.done(cmd, got == p["expect"], res.message)

    def chk_nondegenerate(self, cmd, p):
        got = check_nondegenerate(self.spinor(p["spinor"]), p["point"], tol=self.tol)
        self.done(cmd, ("true" if got else "false") == p["expect"], f"got {got}")

    def chk_equal(self, cmd, p):
        right = p["right"]
        if "scale" in p:
            right = right.scale(p["scale"])
        eq = form_equal(p["left"], right, region=self.region(p.get("region")),
                        samples=self.samples, seed=self.seed, tol=self.tol)
        got = "equal" if eq else "different"
        self.done(cmd, got == p["expect"], f"got {got}")

    def chk_lemma(self, cmd, p):
        got = lemma_extension_check(p["params"], profile=p.get("profile", "lemma"),
                                    samples=self.samples, seed=self.seed,
                                    tol=self.tol)
        verdict = "ok" if got else "fail"
        self.done(cmd, verdict == p["expect"], f"got {verdict}")

    def chk_assembly(self, cmd, p):
        try:
            assembly_check(p["params"], samples=min(self.samples, 16),
                           seed=self.seed, tol=self.tol)
            verdict = "ok"
        except SpinorError as exc:
            verdict = "fail"
            self.report.note(f"  assembly: {exc}")
        self.done(cmd, verdict == p["expect"], f"got {verdict}")

    def chk_chi(self, cmd, p):
        got = self.manifold(p["manifold"]).euler
        self.report.record(f"chi_{self.index}", got)
        self.done(cmd, got == p["expect"], f"chi {got}")

    def chk_sigma(self, cmd, p):
        got = self.manifold(p["manifold"]).signature
        self.done(cmd, got == p["expect"], f"sigma {got}")

    def chk_components(self, cmd, p):
        got = len(self.manifold(p["manifold"]).components)
        self.report.record(f"components_{self.index}", got)
        self.done(cmd, got == p["expect"], f"{got} component(s)")

    def chk_hetero(self, cmd, p):
        rep = components_report(self.manifold(p["manifold"]))
        got = "true" if rep.heterogeneous else "false"
        self.done(cmd, got == p["expect"], f"got {got}")

    def chk_abelianization(self, cmd, p):
        target = p["target"]
        if target in self.sc.groups:
            group = self.sc.groups[target]
        else:
            group = self.manifold(target).pi1
            if group is None:
                raise RunError(f"manifold {target!r} has unknown pi1")
        inv = abelianization(group)
        got = f"rank {inv.rank} torsion {list(inv.torsion)}"
        want = f"rank {p['rank']} torsion {p['torsion']}"
        self.report.record(f"abelianization_{self.index}", inv.describe())
        self.done(cmd, got == want, f"{inv.describe()}")

    def chk_classify5(self, cmd, p):
        got = classify_simply_connected_5(p["k"], p["spin"])
        self.report.record(f"classify5_{self.index}", got)
        self.done(cmd, got == p["expect"], got)

    def chk_riemann_hurwitz(self, cmd, p):
        try:
            riemann_hurwitz_check(p["gcover"], p["gbase"], p["degree"],
                                  p["indices"])
            verdict = "ok"
        except TopologyError as exc:
            verdict = "reject"
            self.report.note(f"  riemann-hurwitz: {exc}")
        self.done(cmd, verdict == p["expect"], f"got {verdict}")

    # -- state commands ----------------------------------------------------

    def cmd_surgery(self, cmd: Command):
        p = cmd.payload
        m = self.manifold(p["manifold"])
        locus = m.locus(p["locus"])
        params = validate_surgery_params(*p["params"])
        apply_fn = apply_luttinger if p["which"] == "luttinger" else apply_gluck
        out = apply_fn(m, locus, params)
        self.manifolds[p["new"]] = out
        self.report.note(f"[do] {out.describe()}")

    def cmd_cover(self, cmd: Command):
        p = cmd.payload
        from .topology import apply_cover

        out = apply_cover(self.manifold(p["manifold"]), p["degree"])
        self.manifolds[p["new"]] = out
        self.report.note(f"[do] {out.describe()}")

    def cmd_branched_cover(self, cmd: Command):
        p = cmd.payload
        out = apply_branched_cover(self.manifold(p["manifold"]), p["branching"])
        self.manifolds[p["new"]] = out
        self.report.note(f"[do] {out.describe()}")

    def cmd_report(self, cmd: Command):
        rep = components_report(self.manifold(cmd.payload["manifold"]))
        for line in rep.lines:
            self.report.note(line)
        self.report.record(
            f"heterogeneous_{self.index}", "true" if rep.heterogeneous else "false"
        )
