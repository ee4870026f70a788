"""Bundled corpus and command-line interface."""

import re
import time

import pytest

from gcx.cli import main
from gcx.runner import corpus_dir, corpus_files, list_corpus, run

EXPECTED_STEMS = {
    "cor_2_8",
    "ex_2_9",
    "prop_3_1",
    "ex_3_2_kill",
    "ex_3_3_torsion",
    "lemma_3_3",
    "thm_3_5",
    "thm_3_6",
    "prop_3_8",
    "prop_3_9_e1",
    "sec_4_gluck",
    "lemma_5_5_cover",
    "thm_5_6_branched",
    "ex_5_2_surfaces",
    "ex_5_3_elliptic",
    "ex_5_7_add_cover",
    "ex_5_8_add",
    "ex_5_9_surfaces",
}


def test_corpus_manifest():
    listing = list_corpus()
    stems = {name for name, _ in listing}
    assert EXPECTED_STEMS <= stems
    assert all(title for _, title in listing)


@pytest.mark.parametrize("path", corpus_files(), ids=lambda p: p.stem)
def test_corpus_scenario_passes(path):
    report = run(path, seed=0, samples=32, tolerance=1e-9)
    assert report.ok, report.render()


def _strip_timing(text: str) -> str:
    return re.sub(r"elapsed_s: .*", "elapsed_s: <t>", text)


def test_report_deterministic_for_fixed_seed():
    path = corpus_files()[0]
    a = run(path, seed=0).render()
    b = run(path, seed=0).render()
    assert _strip_timing(a) == _strip_timing(b)


def test_cli_run_exit_codes(tmp_path, capsys):
    good = tmp_path / "good.gcx"
    good.write_text(
        'title "ok"\nchart C = complex z1\n'
        "check equal on C z1, z1 expect equal\n"
    )
    assert main(["run", str(good)]) == 0
    bad = tmp_path / "bad.gcx"
    bad.write_text(
        'title "bad"\nchart C = complex z1\n'
        "check equal on C z1, z1b expect equal\n"
    )
    assert main(["run", str(bad)]) == 1
    out = capsys.readouterr().out
    assert "result: fail" in out
    broken = tmp_path / "broken.gcx"
    broken.write_text("chart C = complex z1\nform w on C = ^^\n")
    assert main(["run", str(broken)]) == 2
    assert main(["run", str(tmp_path / "missing.gcx")]) == 2


def test_cli_verify_and_report_flag(tmp_path, capsys):
    scn = tmp_path / "s.gcx"
    scn.write_text('title "static"\nchart C = complex z1\n')
    out_file = tmp_path / "report.txt"
    assert main(["--report", str(out_file), "verify", str(scn)]) == 0
    stdout = capsys.readouterr().out
    assert "verify: ok" in stdout
    assert out_file.read_text() == stdout


def test_cli_corpus_run_all_under_budget(capsys):
    start = time.monotonic()
    assert main(["corpus", "run-all"]) == 0
    elapsed = time.monotonic() - start
    assert elapsed < 60.0
    out = capsys.readouterr().out
    assert "0 failing" in out


def test_corpus_dir_override(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("GCX_CORPUS_DIR", str(tmp_path))
    assert corpus_dir() == tmp_path
    # empty corpus: empty manifest, run-all exits 0
    assert list_corpus() == []
    assert main(["corpus", "run-all"]) == 0
    (tmp_path / "solo.gcx").write_text(
        'title "override"\nchart C = complex z1\n'
        "check equal on C z1 + z1, 2 * z1 expect equal\n"
    )
    assert main(["corpus", "list"]) == 0
    out = capsys.readouterr().out
    assert "solo" in out and "override" in out
    assert main(["corpus", "run-all"]) == 0


def test_cli_missing_corpus_dir_is_config_error(tmp_path, monkeypatch):
    monkeypatch.setenv("GCX_CORPUS_DIR", str(tmp_path / "nope"))
    assert main(["corpus", "run-all"]) == 2
