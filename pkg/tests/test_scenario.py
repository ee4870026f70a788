"""Scenario language: parsing, round trips, error localization."""

import pytest

from gcx import ParseError, parse_scenario
from gcx.runner import corpus_files, load_scenario, run


SMALL = """\
title "round trip"
chart C = complex z1, complex z2
region disk on C = z1 in (0.05, 1.0)
form omega0 on C = (i/2) * (dz1^dz1b + dz2^dz2b)
spinor rho0 = on C; rho (z1 + dz1^dz2) ^ exp(i * omega0)
check type rho0 at z1 = 0, z2 = 1 expect 2
check integrable rho0 expect true
"""


def test_parse_small_scenario():
    sc = parse_scenario(SMALL)
    assert sc.title == "round trip"
    assert set(sc.charts) == {"C"}
    assert set(sc.regions) == {"disk"}
    assert set(sc.forms) == {"omega0"}
    assert set(sc.spinors) == {"rho0"}
    assert len(sc.commands) == 2


def test_pretty_round_trip():
    sc = parse_scenario(SMALL)
    again = parse_scenario(sc.pretty())
    assert again.statements == sc.statements
    assert set(again.charts) == set(sc.charts)
    assert len(again.commands) == len(sc.commands)
    assert again.pretty() == sc.pretty()


def test_corpus_round_trips():
    for path in corpus_files():
        sc = load_scenario(path)
        again = parse_scenario(sc.pretty())
        assert again.statements == sc.statements, path.name
        assert len(again.commands) == len(sc.commands), path.name


def test_wedge_shared_leg_warns():
    sc = parse_scenario(
        "chart C = complex z1\nform w on C = dz1 ^ dz1\n"
    )
    assert sc.forms["w"].is_zero()
    assert sc.warnings


def test_parse_errors_carry_line_numbers():
    bad = "title \"x\"\nchart C = complex z1\nform w on C = dz9\n"
    with pytest.raises(ParseError) as err:
        parse_scenario(bad)
    assert "line 3" in str(err.value)
    with pytest.raises(ParseError) as err2:
        parse_scenario("form w = dz1\n")  # no chart in scope
    assert "line 1" in str(err2.value)


def test_comments_and_strings():
    sc = parse_scenario(
        'title "has # hash"  # trailing comment\n# full-line comment\n'
    )
    assert sc.title == "has # hash"


def test_mutated_expectation_fails_exactly_one_check():
    src = SMALL.replace("expect 2", "expect 1")
    report = run(parse_scenario(src))
    assert len(report.failures) == 1
    assert "type" in report.failures[0]
    # the unmutated scenario is clean
    assert not run(parse_scenario(SMALL)).failures
