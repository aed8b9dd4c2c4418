"""Acceptance suite: one line per criterion, then one test per criterion."""

import pytest

from crnhopf import acceptance

import conftest


@pytest.fixture(scope="module")
def results():
    def echo(line):
        print(line, flush=True)
        conftest.ACCEPTANCE_LINES.append(line)

    return {r.number: r for r in acceptance.run(echo=echo)}


@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA))
def test_criterion(results, number):
    res = results[number]
    assert res.passed, res.line()


def test_every_criterion_reported(results):
    assert sorted(results) == list(range(1, 12))
    assert all(r.line().startswith(("[PASS]", "[FAIL]")) for r in results.values())
