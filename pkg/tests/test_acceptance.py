"""Acceptance suite: one test per criterion at its stated tolerance and runtime.

Each test prints the PASS/FAIL line of its criterion (visible with ``-s``
or in the captured output of a failing test).
"""
import dataclasses

import numpy as np
import pytest

from dlspectra import acceptance, operators
from dlspectra.acceptance import CRITERIA, run_criterion, verify_suite

NAMES = {number: name for number, name, *_ in CRITERIA}


@pytest.mark.parametrize("number", sorted(NAMES), ids=[f"{n:02d}-{NAMES[n].replace(' ', '_')}" for n in sorted(NAMES)])
def test_criterion(number):
    result = run_criterion(number)
    print(result.line())
    assert result.passed, result.line()


@pytest.fixture(scope="module")
def quick_results():
    return {r.number: r for r in verify_suite(quick=True)}


def test_quick_mode_passes(quick_results):
    for r in quick_results.values():
        print(r.line())
    failing = sorted(n for n, r in quick_results.items() if not r.passed)
    # the S1 criterion fails at any tolerance; see test_criterion[07-...]
    assert failing == [7]


def test_quick_mode_relaxes_tolerances():
    assert acceptance.Mode(quick=True).tol(1e-8) == pytest.approx(1e-7)
    assert acceptance.Mode(quick=True).n2d == 32
    assert acceptance.Mode().tol(1e-8) == 1e-8


def test_flipped_diagonal_is_caught(monkeypatch):
    clean = operators.assemble_dlp_2d

    def flipped(curve, n, **kw):
        op = clean(curve, n, **kw)
        a = op.matrix.copy()
        np.fill_diagonal(a, -np.diag(a))
        return dataclasses.replace(op, matrix=a)

    monkeypatch.setattr(operators, "assemble_dlp_2d", flipped)
    results = {r.number: r for r in verify_suite(quick=True, only={1, 2, 3, 4, 5, 6, 7, 11})}
    for r in results.values():
        print(r.line())
    assert not results[3].passed
    assert "trK+1 2.0e+00" in results[3].measured
    assert len(results) == 8
    assert all(r.measured for r in results.values())


def test_crash_is_reported_not_raised(monkeypatch):
    def boom(*a, **k):
        raise FloatingPointError("injected")

    monkeypatch.setattr(operators, "assemble_dlp_2d", boom)
    r = run_criterion(2, quick=True)
    assert not r.passed
    assert "injected" in r.measured
    assert r.line().startswith("FAIL [ 2]")
