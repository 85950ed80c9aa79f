"""Acceptance suite: criteria 1-10 at full size and stated tolerances.

Each criterion prints one PASS/FAIL line in the terminal summary.
"""

import json

import pytest

from sublin import verify

pytestmark = pytest.mark.slow

NUMERIC = [n for n in verify.CHECKS if n != "determinism"]
LINES: dict[int, str] = {}


@pytest.fixture(scope="module")
def full_run():
    return {r.name: r for r in verify.run_suite("full", checks=NUMERIC, threads=1).results}


def _record(res):
    LINES[res.criterion] = res.line()
    return res


@pytest.mark.parametrize("name", NUMERIC)
def test_criterion(full_run, name):
    res = _record(full_run[name])
    assert res.passed, res.line()


def _metrics(res):
    return json.dumps(res.to_dict()["metrics"], sort_keys=True)


def test_criterion_10_thread_invariance(full_run):
    det = verify.run_check("determinism", "full", threads=1)
    threaded = verify.run_suite("full", checks=NUMERIC, threads=8).results
    differing = [r.name for r in threaded if _metrics(r) != _metrics(full_run[r.name])]
    if differing:
        det.passed = False
        det.failures.append(f"metrics differ at 8 threads: {differing}")
    _record(det)
    assert det.passed, det.line()
