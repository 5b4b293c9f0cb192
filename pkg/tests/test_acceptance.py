"""The twelve acceptance criteria, each at its stated tolerance.

The suite runs once per session; every criterion is its own test and the
terminal summary prints one PASS/FAIL line per criterion. Run this file as
a script to print the same lines without pytest.
"""

import json

import pytest

from poalab import suite

IDS = list(range(1, 13))
_LINES: list = []


@pytest.fixture(scope="session")
def report():
    rep = suite.run_suite()
    _LINES[:] = suite.summary_lines(rep)
    return rep


def _failed_checks(crit):
    return [c for c in crit["checks"] if not c["ok"]]


@pytest.mark.parametrize("cid", IDS, ids=[f"criterion_{i:02d}" for i in IDS])
def test_criterion(report, cid):
    crit = next(c for c in report["criteria"] if c["id"] == cid)
    line = f"{crit['verdict']}  criterion {cid:>2}: {crit['title']}"
    print(line)
    detail = json.dumps({"failed": _failed_checks(crit), "notes": crit["notes"]}, indent=1)
    assert crit["verdict"] == "PASS", f"{line}\n{detail}"


def acceptance_lines():
    return list(_LINES)


if __name__ == "__main__":
    for line in suite.summary_lines(suite.run_suite()):
        print(line)
