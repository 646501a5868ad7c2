"""Shared fixtures and the acceptance-criteria summary printed at the end of a run."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings

# heavier property run: pytest --hypothesis-profile=stress
settings.register_profile("stress", max_examples=1000, deadline=None)

_OUTCOMES: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    entry = _OUTCOMES.setdefault(number, {"title": title, "results": []})
    xfailed = hasattr(rep, "wasxfail")
    if rep.when == "call" or (rep.when == "setup" and (rep.failed or rep.skipped)):
        if xfailed and rep.skipped:
            status = "xfail"
        elif rep.passed:
            status = "pass"
        elif rep.skipped:
            status = "skip"
        else:
            status = "fail"
        entry["results"].append((item.name, status, getattr(rep, "wasxfail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        entry = _OUTCOMES[number]
        statuses = [s for _, s, _ in entry["results"]]
        verdict = "PASS" if statuses and all(s == "pass" for s in statuses) else "FAIL"
        parts = f"{statuses.count('pass')}/{len(statuses)} checks passed"
        tr.write_line(f"[{verdict}] {number}. {entry['title']} ({parts})")
        for name, status, reason in entry["results"]:
            if status != "pass":
                extra = f": {reason}" if reason else ""
                tr.write_line(f"         {status.upper()} {name}{extra}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)
