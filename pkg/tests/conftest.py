from __future__ import annotations

from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("qemac", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("qemac")

FIXTURES = Path(__file__).parent / "fixtures"

_results: dict[str, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(key, title): acceptance criterion covered by this test")


def pytest_runtest_logreport(report):
    key = getattr(report, "_criterion", None)
    if key is None:
        return
    entry = _results.setdefault(key[0], {"title": key[1], "outcome": "PASS"})
    if report.failed:
        entry["outcome"] = "FAIL"
    elif report.skipped and report.when == "setup":
        entry["outcome"] = "SKIP"


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        rep._criterion = (str(m.args[0]), m.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")

    def order(k: str):
        head = "".join(c for c in k if c.isdigit())
        return (int(head or 0), k)

    for key in sorted(_results, key=order):
        e = _results[key]
        tr.write_line(f"{e['outcome']}  [{key}] {e['title']}")


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES
