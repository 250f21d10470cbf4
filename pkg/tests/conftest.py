import os
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")

_criteria: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call" and not report.failed:
        return
    number, title = marker.args
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    verdict = "PASS" if report.passed else "FAIL"
    if report.when != "call":
        verdict = "FAIL"
    _criteria[number] = (verdict, title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        verdict, title, detail = _criteria[number]
        line = f"criterion {number:>2} {verdict}: {title}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
