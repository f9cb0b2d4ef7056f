"""Acceptance bookkeeping: one pass/fail line per criterion in the terminal summary."""

import pytest

_DETAILS: dict[int, list[str]] = {}
_OUTCOMES: dict[int, list[bool]] = {}


@pytest.fixture
def report(request):
    """``report(text)`` attaches a measured value to the test's criterion line."""
    marker = request.node.get_closest_marker("criterion")
    n = marker.args[0] if marker else None

    def add(text: str) -> None:
        _DETAILS.setdefault(n, []).append(text)

    return add


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _OUTCOMES.setdefault(marker.args[0], []).append(rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_OUTCOMES):
        status = "PASS" if all(_OUTCOMES[n]) else "FAIL"
        detail = "; ".join(_DETAILS.get(n, []))
        terminalreporter.write_line(f"criterion {n:2d}: {status}  {detail}")
