import pytest

from manas.corpus import synthesize_corpus

_acceptance = {}


@pytest.fixture(scope="session")
def synth400():
    """The desk-scale learnability corpus."""
    return synthesize_corpus(400, 0.5, 0.9, seed=7)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    passed, _ = _acceptance.get(number, (True, title))
    if report.when == "call" or report.failed:
        _acceptance[number] = (passed and not report.failed and not report.skipped, title)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance):
        passed, title = _acceptance[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {title}")
