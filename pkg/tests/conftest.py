from pathlib import Path

import pytest

from xrecursive import Store, load_document

DATA = Path(__file__).parent / "data"
SAMPLE_PATH = DATA / "Personal.xml"

_criteria = []


@pytest.fixture(scope="session")
def sample_text():
    return SAMPLE_PATH.read_text(encoding="utf-8")


@pytest.fixture
def sample_store(sample_text):
    store = Store()
    load_document(store, sample_text, "Personal.xml", mode="tree")
    return store


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _criteria.append((marker.args[0], marker.args[1], item.name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n, title, name, outcome in sorted(_criteria, key=lambda c: (c[0], c[2])):
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line("[%s] criterion %s: %s (%s)" % (verdict, n, title, name))
