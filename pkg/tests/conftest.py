import os

# Several numba threads even on a single core, so prange paths really run.
os.environ.setdefault("NUMBA_NUM_THREADS", "4")

import pytest  # noqa: E402
from hypothesis import settings  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

_ACCEPTANCE: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    label = dict(report.user_properties).get("criterion")
    if label is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        verdict = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        _ACCEPTANCE.append((verdict, label))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for verdict, label in _ACCEPTANCE:
        terminalreporter.write_line(f"{verdict}  {label}")


@pytest.fixture
def criterion(record_property):
    def _set(label: str) -> None:
        record_property("criterion", label)
    return _set
