import os
import time

import numpy as np
import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SAMPLES = os.path.join(ROOT, "samples")

# filled by test_acceptance.py, reported once at the end of the session
ACCEPTANCE = {}
SUITE_BUDGET = 60.0
_clock = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def samples_dir():
    return SAMPLES


def _full_run(session):
    # the runtime budget applies to the whole suite, not to a selection
    return session.testscollected > 100 and not session.config.option.keyword


def pytest_sessionstart(session):
    _clock["start"] = time.perf_counter()


def pytest_sessionfinish(session, exitstatus):
    _clock["elapsed"] = time.perf_counter() - _clock["start"]
    _clock["full"] = _full_run(session)
    if _clock["full"] and _clock["elapsed"] > SUITE_BUDGET and exitstatus == 0:
        session.exitstatus = 1


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0])):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {key}: {detail}")
    if _clock.get("full"):
        t = _clock["elapsed"]
        terminalreporter.write_line(
            f"[{'PASS' if t <= SUITE_BUDGET else 'FAIL'}] 11 suite runtime: {t:.1f} s "
            f"(budget {SUITE_BUDGET:.0f} s)")
