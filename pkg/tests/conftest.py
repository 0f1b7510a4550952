"""Shared fixtures and the acceptance-criteria summary lines."""
import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def _criterion_order(name):
    # test_criterion_07_xyz -> 7
    digits = name.split("test_criterion_", 1)[1].split("_", 1)[0]
    return int(digits)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = {}
    for outcome in ("passed", "failed", "error", "skipped"):
        for report in terminalreporter.stats.get(outcome, ()):
            nodeid = getattr(report, "nodeid", "")
            name = nodeid.split("::")[-1]
            if ("test_acceptance" not in nodeid
                    or not name.startswith("test_criterion_")):
                continue
            if outcome == "skipped" or report.when == "call":
                lines[name] = outcome
    if not lines:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name in sorted(lines, key=_criterion_order):
        status = "PASS" if lines[name] == "passed" else lines[name].upper()
        num = _criterion_order(name)
        slug = name.split(f"test_criterion_{num:02d}_", 1)[-1]
        terminalreporter.write_line(
            f"criterion {num:2d} [{slug}]: {status}")
