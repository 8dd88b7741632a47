"""Shared pytest configuration.

Prints one PASS/FAIL line per acceptance criterion after the run so the
acceptance status is readable without scanning the full test output.
"""

from __future__ import annotations


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    try:
        from tests.test_acceptance import CRITERIA
    except Exception:
        try:
            from test_acceptance import CRITERIA
        except Exception:
            return
    outcomes = {}
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance" not in nodeid:
                continue
            name = nodeid.rsplit("::", 1)[-1]
            verdict = "PASS" if status == "passed" else "FAIL"
            outcomes[name] = verdict
    if not outcomes:
        return
    lines = []
    for number, (test_name, label) in sorted(CRITERIA.items()):
        verdict = outcomes.get(test_name)
        if verdict is None:
            continue
        lines.append(f"acceptance {number:2d} {label}: {verdict}")
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
