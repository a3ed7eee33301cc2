"""Acceptance reporting: one PASS/FAIL line per criterion at the end of the run."""

import pytest

_criteria: dict[str, str] = {}       # id -> title, in definition order
_node_criterion: dict[str, str] = {}
_outcome: dict[str, list[str]] = {}  # id -> failure summaries
_counts: dict[str, dict[str, int]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, title): acceptance criterion covered by a test")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            cid, title = m.args
            _criteria.setdefault(cid, title)
            _node_criterion[item.nodeid] = cid


def pytest_runtest_logreport(report):
    cid = _node_criterion.get(report.nodeid)
    if cid is None:
        return
    problems = _outcome.setdefault(cid, [])
    counts = _counts.setdefault(cid, {"passed": 0, "skipped": 0})
    if report.when == "call" and report.passed:
        counts["passed"] += 1
    elif report.skipped:
        counts["skipped"] += 1
    if report.failed:
        msg = report.longrepr.reprcrash.message if hasattr(report.longrepr, "reprcrash") else str(report.longrepr)
        problems.append(msg.splitlines()[0][:160])


def pytest_terminal_summary(terminalreporter):
    ran = [cid for cid in _criteria if cid in _outcome]
    if not ran:
        return
    terminalreporter.section("acceptance criteria")
    for cid in ran:
        problems = _outcome[cid]
        counts = _counts[cid]
        status = "FAIL" if problems else "PASS" if counts["passed"] else "NOT RUN"
        line = f"{status}  {cid}  {_criteria[cid]}"
        if problems:
            line += f"  ({problems[0]})"
        elif counts["skipped"]:
            line += f"  ({counts['skipped']} optional cases skipped)"
        terminalreporter.write_line(line)
