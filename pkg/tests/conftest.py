from collections import defaultdict

from hypothesis import settings

settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")

_CRITERIA = defaultdict(list)


def pytest_collection_modifyitems(items):
    for item in items:
        for mark in item.iter_markers("criterion"):
            item.user_properties.append(("criterion", mark.args[0]))


def pytest_runtest_logreport(report):
    # record the call phase, or setup when it errored before the call
    if report.when == "call" or (report.when == "setup" and report.failed):
        for key, value in report.user_properties:
            if key == "criterion":
                _CRITERIA[value].append((report.nodeid, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        results = _CRITERIA[n]
        failed = [nid for nid, outcome in results if outcome != "passed"]
        status = "PASS" if not failed else "FAIL"
        terminalreporter.write_line(
            f"criterion {n:>2}: {status}  ({len(results) - len(failed)}/{len(results)} checks)")
        for nid in failed:
            terminalreporter.write_line(f"    failed: {nid}")
