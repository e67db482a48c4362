import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_verdicts: dict[int, list] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    num, title = mark.args
    entry = _verdicts.setdefault(num, [title, True, 0.0])
    entry[1] = entry[1] and not rep.failed
    entry[2] += rep.duration


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_verdicts):
        title, ok, secs = _verdicts[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {title}  ({secs:.2f} s)")
