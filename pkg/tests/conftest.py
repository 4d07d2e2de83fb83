import re

import pytest

_CRITERION = re.compile(r"test_criterion_(\d+)_")


@pytest.hookimpl(tryfirst=True)
def pytest_terminal_summary(terminalreporter):
    rows = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            m = _CRITERION.search(getattr(rep, "nodeid", ""))
            if not m or rep.when not in ("call", "setup"):
                continue
            n = int(m.group(1))
            ok = outcome == "passed" and rows.get(n, ("PASS",))[0] == "PASS"
            detail = "; ".join(v for k, v in rep.user_properties if k == "detail")
            rows[n] = ("PASS" if ok else "FAIL", detail or rows.get(n, ("", ""))[1])
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(rows):
        status, detail = rows[n]
        terminalreporter.write_line(f"criterion {n}: {status}  {detail}")
