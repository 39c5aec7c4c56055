import re
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_CRITERION = re.compile(r"test_criterion_(\d+)_")


def pytest_terminal_summary(terminalreporter):
    outcome = {}
    for status in ("passed", "failed", "error", "xfailed", "xpassed"):
        for rep in terminalreporter.stats.get(status, []):
            m = _CRITERION.search(getattr(rep, "nodeid", ""))
            if not m or getattr(rep, "when", "call") not in ("call", "setup"):
                continue
            key = int(m.group(1))
            if "literal" in rep.nodeid:
                continue
            ok = status == "passed"
            outcome[key] = outcome.get(key, True) and ok
    if not outcome:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(outcome):
        terminalreporter.write_line(f"criterion {key}: {'PASS' if outcome[key] else 'FAIL'}")
