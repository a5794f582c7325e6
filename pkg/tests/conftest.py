import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE))

ROOT = HERE.parent
BENCH = ROOT / "benchmarks"


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES
    if not LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(LINES):
        terminalreporter.write_line(LINES[n])
