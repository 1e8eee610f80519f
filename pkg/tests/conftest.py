import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

EXAMPLE_A = (1.0, -2.0, -6.0, 2.0)
EXAMPLE_B = (1.0, -2.0, -12 / 5, 2.0)
EXAMPLE_B_OUT = (1.0, -2.0, -12 / 5 + 1 / 100, 2.0)
EXAMPLE_C = (1.0, 2.0, -3.0, 0.5)
EXAMPLE_D1 = (1.0, -8.0, -3.8289, -1.8792)
EXAMPLE_D2 = (1.0, -8.0, -28.4649, -1.8792)

# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
