import json
from pathlib import Path

import pytest

ORACLE_PATH = Path(__file__).parent / "oracles" / "values.json"


@pytest.fixture(scope="session")
def oracle():
    """High-precision reference values frozen by ``oracles/generate.py``."""
    return json.loads(ORACLE_PATH.read_text())


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    order = sorted(RESULTS, key=lambda s: (int(s.split("[")[0]), s))
    for key in order:
        terminalreporter.write_line(RESULTS[key])
