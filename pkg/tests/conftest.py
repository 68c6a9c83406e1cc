import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from idss.experiments import canonical_traces  # noqa: E402

DATA = Path(__file__).parent / "data"
FIXTURES = Path(__file__).parents[1] / "src" / "idss" / "data" / "fixtures"


@pytest.fixture(scope="session")
def traces():
    return canonical_traces()


@pytest.fixture(scope="session")
def goldens():
    return json.loads((DATA / "golden_sweeps.json").read_text())


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
