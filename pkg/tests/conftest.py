from pathlib import Path

import pytest

from ruleout_eu.cohort import Cohort

DATA = Path(__file__).parent / "data"


@pytest.fixture
def toy_path() -> Path:
    return DATA / "toy_cohort.csv"


@pytest.fixture
def toy_cohort() -> Cohort:
    return Cohort.from_arrays(
        truth=[0, 0, 0, 1, 0, 1],
        reader_decision=[0, 0, 1, 1, 0, 1],
        ai_score=[1, 2, 3, 4, 5, 6],
        patient_ids=[f"p{i}" for i in range(1, 7)],
    )


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if not REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for line in REPORT:
        terminalreporter.write_line(line)
