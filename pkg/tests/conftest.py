from __future__ import annotations

from pathlib import Path

import pytest

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

_criteria: dict[int, str] = {}


def record(number: int, ok: bool, detail: str) -> None:
    """Note one acceptance criterion's outcome; printed at the end of the run."""
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    _criteria[number] = line
    print(line)


@pytest.fixture
def corpus() -> Path:
    return CORPUS


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        terminalreporter.write_line(_criteria[number])
