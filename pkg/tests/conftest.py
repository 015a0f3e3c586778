from __future__ import annotations

import contextlib
import time

import pytest

_CRITERIA: list[tuple[int, str, bool, float, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance criterion; the summary prints a line per criterion."""

    @contextlib.contextmanager
    def record(number: int, title: str):
        info: dict = {}
        start = time.perf_counter()
        try:
            yield info
        except BaseException:
            _CRITERIA.append((number, title, False, time.perf_counter() - start,
                              info.get("detail", "")))
            raise
        _CRITERIA.append((number, title, True, time.perf_counter() - start,
                          info.get("detail", "")))

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, secs, detail in sorted(_CRITERIA):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({secs:.2f}s)"
        if detail:
            line += f" -- {detail}"
        terminalreporter.write_line(line)
