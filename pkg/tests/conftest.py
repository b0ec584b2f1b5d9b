import time
from contextlib import contextmanager

import pytest

_RESULTS: list[str] = []


class AcceptanceRecorder:
    """Times a criterion and records one PASS/FAIL line for the terminal summary."""

    @contextmanager
    def criterion(self, number: int, title: str, runtime_limit: float | None = None):
        start = time.perf_counter()
        notes: list[str] = []
        try:
            yield notes
        except BaseException as exc:
            elapsed = time.perf_counter() - start
            msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
            _RESULTS.append(f"FAIL criterion {number:2d}: {title} ({elapsed:.2f}s) -- {msg}")
            raise
        elapsed = time.perf_counter() - start
        limit = f" / limit {runtime_limit:g}s" if runtime_limit else ""
        detail = f" [{'; '.join(notes)}]" if notes else ""
        if runtime_limit is not None and elapsed >= runtime_limit:
            _RESULTS.append(f"FAIL criterion {number:2d}: {title} ({elapsed:.2f}s{limit}) -- too slow{detail}")
            raise AssertionError(f"criterion {number} took {elapsed:.2f}s, limit {runtime_limit}s")
        _RESULTS.append(f"PASS criterion {number:2d}: {title} ({elapsed:.2f}s{limit}){detail}")


@pytest.fixture
def acceptance():
    return AcceptanceRecorder()


def pytest_terminal_summary(terminalreporter):
    if _RESULTS:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(_RESULTS, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
