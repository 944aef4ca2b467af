import functools

import pytest

from bullseye.trace_io import BranchRecord, Component, SyntheticSpec, gen_synthetic


@functools.lru_cache(maxsize=None)
def fixture_traces() -> tuple[tuple[str, tuple[BranchRecord, ...]], ...]:
    """Small deterministic traces shared by the equivalence tests."""
    specs = {
        "loops": SyntheticSpec(11, 20_000, [Component("loop", 0.6, trip=4),
                                            Component("loop", 0.4, trip=13, count=2)]),
        "pattern_noise": SyntheticSpec(12, 30_000, [
            Component("local_pattern", 0.4, pattern="1101001"),
            Component("random", 0.3, count=3),
            Component("biased", 0.3, bias=0.9, count=4)]),
        "correlated": SyntheticSpec(13, 30_000, [
            Component("global_correlated", 0.3, k=3),
            Component("biased", 0.4, bias=0.7, count=6),
            Component("loop", 0.3, trip=6)]),
    }
    out = [(name, tuple(gen_synthetic(s))) for name, s in specs.items()]
    out.append(("all_taken", tuple(BranchRecord(0x1000 + 4 * (i % 5), True, 2) for i in range(5_000))))
    return tuple(out)


@pytest.fixture(scope="session")
def traces():
    return fixture_traces()


ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
