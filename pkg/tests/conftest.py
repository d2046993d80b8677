import functools

import pytest

from planscore.synth import SynthConfig, generate

_acceptance: list[tuple[str, str, str]] = []


@functools.lru_cache(maxsize=None)
def synth_plan(seed: int, **overrides):
    """Generated plans are pure functions of (config, seed); cache them across tests."""
    return generate(SynthConfig(**overrides), seed=seed)


@pytest.fixture
def plan():
    return synth_plan(3)


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    _acceptance.append((name, report.outcome.upper(), f"{report.duration:.2f}s"))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, duration in _acceptance:
        terminalreporter.write_line(f"{'PASS' if outcome == 'PASSED' else 'FAIL'}  {name}  ({duration})")
