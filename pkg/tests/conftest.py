from __future__ import annotations

from pathlib import Path

import pytest

from phasekit import Model, parse

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

_ACCEPTANCE_RESULTS: list[tuple[str, bool]] = []


def fixture_path(name: str) -> Path:
    return FIXTURES / f"{name}.phase"


def load_fixture(name: str) -> Model:
    path = fixture_path(name)
    result = parse(path.read_text(encoding="utf-8"), str(path))
    assert result.model is not None, [d.format() for d in result.diagnostics]
    return result.model


@pytest.fixture(scope="session")
def c1() -> Model:
    return load_fixture("c1")


@pytest.fixture(scope="session")
def c2() -> Model:
    return load_fixture("c2")


@pytest.fixture(scope="session")
def c3() -> Model:
    return load_fixture("c3")


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(name): ties a test to one acceptance criterion"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call":
        marker = item.get_closest_marker("acceptance")
        if marker:
            _ACCEPTANCE_RESULTS.append((marker.args[0], report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed in _ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}: {name}")
