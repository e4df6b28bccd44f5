from fractions import Fraction

import pytest

from l1curve.schedule import OmegaSpec, build_model

ONES = OmegaSpec("constant", (1,))


@pytest.fixture(scope="session")
def model1():
    return build_model(ONES, 1)


@pytest.fixture(scope="session")
def model2():
    return build_model(ONES, 2)


@pytest.fixture(scope="session")
def model3():
    return build_model(ONES, 3)


def frac(text):
    return Fraction(text)


_ACCEPTANCE = []


@pytest.fixture
def criterion(request):
    """Record one pass/fail line per acceptance criterion."""

    def record(label, ok, detail=""):
        _ACCEPTANCE.append(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}".rstrip())
        assert ok, f"{label}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
