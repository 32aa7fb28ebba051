from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from scatterlab.gf import admissible_h, make_field_ctx

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.function_scoped_fixture, HealthCheck.too_slow],
)
settings.load_profile("default")

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def ctx33():
    return make_field_ctx(3, 1, 3)


@pytest.fixture(scope="session")
def ctx34():
    return make_field_ctx(3, 1, 4)


@pytest.fixture(scope="session")
def ctx35():
    return make_field_ctx(3, 1, 5)


@pytest.fixture(scope="session")
def ctx53():
    return make_field_ctx(5, 1, 3)


@pytest.fixture(scope="session")
def ctx322():
    return make_field_ctx(3, 2, 2)


@pytest.fixture(scope="session")
def hs33(ctx33):
    return admissible_h(ctx33)


@pytest.fixture(scope="session")
def hs35(ctx35):
    return admissible_h(ctx35)


@pytest.fixture
def acceptance():
    """Record the one-line verdict of an acceptance criterion."""

    def record(number: int, ok: bool, detail: str):
        ACCEPTANCE_LINES[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(ACCEPTANCE_LINES[number])
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
