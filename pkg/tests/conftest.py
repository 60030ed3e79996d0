from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from zxcut.circuit import build_msc_d3, build_msc_d5
from zxcut.decompose import run_strategy

settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large, HealthCheck.filter_too_much],
)
settings.load_profile("default")

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter) -> None:  # pragma: no cover - reporting only
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        tr.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def msc_d3():
    return build_msc_d3()


@pytest.fixture(scope="session")
def msc_d5():
    return build_msc_d5()


@pytest.fixture(scope="session")
def d3_cut(msc_d3):
    return run_strategy("cut", msc_d3, circuit="msc-d3")


@pytest.fixture(scope="session")
def d5_reuse(msc_d5):
    return run_strategy("cut-reuse", msc_d5, circuit="msc-d5")
