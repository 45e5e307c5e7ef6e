import numpy as np
import pytest

from dualrail_scqc.optimizer import synthesize_swap_ancilla_pulse, synthesize_zz_half_pulse
from dualrail_scqc.protocols import gaussian_swap_drive

CHI = 1.0

_ACCEPTANCE = []


@pytest.fixture(scope="session")
def chi():
    return CHI


@pytest.fixture(scope="session")
def zz_design():
    res = synthesize_zz_half_pulse(CHI, seed=0)
    assert res.ok, res.report()
    return res


@pytest.fixture(scope="session")
def swap_drive():
    return gaussian_swap_drive(np.pi / CHI, 0.2)


@pytest.fixture(scope="session")
def swap_design(swap_drive):
    res = synthesize_swap_ancilla_pulse(swap_drive, seed=0)
    assert res.ok, res.report()
    return res


@pytest.fixture
def acceptance():
    """Record one acceptance line: ``acceptance(number, title, passed, detail)``."""
    def record(number, title, passed, detail=""):
        _ACCEPTANCE.append((number, title, bool(passed), detail))
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number}. {title}: {detail}")
