import math

import numpy as np
import pytest

from qoz.eigensolver import sho_eigenstates
from qoz.system import ThermalSystem


def sho_basis(beta, n_states=120, nodes=4001, omega=1.0):
    sys = ThermalSystem(beta)
    half = (math.sqrt(2 * n_states + 1) + 12) / math.sqrt(omega)
    return sys, sho_eigenstates(sys, omega, n_states, np.linspace(-half, half, nodes))


@pytest.fixture(scope="session")
def sho_half():
    """Oscillator basis at beta hbar omega = 0.5."""
    return sho_basis(0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# -- acceptance report ----------------------------------------------------------------

_CRITERIA = pytest.StashKey[dict]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")
    config.stash[_CRITERIA] = {}


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    report = yield
    mark = item.get_closest_marker("criterion")
    if mark is not None and (report.when == "call" or report.failed):
        rows = item.config.stash[_CRITERIA].setdefault(mark.args[0], [])
        detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
        rows.append((item.name, report.passed, detail))
    return report


def pytest_terminal_summary(terminalreporter, config):
    table = config.stash.get(_CRITERIA, {})
    if not table:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(table):
        rows = table[n]
        ok = all(passed for _, passed, _ in rows)
        detail = " | ".join(d for _, _, d in rows if d) or ", ".join(name for name, _, _ in rows)
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
