import numpy as np
import pytest
from hypothesis import settings

from metaimpedance.geometry import make_disk, make_star
from metaimpedance.impedance import ModalData, drude_gold
from metaimpedance.operators import PeriodicOperators, eigendecompose

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def disk():
    return make_disk((0.0, 0.5), 0.2, 128)


@pytest.fixture(scope="session")
def disk_ops(disk):
    return PeriodicOperators.assemble(disk)


@pytest.fixture(scope="session")
def disk_spec(disk_ops):
    return eigendecompose(disk_ops)


@pytest.fixture(scope="session")
def disk_modal(disk_spec, disk):
    return ModalData.from_spectrum(disk_spec, disk)


@pytest.fixture(scope="session")
def star():
    # no mirror symmetry, so no coupling vanishes identically
    return make_star((0.03, 0.45), 0.2, 0.03, 3, 128)


@pytest.fixture(scope="session")
def star_ops(star):
    return PeriodicOperators.assemble(star)


@pytest.fixture
def gold_600():
    return drude_gold(600e-9)


@pytest.fixture(scope="session")
def sweep_nm():
    return np.linspace(300.0, 1500.0, 241)


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def report(request):
    """``report(n, ok, msg)`` prints one acceptance line and asserts ``ok``."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def _report(n, ok, msg):
        line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {msg}"
        print(line)
        lines.append(line)
        assert ok, line

    return _report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
