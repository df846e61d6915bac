import numpy as np
import pytest

from barriertime import PotentialSpec, TunnelingTimeDensity
from barriertime.wavepacket import PacketSpec, spectral_table, suggest_nodes


@pytest.fixture(scope="session")
def delta():
    return PotentialSpec.delta(2.0)


@pytest.fixture(scope="session")
def rect():
    return PotentialSpec.rectangle(2.0, 5.0)


@pytest.fixture(scope="session")
def packet():
    return PacketSpec()


@pytest.fixture(scope="session")
def table(packet):
    return spectral_table(packet, suggest_nodes(packet, 2.0 * abs(packet.x0)))


@pytest.fixture(scope="session")
def wide_table():
    """Broader packet used for fast checks (sigma_x = 10)."""
    pk = PacketSpec(sigma_p=0.05, x0=-120.0)
    return spectral_table(pk, 400)


@pytest.fixture(scope="session")
def delta_density(delta):
    return TunnelingTimeDensity(potential=delta).fit(np.array([-3500.0, 3500.0]))


@pytest.fixture(scope="session")
def rect_density(rect):
    return TunnelingTimeDensity(potential=rect).fit(np.array([-3500.0, 3500.0]))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            lines += [v for k, v in getattr(rep, "user_properties", []) if k == "acceptance"]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
