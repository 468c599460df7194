import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from bicmlab.channel import ChannelModel
from bicmlab.constellation import by_name
from bicmlab.numerics import EngineConfig

settings.register_profile(
    "bicmlab",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("bicmlab")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_engine():
    return EngineConfig(samples=20_000, seed=11)


@pytest.fixture(scope="session")
def qam16():
    return by_name("qam16")


@pytest.fixture(scope="session")
def psk8():
    return by_name("psk8")


@pytest.fixture(scope="session")
def qpsk():
    return by_name("qpsk")


@pytest.fixture(scope="session")
def bpsk():
    return by_name("bpsk")


@pytest.fixture(scope="session")
def rayleigh5():
    return ChannelModel.from_db("rayleigh", 5.0)


@pytest.fixture(scope="session")
def awgn5():
    return ChannelModel.from_db("awgn", 5.0)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
