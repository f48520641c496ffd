import numpy as np
import pytest

from qkad import synth


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def obd_segments():
    return synth.generate(synth.DatasetConfig("OBD", seed=7))


@pytest.fixture(scope="session")
def m4w_segments():
    return synth.generate(synth.DatasetConfig("M4W", seed=7))


ACCEPTANCE_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_LINES] = []


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
