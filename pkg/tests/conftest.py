import numpy as np
import pytest

from ccbr.data import SynthConfig, bin_kinematics, generate_synthetic
from ccbr.features import bin_spike_counts, lag_embed, trim_target


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_synth():
    """40 units, 200 s: fast but clearly decodable."""
    return generate_synthetic(SynthConfig(n_units=40, duration=200.0, noise_seed=7))


@pytest.fixture(scope="session")
def small_xy(small_synth):
    base = bin_spike_counts(small_synth, 0.05)
    y = bin_kinematics(small_synth, 0.05)
    x = lag_embed(base, 3, 0).values
    return x, trim_target(y, 3, 0)



def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
