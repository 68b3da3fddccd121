import numpy as np
import pytest

from mmfsec.channel import gen_synthetic_channel
from mmfsec.rng import SeededRng

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def gen():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def h16():
    """16-mode synthetic channel, 20 dB spread, used by the scheme comparisons."""
    return gen_synthetic_channel(16, 20.0, SeededRng(1))


def random_psd(gen, n, rank=None, scale=1.0):
    k = n if rank is None else rank
    x = gen.standard_normal((n, k)) + 1j * gen.standard_normal((n, k))
    return scale * (x @ x.conj().T) / k


def random_complex(gen, n):
    return (gen.standard_normal((n, n)) + 1j * gen.standard_normal((n, n))) / np.sqrt(2)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
