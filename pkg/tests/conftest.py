import math

import numpy as np
import pytest

from bosonic_qubits import correlation as corr
from bosonic_qubits import interferometer as ifm
from bosonic_qubits.spectra import SpectralProfile

OMEGA0 = 20.0
DELTA_OMEGA = 1.0

_acceptance_lines = []


def source(t_offset=0.0, theta=0.0, omega0=OMEGA0, delta_omega=DELTA_OMEGA):
    return corr.PolarizedSource(SpectralProfile(omega0, delta_omega, t_offset), theta)


def triples(sources):
    return [(s.profile.omega0, s.profile.delta_omega, s.profile.t_offset) for s in sources]


@pytest.fixture
def balanced_u():
    return ifm.submatrix(ifm.beam_splitter(0.5), ifm.PortSelection((1, 2), (1, 2)))


@pytest.fixture
def haar8():
    return ifm.haar_random_unitary(8, 42)


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


@pytest.fixture
def report_criterion():
    def record(number, title, passed, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {title}" + (f" ({detail})" if detail else "")
        _acceptance_lines.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_acceptance_lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)


HALF_PI = math.pi / 2
