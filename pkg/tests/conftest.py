import numpy as np
import pytest

from strictlab import Configuration, Lattice, preset_params


@pytest.fixture(scope="session")
def preset():
    """R = 2, delta = 0.1: U = 8, U_bar = 8.04, u = 0.1, rho = 0.5, eps = 0.4."""
    return preset_params(2.0, 0.1)


@pytest.fixture(scope="session")
def lat4():
    return Lattice(4)


@pytest.fixture(scope="session")
def lat16():
    return Lattice(16)


def random_config(lattice, rng, r_max=4.0):
    return Configuration(rng.choice([-1.0, 1.0], lattice.n_sites),
                         rng.uniform(0.01, r_max, lattice.n_bonds))


def checkerboard(lattice, r):
    return Configuration(lattice.parity().astype(float), np.full(lattice.n_bonds, r))


ACCEPTANCE: dict[str, tuple[bool, str]] = {}
CRITERIA = ("A1", "A2", "A3", "A4", "A5", "A6", "A7")


def verdict(key, ok, detail):
    """Record one acceptance criterion, print its line, then assert it."""
    ACCEPTANCE[key] = (bool(ok), detail)
    print(f"{key} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def pytest_terminal_summary(terminalreporter):
    ran = [k for k in CRITERIA if k in ACCEPTANCE]
    if not ran:
        return
    terminalreporter.section("acceptance criteria")
    for key in CRITERIA:
        if key in ACCEPTANCE:
            ok, detail = ACCEPTANCE[key]
            terminalreporter.write_line(f"{key} {'PASS' if ok else 'FAIL'}: {detail}")
        else:
            terminalreporter.write_line(f"{key} FAIL: did not reach a verdict")
