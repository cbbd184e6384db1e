import numpy as np
import pytest

import vacmirror as vm


@pytest.fixture(scope="session")
def lorentzian():
    return vm.lorentzian_mirror()


@pytest.fixture(scope="session")
def perfect():
    return vm.perfect_mirror()


@pytest.fixture(scope="session")
def mech_default():
    return vm.MirrorMechanics(m=1.0, k=0.0, tau=1e-3)


def make_tabulated_copy(omega_max=12.0, step=2e-3, log_from=2.0, log_points=2000):
    """Tabulated resampling of the Lorentzian: dense linear head, log tail."""
    m = vm.lorentzian_mirror()
    head = np.arange(0.0, min(log_from, omega_max), step)
    if omega_max > log_from:
        tail = np.geomspace(log_from, omega_max, log_points)
        grid = np.unique(np.concatenate([head, tail]))
    else:
        grid = head
    return vm.tabulated_mirror(grid, vm.reflectivity(m, grid), vm.transmissivity(m, grid))


@pytest.fixture(scope="session")
def tabulated_copy():
    return make_tabulated_copy()
