import numpy as np
import pytest

from kahlerfol.bases import flat_torus, fubini_study, product
from kahlerfol.bundles import circle_bundle, warped_bundle
from kahlerfol.foliation import jacobi_decay_experiment
from kahlerfol.profile import quadratic_q, realize

# closed-form data of quadratic_q(1, 2, 2) at tau = 3/2 (frozen from the sympy oracle in test_oracles.py)
MID_TAU = 1.5
MID_Q = 0.5
MID_R = np.sqrt(3.0)
MID_DR = np.sqrt(0.5) / np.sqrt(3.0)
MID_F = np.sqrt(0.5)
MID_M = 1.0 / 6.0
MID_Q_DM = -1.0 / 18.0
MID_K_JH_U = 1.0 / 18.0  # 0.0555556
MID_VERTICAL_LAMBDA = 20.0 / 9.0
QUADRATIC_L = np.pi / np.sqrt(2.0)  # 2.2214415


@pytest.fixture(scope="session")
def qprofile():
    return quadratic_q(1.0, 2.0, 2.0)


@pytest.fixture(scope="session")
def profile(qprofile):
    return realize(qprofile)


@pytest.fixture(scope="session")
def fs2():
    return fubini_study(2)


@pytest.fixture(scope="session")
def wb(fs2, profile):
    return warped_bundle(fs2, profile)


@pytest.fixture(scope="session")
def wb_perturbed(fs2, profile):
    return warped_bundle(fs2, profile.perturbed(1.05))


@pytest.fixture(scope="session")
def samples(wb):
    return wb.sample(np.random.default_rng(0), 20)


@pytest.fixture(scope="session")
def midpoint(wb, profile):
    return np.array([float(profile.t_of_tau(MID_TAU)), 0.1, 0.2, -0.1, 0.3, 0.05])


@pytest.fixture(scope="session")
def circle_flat():
    return circle_bundle(flat_torus(2), 1.0, 1.0, 2.0)


@pytest.fixture(scope="session")
def circle_fs():
    return circle_bundle(fubini_study(2), 0.7, 1.3, 2.0)


@pytest.fixture(scope="session")
def fs11_fs12():
    return product(fubini_study(1, 1.0), fubini_study(1, 2.0))


@pytest.fixture(scope="session")
def trace(wb):
    return jacobi_decay_experiment(wb)
