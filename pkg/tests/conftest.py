import numpy as np
import pytest

from vibronic import MolecularParams, build_sequence, run_with_auto_cutoff

# Reference transition parameters (frequencies cm^-1); the expected squeeze
# parameters, rotation angles and displacements they reproduce are asserted
# in the doktorov and acceptance tests.
SO2_TO_SO2PLUS = dict(
    omega_initial=(1178.4, 518.9),
    omega_final=(1112.7, 415.0),
    duschinsky=[[0.982, 0.188], [-0.188, 0.982]],
    delta=(-0.026, 1.716),
    name="so2_to_so2plus",
)
SO2MINUS_TO_SO2 = dict(
    omega_initial=(989.5, 451.4),
    omega_final=(1178.4, 518.9),
    duschinsky=[[0.998, 0.065], [-0.065, 0.998]],
    delta=(1.360, -0.264),
    name="so2minus_to_so2",
)


@pytest.fixture(scope="session")
def so2_params():
    return MolecularParams(**SO2_TO_SO2PLUS)


@pytest.fixture(scope="session")
def so2minus_params():
    return MolecularParams(**SO2MINUS_TO_SO2)


@pytest.fixture(scope="session")
def so2_sequence(so2_params):
    return build_sequence(so2_params)


@pytest.fixture(scope="session")
def so2_state(so2_sequence):
    return run_with_auto_cutoff(so2_sequence.ops, 2)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260810)
