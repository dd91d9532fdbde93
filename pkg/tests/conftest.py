import numpy as np
import pytest
from hypothesis import assume, settings
from hypothesis import strategies as st
from scipy.stats import unitary_group

from qergodic import HermitianOperator, PureState, eigendecompose

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def random_hermitian(rng, d, scale=1.0):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (a + a.conj().T) / 2


def random_state(rng, d):
    return PureState.from_vector(rng.normal(size=d) + 1j * rng.normal(size=d))


def random_spec(rng, d):
    return eigendecompose(HermitianOperator.from_matrix(random_hermitian(rng, d)))


def interior_state(rng, d, floor=1e-2):
    """Haar-random state whose energy populations all exceed ``floor``."""
    while True:
        spec = random_spec(rng, d)
        psi = random_state(rng, d)
        c = spec.to_energy_basis(psi.amplitudes)
        if np.min(np.abs(c) ** 2) >= floor:
            return spec, psi


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# hypothesis strategies


@st.composite
def spectra(draw, min_dim=2, max_dim=6, min_gap=1e-2):
    d = draw(st.integers(min_dim, max_dim))
    E = np.sort(draw(st.lists(st.floats(-5, 5), min_size=d, max_size=d)))
    assume(np.min(np.diff(E)) > min_gap)
    seed = draw(st.integers(0, 2**32 - 1))
    U = unitary_group.rvs(d, random_state=seed) if d > 1 else np.eye(1)
    return E, U


@st.composite
def hamiltonians(draw, **kw):
    E, U = draw(spectra(**kw))
    return HermitianOperator.from_matrix(U @ np.diag(E) @ U.conj().T)


@st.composite
def states(draw, d):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_state(np.random.default_rng(seed), d)
