import numpy as np
import pytest

from cslfisher.gaussian import beam_splitter_transform


def local_symplectic(block, n_modes, mode):
    """Embed a 2x2 symplectic block at one mode slot."""
    S = np.eye(2 * n_modes)
    i = 2 * mode
    S[i:i + 2, i:i + 2] = block
    return S


def rotation_block(phi):
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, -s], [s, c]])


def squeeze_block(u):
    return np.diag([np.exp(u), np.exp(-u)])


def random_symplectic(rng, n_modes, max_squeeze=0.6):
    """Product of local rotations, local squeezes and beam splitters."""
    S = np.eye(2 * n_modes)
    for mode in range(n_modes):
        S = local_symplectic(rotation_block(rng.uniform(0, 2 * np.pi)),
                             n_modes, mode) @ S
        S = local_symplectic(squeeze_block(rng.uniform(-max_squeeze, max_squeeze)),
                             n_modes, mode) @ S
    for a in range(n_modes):
        for b in range(a + 1, n_modes):
            S = beam_splitter_transform(rng.uniform(0, np.pi), n_modes, a, b) @ S
    return S


def random_physical_sigma(rng, n_modes, max_squeeze=0.6, max_thermal=2.0):
    """Random mixed covariance matrix: symplectic dressing of a thermal core."""
    nu = 0.5 + rng.uniform(0.05, max_thermal, size=n_modes)
    core = np.diag(np.repeat(nu, 2))
    S = random_symplectic(rng, n_modes, max_squeeze)
    sigma = S @ core @ S.T
    return 0.5 * (sigma + sigma.T)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
