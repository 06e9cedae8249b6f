"""Truncated number-basis oracle for the quantum Fisher information.

Independent validation path: the single-mode Gaussian state is rebuilt as
a squeezed, rotated thermal density matrix in a finite Fock space, and the
information is extracted from the Uhlmann fidelity between the states at
parameter values one small step apart.  Nothing here is shared with the
closed-form covariance evaluation it checks.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm

#: spectral floor treated as an exactly pure state
_MIN_THERMAL = 1e-10

#: acceptable occupation of the last retained number state
_LEAK_TOL = 1e-8


def destroy(cutoff: int) -> np.ndarray:
    """Annihilation operator on a cutoff-dimensional number basis."""
    return np.diag(np.sqrt(np.arange(1.0, cutoff)), k=1)


def quadrature_operators(cutoff: int):
    a = destroy(cutoff)
    x = (a + a.T) / np.sqrt(2.0)
    p = 1j * (a.T - a) / np.sqrt(2.0)
    return x, p


def gaussian_density_matrix(sigma: np.ndarray, cutoff: int) -> np.ndarray:
    """Density matrix of the zero-mean single-mode Gaussian state with
    covariance sigma, in a number basis truncated at the given cutoff.

    Built as rotation * squeeze * thermal * squeeze^dag * rotation^dag and
    verified in place: the covariance reconstructed from the matrix must
    match the request, and the top number state must be essentially empty.
    Raises ArithmeticError when the cutoff is too small.
    """
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (2, 2):
        raise ValueError("expected a single-mode (2x2) covariance matrix")
    det = float(np.linalg.det(sigma))
    nu = np.sqrt(det)
    nbar = nu - 0.5
    if nbar <= _MIN_THERMAL:
        raise ValueError("state is pure or unphysical; the oracle needs a mixed state")

    evals, vecs = np.linalg.eigh(sigma)
    s_small, s_large = float(evals[0]), float(evals[1])
    if s_small <= 0:
        raise ValueError("covariance matrix is not positive definite")
    # proper rotation with the large-variance axis first
    O = np.column_stack([vecs[:, 1], vecs[:, 0]])
    if np.linalg.det(O) < 0:
        O[:, 1] = -O[:, 1]
    phi = float(np.arctan2(O[1, 0], O[0, 0]))
    u = 0.25 * np.log(s_large / s_small)

    n = np.arange(cutoff)
    thermal = (nbar / (nbar + 1.0)) ** n / (nbar + 1.0)
    rho = np.diag(thermal).astype(complex)

    a = destroy(cutoff)
    squeeze = expm(0.5 * u * (a.T @ a.T - a @ a))
    rho = squeeze @ rho @ squeeze.conj().T
    rotation = np.diag(np.exp(1j * phi * n))
    rho = rotation @ rho @ rotation.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real

    leak = float(rho[-1, -1].real)
    if leak > _LEAK_TOL:
        raise ArithmeticError(
            f"cutoff {cutoff} too small: edge population {leak:.2e} exceeds "
            f"{_LEAK_TOL:g}")
    x, p = quadrature_operators(cutoff)
    rec = np.empty((2, 2))
    for i, ri in enumerate((x, p)):
        for j, rj in enumerate((x, p)):
            rec[i, j] = np.trace(rho @ (ri @ rj + rj @ ri)).real / 2.0
    err = float(np.abs(rec - sigma).max())
    if err > 1e-6 * max(1.0, float(np.abs(sigma).max())):
        raise ArithmeticError(
            f"cutoff {cutoff} too small: covariance reconstruction error {err:.2e}")
    return rho


def _sqrtm_psd(rho: np.ndarray) -> np.ndarray:
    evals, vecs = np.linalg.eigh(rho)
    evals = np.clip(evals, 0.0, None)
    return (vecs * np.sqrt(evals)) @ vecs.conj().T


def root_fidelity(rho1: np.ndarray, rho2: np.ndarray) -> float:
    """tr sqrt(sqrt(rho1) rho2 sqrt(rho1)), the square root of the Uhlmann
    fidelity, computed as the nuclear norm of sqrt(rho1) sqrt(rho2).

    The nuclear-norm form keeps the near-null spectrum from polluting the
    sum: eigenvalues of the sandwiched product carry eps-level absolute
    error that a square root would blow up to 1e-8 per basis state.
    """
    product = _sqrtm_psd(rho1) @ _sqrtm_psd(rho2)
    return float(np.linalg.svd(product, compute_uv=False).sum())


def qfi_oracle_fock(sigma_state: np.ndarray, sigma_state_sens: np.ndarray,
                    cutoff: int = 60, max_cutoff: int = 200) -> float:
    """Quantum Fisher information from fidelities of number-basis density
    matrices at parameter values a small step apart.

    The sensitivity is rescaled to the size of the state first (the result
    scales quadratically, so this only conditions the arithmetic), the
    fidelity step uses a fixed relative size with Richardson elimination of
    the quadratic bias, and the cutoff is raised until the answer moves by
    less than 1e-4 relative.
    """
    if cutoff < 40:
        raise ValueError("cutoff must be at least 40")
    sigma = np.asarray(sigma_state, dtype=float)
    dsig = np.asarray(sigma_state_sens, dtype=float)
    dnorm = float(np.linalg.norm(dsig))
    if dnorm == 0.0:
        return 0.0
    scale = float(np.linalg.norm(sigma)) / dnorm
    dunit = dsig * scale
    h = 1e-3

    def info_at(step: float, dim: int) -> float:
        rho_minus = gaussian_density_matrix(sigma - step * dunit, dim)
        rho_plus = gaussian_density_matrix(sigma + step * dunit, dim)
        rf = root_fidelity(rho_minus, rho_plus)
        return 8.0 * (1.0 - rf) / (2.0 * step) ** 2

    def richardson(dim: int) -> float:
        coarse = info_at(h, dim)
        fine = info_at(h / 2.0, dim)
        return (4.0 * fine - coarse) / 3.0

    dim = cutoff
    value = None
    while dim <= max_cutoff:
        try:
            refined = richardson(dim)
        except ArithmeticError:
            # leakage gate tripped: this cutoff cannot hold the state yet
            refined = None
        if refined is not None and value is not None:
            if abs(refined - value) <= 1e-4 * max(1.0, abs(refined)):
                return refined / scale ** 2
        value = refined
        dim += 20
    raise ArithmeticError(
        f"oracle did not converge by cutoff {max_cutoff}; last value {value!r}")
