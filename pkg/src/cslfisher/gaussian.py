"""Gaussian-state linear algebra: symplectic form, beam-splitter transforms,
mode extraction and physicality checks for covariance matrices.

Conventions used throughout the package: hbar = 1, vacuum variance 1/2,
quadratures ordered as (Q, P, X1, Y1, X2, Y2), i.e. the mechanical mode
first, then the two cavity modes.
"""

from __future__ import annotations

from enum import IntEnum

import numpy as np

#: absolute tolerance on the minimum eigenvalue of sigma + (i/2) Omega
PHYSICALITY_TOL = 1e-9

#: entrywise tolerance on S Omega S^T = Omega
SYMPLECTIC_TOL = 1e-12


class PhysicalityError(ValueError):
    """A covariance matrix violates the uncertainty relation."""


class Mode(IntEnum):
    """Mode slots in the fixed quadrature ordering.

    After a beam-splitter recombination of the two cavity modes, slot 1
    holds the difference mode and slot 2 the sum mode; EPR_MINUS and
    EPR_PLUS are aliases naming that situation.
    """

    MECHANICAL = 0
    CAVITY1 = 1
    CAVITY2 = 2
    EPR_MINUS = 1
    EPR_PLUS = 2


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal symplectic form, one [[0,1],[-1,0]] block per mode."""
    if n_modes < 1:
        raise ValueError("need at least one mode")
    omega = np.zeros((2 * n_modes, 2 * n_modes))
    for k in range(n_modes):
        omega[2 * k, 2 * k + 1] = 1.0
        omega[2 * k + 1, 2 * k] = -1.0
    return omega


def symmetrize(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.T)


def vacuum_state(n_modes: int) -> np.ndarray:
    """Covariance matrix of the n-mode vacuum, (1/2) identity."""
    return 0.5 * np.eye(2 * n_modes)


def is_symplectic(S: np.ndarray, tol: float = SYMPLECTIC_TOL) -> bool:
    """True iff S preserves the symplectic form to the given tolerance."""
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] % 2:
        return False
    omega = symplectic_form(S.shape[0] // 2)
    return float(np.max(np.abs(S @ omega @ S.T - omega))) <= tol


def beam_splitter_transform(angle: float, total_modes: int,
                            mode_a: int, mode_b: int) -> np.ndarray:
    """Symplectic matrix of a beam splitter mixing two modes.

    Acts as the identity on every uninvolved mode.  At angle pi/4 the
    output quadratures are the balanced combinations
    (X_a - X_b)/sqrt(2), (Y_a - Y_b)/sqrt(2) in slot a and
    (X_a + X_b)/sqrt(2), (Y_a + Y_b)/sqrt(2) in slot b.

    Parameters
    ----------
    angle : mixing angle in radians (pi/4 gives the 50:50 splitter).
    total_modes : number of modes of the matrix being built.
    mode_a, mode_b : distinct mode slots to mix.
    """
    if not np.isfinite(angle):
        raise ValueError(f"beam-splitter angle must be finite, got {angle!r}")
    mode_a, mode_b = int(mode_a), int(mode_b)
    if mode_a == mode_b:
        raise ValueError("beam splitter needs two distinct modes")
    for m in (mode_a, mode_b):
        if not 0 <= m < total_modes:
            raise ValueError(f"mode index {m} out of range for {total_modes} modes")
    c, s = np.cos(angle), np.sin(angle)
    S = np.eye(2 * total_modes)
    ia, ib = 2 * mode_a, 2 * mode_b
    for off in (0, 1):  # X and Y rows rotate identically
        S[ia + off, ia + off] = c
        S[ia + off, ib + off] = -s
        S[ib + off, ia + off] = s
        S[ib + off, ib + off] = c
    return S


def apply_symplectic(S: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Congruence transform S sigma S^T of a covariance matrix."""
    S = np.asarray(S, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if S.shape[1] != sigma.shape[0] or sigma.shape[0] != sigma.shape[1]:
        raise ValueError(
            f"dimension mismatch: S is {S.shape}, sigma is {sigma.shape}")
    return symmetrize(S @ sigma @ S.T)


def extract_mode(sigma: np.ndarray, mode: int) -> np.ndarray:
    """2x2 diagonal block of one mode (Gaussian partial trace to that mode)."""
    sigma = np.asarray(sigma, dtype=float)
    mode = int(mode)
    i = 2 * mode
    if mode < 0 or i + 2 > sigma.shape[0]:
        raise ValueError(f"mode {mode} out of range for dim {sigma.shape[0]}")
    return sigma[i:i + 2, i:i + 2].copy()


def check_physicality(sigma: np.ndarray, tol: float = PHYSICALITY_TOL) -> bool:
    """Uncertainty-relation check: min eig of sigma + (i/2) Omega >= -tol."""
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1] or sigma.shape[0] % 2:
        raise ValueError(f"covariance matrix must be square with even dim, got {sigma.shape}")
    if not np.allclose(sigma, sigma.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(sigma).max())):
        raise ValueError("covariance matrix must be symmetric")
    omega = symplectic_form(sigma.shape[0] // 2)
    eigs = np.linalg.eigvalsh(sigma + 0.5j * omega)
    return bool(eigs.min() >= -tol)


def assert_physical(sigma: np.ndarray, context: str = "covariance matrix",
                    tol: float = PHYSICALITY_TOL) -> None:
    if not check_physicality(sigma, tol=tol):
        raise PhysicalityError(f"{context} violates the uncertainty relation")
