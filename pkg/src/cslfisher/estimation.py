"""Classical and quantum Fisher information for single-mode Gaussian
readout of the evolved covariance matrix.

The classical figure is (1/2) tr[(sigma_p^-1 d_sigma)^2] with sigma_p the
state block plus the measurement covariance; the quantum figure is the
closed-form single-mode expression with the purity denominator
2 det(sigma)^2 - 1/8.  Both are per shot, for the collapse rate measured
in inverse seconds, so they carry units of seconds squared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import InputNoiseSpec, Trajectory
from .gaussian import Mode, apply_symplectic, beam_splitter_transform, extract_mode

#: clamp range representing the homodyne limits of the measurement squeezing
L_MIN, L_MAX = 1e-8, 1e8

#: guard on |2 det(sigma)^2 - 1/8| below which the state counts as pure
PURITY_GUARD = 1e-12

FLAG_PURE = "pure-singularity"


class PureStateSingularity(ArithmeticError):
    """The state is numerically pure, where the closed-form quantum Fisher
    information expression is singular."""


@dataclass(frozen=True)
class MeasurementSpec:
    """Gaussian readout choice.

    scheme "local" reads one cavity mode directly; "epr" recombines the two
    cavity modes on a beam splitter of angle phi_bs first and reads one
    output slot.  l and theta fix the POVM covariance
    R(theta) diag(l/2, 1/(2l)) R(theta)^T; l = 1 is heterodyne and the
    clamp bounds stand in for the homodyne limits.
    """

    scheme: str
    l: float = 1.0
    theta: float = 0.0
    phi_bs: float = math.pi / 4
    target: int = Mode.CAVITY1

    def __post_init__(self):
        if self.scheme not in ("local", "epr"):
            raise ValueError(f"scheme must be 'local' or 'epr', got {self.scheme!r}")
        if not L_MIN <= self.l <= L_MAX:
            raise ValueError(
                f"measurement squeezing l = {self.l!r} outside clamp range "
                f"[{L_MIN:g}, {L_MAX:g}]")
        if not np.isfinite(self.theta) or not np.isfinite(self.phi_bs):
            raise ValueError("angles must be finite")


@dataclass(frozen=True)
class FisherResult:
    """One evaluated point: per-shot Fisher information with provenance.

    time is in seconds; math.inf marks a steady-state evaluation.  qfi is
    NaN when the state was numerically pure, with the flag recording why.
    """

    time: float
    cfi: float
    qfi: float
    scheme: str
    noise: str
    flag: str = ""


def rotation_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def measurement_covariance(spec: MeasurementSpec) -> np.ndarray:
    """POVM covariance R diag(l/2, 1/(2l)) R^T for the given direction."""
    R = rotation_matrix(spec.theta)
    core = np.diag([0.5 * spec.l, 0.5 / spec.l])
    return R @ core @ R.T


def classical_fisher_cov(sigma_state: np.ndarray, sigma_state_sens: np.ndarray,
                         sigma_m: np.ndarray) -> float:
    """Classical Fisher information for an explicit measurement covariance."""
    sigma_state = np.asarray(sigma_state, dtype=float)
    sens = np.asarray(sigma_state_sens, dtype=float)
    if sigma_state.shape != (2, 2) or sens.shape != (2, 2):
        raise ValueError("expected 2x2 state and sensitivity blocks")
    sigma_p = sigma_state + np.asarray(sigma_m, dtype=float)
    det = float(np.linalg.det(sigma_p))
    if not np.isfinite(det) or det <= 0:
        raise ValueError("total covariance sigma_state + sigma_m is singular")
    M = np.linalg.solve(sigma_p, sens)
    cfi = 0.5 * float(np.trace(M @ M))
    return max(cfi, 0.0)


def classical_fisher(sigma_state: np.ndarray, sigma_state_sens: np.ndarray,
                     spec: MeasurementSpec) -> float:
    """Per-shot classical Fisher information of the Gaussian POVM.

    sigma_state must already be the 2x2 block of the measured mode; the
    measurement covariance is parameter independent, so only the state
    sensitivity enters.
    """
    return classical_fisher_cov(sigma_state, sigma_state_sens,
                                measurement_covariance(spec))


def _adjugate2(M: np.ndarray) -> np.ndarray:
    return np.array([[M[1, 1], -M[0, 1]], [-M[1, 0], M[0, 0]]])


def quantum_fisher(sigma_state: np.ndarray, sigma_state_sens: np.ndarray) -> float:
    """Per-shot quantum Fisher information of a mixed single-mode Gaussian
    state with parameter-independent first moments.

    Evaluated in the adjugate form
    (tr[(adj(d_sigma) sigma)^2] + det(d_sigma)/2) / (2 det(sigma)^2 - 1/8),
    which equals the inverse-based expression whenever d_sigma is
    invertible and stays finite when it is singular.
    """
    sigma = np.asarray(sigma_state, dtype=float)
    dsig = np.asarray(sigma_state_sens, dtype=float)
    if sigma.shape != (2, 2) or dsig.shape != (2, 2):
        raise ValueError("quantum_fisher expects 2x2 state and sensitivity blocks")
    det_s = float(np.linalg.det(sigma))
    denom = 2.0 * det_s ** 2 - 0.125
    if abs(denom) <= PURITY_GUARD:
        raise PureStateSingularity(
            "state is numerically pure (2 det(sigma)^2 = 1/8); the closed-form "
            "quantum Fisher information expression does not apply")
    if denom < 0:
        raise ValueError(
            "det(sigma) below the vacuum value: not a physical covariance matrix")
    adj_prod = _adjugate2(dsig) @ sigma
    numer = float(np.trace(adj_prod @ adj_prod)) + 0.5 * float(np.linalg.det(dsig))
    return max(numer / denom, 0.0)


def recombined_blocks(sigma: np.ndarray, sens: np.ndarray,
                      phi_bs: float, target: int):
    """Beam-split the two cavity modes and return the target slot's 2x2
    state and sensitivity blocks."""
    n_modes = sigma.shape[0] // 2
    S = beam_splitter_transform(phi_bs, n_modes, Mode.CAVITY1, Mode.CAVITY2)
    sigma_r = apply_symplectic(S, sigma)
    sens_r = apply_symplectic(S, sens)
    return extract_mode(sigma_r, target), extract_mode(sens_r, target)


def point_fisher(sigma: np.ndarray, sens: np.ndarray, spec: MeasurementSpec):
    """Classical and quantum Fisher information of one full-system state.

    Returns (cfi, qfi, flag); qfi is NaN with the pure-state flag set when
    the extracted mode is numerically pure.
    """
    if spec.scheme == "local":
        block = extract_mode(sigma, spec.target)
        dblock = extract_mode(sens, spec.target)
    else:
        if sigma.shape[0] < 6:
            raise ValueError("epr scheme needs the two cavity modes present")
        block, dblock = recombined_blocks(sigma, sens, spec.phi_bs, spec.target)
    cfi = classical_fisher(block, dblock, spec)
    try:
        qfi = quantum_fisher(block, dblock)
        flag = ""
    except PureStateSingularity:
        qfi = math.nan
        flag = FLAG_PURE
    return cfi, qfi, flag


def strategy_fisher(trajectory: Trajectory, noise: InputNoiseSpec,
                    spec: MeasurementSpec) -> list[FisherResult]:
    """Evaluate one measurement strategy along a trajectory.

    Pure-state singularities are recorded per point (absent qfi plus flag)
    and the run continues.
    """
    results = []
    for t, sigma, sens in zip(trajectory.times, trajectory.sigmas,
                              trajectory.sensitivities):
        cfi, qfi, flag = point_fisher(sigma, sens, spec)
        results.append(FisherResult(time=float(t), cfi=cfi, qfi=qfi,
                                    scheme=spec.scheme, noise=noise.kind,
                                    flag=flag))
    return results
