"""Drift and diffusion construction plus Lyapunov evolution for the
two-cavity optomechanical system with collapse-induced momentum diffusion.

The covariance matrix obeys d(sigma)/dt = A sigma + sigma A^T + D.  The
collapse rate enters D as an extra diffusion constant on the mechanical
momentum, so the sensitivity d(sigma)/d(lambda_csl) obeys the same
equation with D replaced by its lambda derivative (a single unit entry at
the momentum slot).  Both are propagated together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussian import (
    Mode,
    PhysicalityError,
    assert_physical,
    check_physicality,
    symmetrize,
    vacuum_state,
)

HBAR = 1.054571817e-34  # J s
KB = 1.380649e-23       # J / K

#: default cap on the integrator step, in units of the inverse fastest rate
STEP_SAFETY = 0.05

#: max-norm residual accepted from the steady-state solve, measured on the
#: rate-normalized equation (drift scaled to unit magnitude)
STEADY_RESIDUAL_TOL = 1e-10


class NonHurwitzError(ValueError):
    """The drift matrix has a non-decaying eigenvalue; no steady state."""


@dataclass(frozen=True)
class SystemParams:
    """Physical rates and couplings of the two-cavity optomechanical system.

    omega_m : mechanical angular frequency, rad/s
    gamma_m : mechanical damping rate, 1/s
    kappa : cavity decay rate, 1/s (shared by both cavities)
    delta1, delta2 : cavity detunings, rad/s
    g : effective linearized optomechanical coupling, rad/s
    temperature : environment temperature, K
    lambda_csl : collapse diffusion rate, 1/s
    """

    omega_m: float
    gamma_m: float
    kappa: float
    delta1: float
    delta2: float
    g: float
    temperature: float
    lambda_csl: float

    def __post_init__(self):
        if not self.omega_m > 0:
            raise ValueError("omega_m must be positive")
        if self.gamma_m < 0:
            raise ValueError("gamma_m must be non-negative")
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")
        if self.lambda_csl < 0:
            raise ValueError("lambda_csl must be non-negative")

    @property
    def brownian_diffusion(self) -> float:
        """Momentum diffusion rate 2 gamma_m k_B T / (hbar omega_m), 1/s."""
        return 2.0 * self.gamma_m * KB * self.temperature / (HBAR * self.omega_m)


@dataclass(frozen=True)
class InputNoiseSpec:
    """Driving-noise choice: independent thermal beams or a two-mode
    squeezed beam pair.

    kind is "thermal" (uses n1, n2) or "tms" (uses r, psi_s).  All fields
    are stored so one spec can describe both views of a comparison run.
    """

    kind: str
    n1: float = 0.0
    n2: float = 0.0
    r: float = 0.0
    psi_s: float = 0.0

    def __post_init__(self):
        if self.kind not in ("thermal", "tms"):
            raise ValueError(f"noise kind must be 'thermal' or 'tms', got {self.kind!r}")
        if self.n1 < 0 or self.n2 < 0:
            raise ValueError("thermal photon numbers must be non-negative")
        if self.r < 0:
            raise ValueError("squeezing amplitude must be non-negative")

    @classmethod
    def thermal(cls, n1: float = 0.0, n2: float = 0.0) -> "InputNoiseSpec":
        return cls(kind="thermal", n1=n1, n2=n2)

    @classmethod
    def tms(cls, r: float, psi_s: float) -> "InputNoiseSpec":
        return cls(kind="tms", r=r, psi_s=psi_s)

    def as_thermal(self) -> "InputNoiseSpec":
        """Thermal view of this spec (same photon numbers, kind retagged)."""
        return InputNoiseSpec(kind="thermal", n1=self.n1, n2=self.n2,
                              r=self.r, psi_s=self.psi_s)

    def as_tms(self) -> "InputNoiseSpec":
        """Squeezed view of this spec (same r, psi_s, kind retagged)."""
        return InputNoiseSpec(kind="tms", n1=self.n1, n2=self.n2,
                              r=self.r, psi_s=self.psi_s)


@dataclass(frozen=True)
class Trajectory:
    """Covariance matrix and its collapse-rate sensitivity on a time grid."""

    times: np.ndarray          # shape (n,), seconds, strictly increasing
    sigmas: np.ndarray         # shape (n, d, d)
    sensitivities: np.ndarray  # shape (n, d, d), units of seconds

    def __len__(self) -> int:
        return len(self.times)


def build_drift(params: SystemParams) -> np.ndarray:
    """6x6 drift matrix in the (Q, P, X1, Y1, X2, Y2) ordering.

    Mechanics: dQ = omega_m P, dP = -omega_m Q - gamma_m P + g X1.
    Cavity i:  dXi = -kappa Xi + delta_i Yi, dYi = -delta_i Xi - kappa Yi,
    with cavity 1 additionally driven by dY1 += g Q.  Cavity 2 has no
    mechanical coupling.
    """
    w, gm, k = params.omega_m, params.gamma_m, params.kappa
    d1, d2, g = params.delta1, params.delta2, params.g
    A = np.zeros((6, 6))
    A[0, 1] = w
    A[1, 0] = -w
    A[1, 1] = -gm
    A[1, 2] = g
    A[2, 2] = -k
    A[2, 3] = d1
    A[3, 2] = -d1
    A[3, 3] = -k
    A[3, 0] = g
    A[4, 4] = -k
    A[4, 5] = d2
    A[5, 4] = -d2
    A[5, 5] = -k
    return A


def squeezing_axis_matrix(psi_s: float) -> np.ndarray:
    """Axis matrix [[cos, sin], [sin, -cos]] of the squeezing angle."""
    c, s = np.cos(psi_s), np.sin(psi_s)
    return np.array([[c, s], [s, -c]])


def input_noise_covariance(kappa: float, noise: InputNoiseSpec) -> np.ndarray:
    """4x4 covariance block of the driving light, including decay-rate factors.

    Thermal driving gives 2 kappa (n_i + 1/2) per cavity; two-mode squeezed
    driving gives kappa cosh(2r) on the diagonal blocks and
    kappa sinh(2r) times the squeezing-axis matrix on the off-diagonal
    blocks.  Both reduce to kappa times the identity for vacuum inputs.
    """
    if noise.kind == "thermal":
        block = np.zeros((4, 4))
        block[0:2, 0:2] = 2.0 * kappa * (noise.n1 + 0.5) * np.eye(2)
        block[2:4, 2:4] = 2.0 * kappa * (noise.n2 + 0.5) * np.eye(2)
        return block
    ch, sh = np.cosh(2.0 * noise.r), np.sinh(2.0 * noise.r)
    axis = squeezing_axis_matrix(noise.psi_s)
    block = np.zeros((4, 4))
    block[0:2, 0:2] = kappa * ch * np.eye(2)
    block[2:4, 2:4] = kappa * ch * np.eye(2)
    block[0:2, 2:4] = kappa * sh * axis
    block[2:4, 0:2] = kappa * sh * axis
    return block


def build_diffusion(params: SystemParams, noise: InputNoiseSpec) -> np.ndarray:
    """6x6 diffusion matrix: Brownian plus collapse momentum diffusion on
    the mechanics, driving-light covariance on the optical block."""
    D = np.zeros((6, 6))
    D[1, 1] = params.brownian_diffusion + params.lambda_csl
    D[2:6, 2:6] = input_noise_covariance(params.kappa, noise)
    return D


def lambda_diffusion_derivative(dim: int = 6) -> np.ndarray:
    """Derivative of the diffusion matrix in the collapse rate: a single
    unit entry at the mechanical momentum slot.

    Assumes the mechanical mode occupies the first mode slot, as in the
    full 6x6 and reduced 4x4 orderings used here.
    """
    E = np.zeros((dim, dim))
    E[1, 1] = 1.0
    return E


def _lyap_rhs(A: np.ndarray, D: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    return A @ sigma + sigma @ A.T + D


def _rk4_step(A, D, Dp, sigma, sens, h):
    k1 = _lyap_rhs(A, D, sigma)
    m1 = _lyap_rhs(A, Dp, sens)
    k2 = _lyap_rhs(A, D, sigma + 0.5 * h * k1)
    m2 = _lyap_rhs(A, Dp, sens + 0.5 * h * m1)
    k3 = _lyap_rhs(A, D, sigma + 0.5 * h * k2)
    m3 = _lyap_rhs(A, Dp, sens + 0.5 * h * m2)
    k4 = _lyap_rhs(A, D, sigma + h * k3)
    m4 = _lyap_rhs(A, Dp, sens + h * m3)
    sigma = sigma + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    sens = sens + (h / 6.0) * (m1 + 2.0 * m2 + 2.0 * m3 + m4)
    return symmetrize(sigma), symmetrize(sens)


def evolve(A: np.ndarray, D: np.ndarray, sigma0: np.ndarray,
           times: np.ndarray, sigma0_sens: np.ndarray | None = None,
           d_diffusion: np.ndarray | None = None,
           max_step: float | None = None,
           enforce_physicality: bool = True) -> Trajectory:
    """Integrate the covariance equation and its collapse-rate sensitivity.

    Classical fixed-step fourth-order Runge-Kutta with symmetrization after
    every step; the step is capped at STEP_SAFETY over the largest drift
    entry (or at max_step when given), and each grid interval is split into
    equal substeps.  Fixed stepping keeps runs reproducible bit for bit.

    times must be strictly increasing and non-negative; integration always
    starts from sigma0 at t = 0.  Physicality is checked at every stored
    grid point and failure aborts with the offending time in the message;
    enforce_physicality=False skips the per-point guard (the initial state
    is still validated), for exercising the bare matrix equation with
    coefficient matrices that do not describe a quantum model.
    """
    A = np.asarray(A, dtype=float)
    D = np.asarray(D, dtype=float)
    sigma0 = np.asarray(sigma0, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or D.shape != (n, n) or sigma0.shape != (n, n):
        raise ValueError("A, D and sigma0 must be square matrices of equal size")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise ValueError("time grid must be a non-empty 1-D array")
    if not np.all(np.isfinite(times)) or times[0] < 0 or np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be finite, non-negative and strictly increasing")
    assert_physical(sigma0, context="initial covariance matrix")

    if d_diffusion is None:
        d_diffusion = lambda_diffusion_derivative(n)
    Dp = np.asarray(d_diffusion, dtype=float)
    sens = np.zeros((n, n)) if sigma0_sens is None else symmetrize(
        np.asarray(sigma0_sens, dtype=float))

    rate = float(np.abs(A).max())
    h_cap = STEP_SAFETY / rate if rate > 0 else math.inf
    if max_step is not None:
        if max_step <= 0:
            raise ValueError("max_step must be positive")
        h_cap = min(h_cap, max_step)

    sigmas = np.empty((len(times), n, n))
    sens_out = np.empty((len(times), n, n))
    sigma = symmetrize(sigma0)
    t_prev = 0.0
    for i, t in enumerate(times):
        span = t - t_prev
        if span > 0:
            nsub = 1 if not math.isfinite(h_cap) else max(1, math.ceil(span / h_cap))
            h = span / nsub
            for _ in range(nsub):
                sigma, sens = _rk4_step(A, D, Dp, sigma, sens, h)
        sigmas[i] = sigma
        sens_out[i] = sens
        if enforce_physicality and not check_physicality(sigma):
            raise PhysicalityError(
                f"evolved covariance lost physicality at t = {t:.6e} s "
                f"(step {h_cap:.3e} s); the step size or the model is unstable")
        t_prev = t
    return Trajectory(times=times.copy(), sigmas=sigmas, sensitivities=sens_out)


def is_hurwitz(A: np.ndarray) -> bool:
    """True iff every eigenvalue of A has a strictly negative real part."""
    return bool(np.linalg.eigvals(np.asarray(A, dtype=float)).real.max() < 0)


def steady_state(A: np.ndarray, D: np.ndarray,
                 d_diffusion: np.ndarray | None = None,
                 residual_tol: float = STEADY_RESIDUAL_TOL,
                 check_physical: bool = True):
    """Solve A sigma + sigma A^T = -D and the matching sensitivity equation.

    The solve vectorizes the equation into (A (x) I + I (x) A) vec(sigma) =
    -vec(D) and uses dense LU, followed by a few iterative-refinement
    passes.  The drift is rescaled to unit magnitude first; residual_tol
    applies to that rate-normalized equation, which makes the tolerance
    independent of the unit of time.

    Returns (sigma_ss, sensitivity_ss).  Raises NonHurwitzError when A has
    a non-decaying eigenvalue and ArithmeticError when the refined residual
    still exceeds residual_tol.
    """
    A = np.asarray(A, dtype=float)
    D = np.asarray(D, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or D.shape != (n, n):
        raise ValueError("A and D must be square matrices of equal size")
    if not is_hurwitz(A):
        raise NonHurwitzError(
            "drift matrix has an eigenvalue with non-negative real part; "
            "no steady state exists")
    if d_diffusion is None:
        d_diffusion = lambda_diffusion_derivative(n)
    Dp = np.asarray(d_diffusion, dtype=float)

    scale = float(np.abs(A).max())
    An = A / scale
    eye = np.eye(n)
    K = np.kron(An, eye) + np.kron(eye, An)

    def solve_one(rhs: np.ndarray) -> np.ndarray:
        # rate-normalized right-hand side, refined to roundoff level
        x = np.linalg.solve(K, -rhs.ravel()).reshape(n, n)
        x = symmetrize(x)
        best = x
        best_res = float(np.abs(An @ x + x @ An.T + rhs).max())
        for _ in range(3):
            res_mat = An @ best + best @ An.T + rhs
            corr = np.linalg.solve(K, -res_mat.ravel()).reshape(n, n)
            cand = symmetrize(best + corr)
            cand_res = float(np.abs(An @ cand + cand @ An.T + rhs).max())
            if cand_res >= best_res:
                break
            best, best_res = cand, cand_res
        if best_res > residual_tol:
            raise ArithmeticError(
                f"steady-state residual {best_res:.3e} exceeds {residual_tol:.1e} "
                "on the rate-normalized equation")
        return best

    sigma = solve_one(D / scale)
    sens = solve_one(Dp / scale)
    if check_physical:
        assert_physical(sigma, context="steady-state covariance matrix")
    return sigma, sens


def initial_state(params: SystemParams):
    """Pre-drive state: the optomechanical half settled under vacuum input,
    the second cavity in its ground state.

    The (Q, P, X1, Y1) block is the steady state of the reduced four-mode
    dynamics with vacuum optical input plus Brownian and collapse momentum
    diffusion; the (X2, Y2) block is vacuum with no cross correlations.
    The returned sensitivity block feeds the evolution as the sensitivity
    initial condition, because this state depends on the collapse rate.

    Returns (sigma0, sigma0_sens), both 6x6.
    """
    A6 = build_drift(params)
    A4 = A6[:4, :4]
    d_p = params.brownian_diffusion + params.lambda_csl
    D4 = np.diag([0.0, d_p, params.kappa, params.kappa])
    E4 = lambda_diffusion_derivative(4)

    if is_hurwitz(A4):
        sigma4, sens4 = steady_state(A4, D4, E4, check_physical=False)
    elif params.g == 0 and params.gamma_m == 0 and d_p == 0:
        # mechanics isolated and noise free: its ground state persists
        cav, _ = steady_state(A4[2:, 2:], D4[2:, 2:], np.zeros((2, 2)),
                              check_physical=False)
        sigma4 = np.zeros((4, 4))
        sigma4[:2, :2] = vacuum_state(1)
        sigma4[2:, 2:] = cav
        sens4 = np.zeros((4, 4))
    else:
        raise NonHurwitzError(
            "reduced optomechanical dynamics has no steady state for these "
            "parameters; cannot build the pre-drive initial state")

    sigma0 = np.zeros((6, 6))
    sigma0[:4, :4] = sigma4
    sigma0[4:, 4:] = vacuum_state(1)
    sens0 = np.zeros((6, 6))
    sens0[:4, :4] = sens4
    assert_physical(sigma0, context="pre-drive initial state")
    return sigma0, sens0
