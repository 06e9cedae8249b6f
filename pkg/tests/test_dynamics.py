import dataclasses

import numpy as np
import pytest

from cslfisher.dynamics import (
    HBAR,
    KB,
    InputNoiseSpec,
    NonHurwitzError,
    SystemParams,
    build_diffusion,
    build_drift,
    evolve,
    initial_state,
    is_hurwitz,
    lambda_diffusion_derivative,
    steady_state,
)
from cslfisher.gaussian import PhysicalityError, check_physicality

SAMPLE = SystemParams(omega_m=2 * np.pi * 1e6, gamma_m=1e4, kappa=1e7,
                      delta1=0.0, delta2=0.0, g=6e6, temperature=1e-3,
                      lambda_csl=1e6)

# rates of order one, convenient for integration oracles
DESK = SystemParams(omega_m=2.0, gamma_m=0.4, kappa=1.5, delta1=1.0,
                    delta2=-0.5, g=0.8, temperature=0.0, lambda_csl=3.0)


def test_drift_decouples_without_coupling():
    p = dataclasses.replace(SAMPLE, g=0.0)
    A = build_drift(p)
    assert np.all(A[:2, 2:] == 0.0) and np.all(A[2:, :2] == 0.0)


def test_drift_eigenvalues_resonant_uncoupled():
    # mechanical pair solves s^2 + gamma s + omega^2 = 0; cavities give -kappa
    p = dataclasses.replace(SAMPLE, g=0.0, delta1=0.0, delta2=0.0)
    w, gm, k = p.omega_m, p.gamma_m, p.kappa
    mech = np.roots([1.0, gm, w * w])
    expected = np.sort_complex(np.concatenate([mech, [-k, -k, -k, -k]]))
    got = np.sort_complex(np.linalg.eigvals(build_drift(p)))
    assert np.allclose(got, expected, rtol=1e-9)


def test_drift_sample_config_is_hurwitz():
    assert is_hurwitz(build_drift(SAMPLE))


def test_diffusion_vacuum_thermal_block():
    D = build_diffusion(SAMPLE, InputNoiseSpec.thermal(0.0, 0.0))
    assert np.allclose(D[2:, 2:], SAMPLE.kappa * np.eye(4))
    assert D[0, 0] == 0.0


def test_diffusion_tms_zero_squeezing_matches_vacuum():
    D = build_diffusion(SAMPLE, InputNoiseSpec.tms(0.0, 0.7))
    assert np.allclose(D[2:, 2:], SAMPLE.kappa * np.eye(4))


def test_diffusion_momentum_entry_is_brownian_plus_collapse():
    p = dataclasses.replace(SAMPLE, temperature=0.0, lambda_csl=1e6)
    D = build_diffusion(p, InputNoiseSpec.thermal(0.0, 0.0))
    assert D[1, 1] == 1e6
    p2 = dataclasses.replace(SAMPLE, temperature=2e-3)
    D2 = build_diffusion(p2, InputNoiseSpec.thermal(0.0, 0.0))
    expected = 2 * p2.gamma_m * KB * p2.temperature / (HBAR * p2.omega_m) + p2.lambda_csl
    assert np.isclose(D2[1, 1], expected, rtol=1e-12)


def test_diffusion_positive_semidefinite_for_tms():
    for r in (0.0, 0.6, 1.4, 2.0):
        D = build_diffusion(SAMPLE, InputNoiseSpec.tms(r, np.pi))
        assert np.linalg.eigvalsh(D).min() >= -1e-12


def test_noise_spec_validation():
    with pytest.raises(ValueError):
        InputNoiseSpec(kind="squeezed")
    with pytest.raises(ValueError):
        InputNoiseSpec.thermal(-0.1, 0.0)
    with pytest.raises(ValueError):
        InputNoiseSpec.tms(-0.5, 0.0)


def test_evolve_isotropic_matches_analytic_solution():
    kappa, d, s0 = 1.0, 1.0, 1.0
    A = -kappa * np.eye(6)
    D = d * np.eye(6)
    times = np.linspace(0.0, 5.0 / kappa, 11)
    traj = evolve(A, D, s0 * np.eye(6), times, max_step=1e-3 / kappa)
    for t, sigma in zip(traj.times, traj.sigmas):
        exact = np.exp(-2 * kappa * t) * s0 + (1 - np.exp(-2 * kappa * t)) * d / (2 * kappa)
        assert np.abs(sigma - exact * np.eye(6)).max() < 1e-10


def test_evolve_homogeneous_decay_is_monotone():
    # bare matrix equation: without diffusion the norm decays to zero, which
    # passes below vacuum, so the physicality guard is off for this check
    A = build_drift(DESK)
    sigma0 = 4.0 * np.eye(6)
    times = np.linspace(0.0, 6.0, 25)
    traj = evolve(A, np.zeros((6, 6)), sigma0, times, enforce_physicality=False)
    norms = [np.linalg.norm(s) for s in traj.sigmas]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(norms, norms[1:]))
    assert norms[-1] < 0.05 * norms[0]


def test_evolve_sensitivity_matches_finite_differences():
    noise = InputNoiseSpec.tms(1.0, np.pi)
    times = np.linspace(1e-8, 1e-6, 10)

    def solve(lam):
        p = dataclasses.replace(SAMPLE, lambda_csl=lam)
        s0, ds0 = initial_state(p)
        return evolve(build_drift(p), build_diffusion(p, noise), s0, times, ds0)

    base = solve(SAMPLE.lambda_csl)
    h = 1e-3 * SAMPLE.lambda_csl
    fd = (solve(SAMPLE.lambda_csl + h).sigmas
          - solve(SAMPLE.lambda_csl - h).sigmas) / (2 * h)
    scale = np.abs(base.sensitivities).max()
    for k in range(len(times)):
        rel = np.abs(base.sensitivities[k] - fd[k]).max() / scale
        assert rel < 1e-5


def test_evolve_rejects_bad_grids_and_states():
    A = -np.eye(2)
    D = np.eye(2)
    with pytest.raises(ValueError):
        evolve(A, D, 0.5 * np.eye(2), np.array([0.0, 0.0, 1.0]))
    with pytest.raises(ValueError):
        evolve(A, D, 0.5 * np.eye(2), np.array([-1.0, 1.0]))
    with pytest.raises(PhysicalityError):
        evolve(A, D, 0.1 * np.eye(2), np.array([1.0]))


def test_evolve_detects_integration_blowup():
    # forcing a huge step makes the fixed-step integrator unstable and the
    # state unphysical; the failure must name the time
    A = build_drift(DESK) * 50.0
    D = build_diffusion(DESK, InputNoiseSpec.thermal(0.0, 0.0))
    with pytest.raises(PhysicalityError, match="t ="):
        evolve(A, D, 0.5 * np.eye(6), np.linspace(0.1, 4.0, 8), max_step=0.09)


def test_evolve_trace_rate_richardson():
    # d(tr sigma)/dt at 0 from two one-step solves matches tr(A s + s A^T + D)
    A = build_drift(DESK)
    D = build_diffusion(DESK, InputNoiseSpec.tms(0.5, np.pi))
    sigma0 = 0.5 * np.eye(6)
    expected = np.trace(A @ sigma0 + sigma0 @ A.T + D)
    h = 1e-3
    tr_h = np.trace(evolve(A, D, sigma0, np.array([h])).sigmas[0])
    tr_h2 = np.trace(evolve(A, D, sigma0, np.array([h / 2])).sigmas[0])
    d_h = (tr_h - np.trace(sigma0)) / h
    d_h2 = (tr_h2 - np.trace(sigma0)) / (h / 2)
    richardson = 2 * d_h2 - d_h
    assert abs(richardson - expected) < 1e-6 * abs(expected)


def test_evolve_fourth_order_convergence():
    A = build_drift(DESK)
    D = build_diffusion(DESK, InputNoiseSpec.thermal(0.3, 0.1))
    sigma0 = 0.5 * np.eye(6)
    times = np.array([1.5])
    ref = evolve(A, D, sigma0, times, max_step=1e-4).sigmas[0]
    err = []
    for h in (0.02, 0.01):
        got = evolve(A, D, sigma0, times, max_step=h).sigmas[0]
        err.append(np.abs(got - ref).max())
    order = np.log2(err[0] / err[1])
    assert 3.5 < order < 4.5


def test_evolve_keeps_states_physical_on_sample_config():
    s0, ds0 = initial_state(SAMPLE)
    times = np.linspace(2e-8, 1.5e-6, 40)
    for noise in (InputNoiseSpec.thermal(0.5, 0.5), InputNoiseSpec.tms(1.0, np.pi)):
        traj = evolve(build_drift(SAMPLE), build_diffusion(SAMPLE, noise),
                      s0, times, ds0)
        for sigma in traj.sigmas:
            assert check_physicality(sigma)


def test_steady_state_scalar_balance():
    kappa, d = 2.0, 3.0
    sigma, sens = steady_state(-kappa * np.eye(6), d * np.eye(6))
    assert np.abs(sigma - d / (2 * kappa) * np.eye(6)).max() < 1e-12
    expected_sens = np.zeros((6, 6))
    expected_sens[1, 1] = 1.0 / (2 * kappa)
    assert np.abs(sens - expected_sens).max() < 1e-12


def test_steady_state_agrees_with_long_time_integration():
    A = build_drift(DESK)
    D = build_diffusion(DESK, InputNoiseSpec.tms(0.7, np.pi))
    sigma, _ = steady_state(A, D)
    slowest = np.abs(np.linalg.eigvals(A).real.max())
    traj = evolve(A, D, 0.5 * np.eye(6), np.array([20.0 / slowest]), max_step=1e-3)
    assert np.abs(traj.sigmas[-1] - sigma).max() < 1e-6


def test_steady_state_residual_normalized():
    A = build_drift(SAMPLE)
    D = build_diffusion(SAMPLE, InputNoiseSpec.tms(1.0, np.pi))
    sigma, sens = steady_state(A, D)
    scale = np.abs(A).max()
    An, Dn = A / scale, D / scale
    assert np.abs(An @ sigma + sigma @ An.T + Dn).max() < 1e-10
    En = lambda_diffusion_derivative(6) / scale
    assert np.abs(An @ sens + sens @ An.T + En).max() < 1e-10


def test_steady_state_sensitivity_independent_of_lambda():
    A = build_drift(SAMPLE)
    _, sens1 = steady_state(A, build_diffusion(SAMPLE, InputNoiseSpec.thermal(0, 0)))
    p2 = dataclasses.replace(SAMPLE, lambda_csl=2e6)
    _, sens2 = steady_state(build_drift(p2),
                            build_diffusion(p2, InputNoiseSpec.thermal(0, 0)))
    assert np.abs(sens1 - sens2).max() < 1e-12 * np.abs(sens1).max()


def test_steady_state_rejects_non_hurwitz():
    A = np.zeros((2, 2))
    A[0, 1] = 1.0
    A[1, 0] = -1.0  # undamped rotation
    with pytest.raises(NonHurwitzError):
        steady_state(A, np.eye(2))


def test_initial_state_ground_state_corner():
    # no coupling, no damping, no thermal or collapse noise: everything vacuum
    p = SystemParams(omega_m=2 * np.pi * 1e6, gamma_m=0.0, kappa=1e7,
                     delta1=0.0, delta2=0.0, g=0.0, temperature=0.0,
                     lambda_csl=0.0)
    sigma0, sens0 = initial_state(p)
    assert np.abs(sigma0 - 0.5 * np.eye(6)).max() < 1e-12
    assert np.all(sens0 == 0.0)


def test_initial_state_cavity2_always_vacuum():
    sigma0, sens0 = initial_state(SAMPLE)
    assert np.abs(sigma0[4:, 4:] - 0.5 * np.eye(2)).max() < 1e-12
    assert np.all(sigma0[4:, :4] == 0.0)
    assert np.all(sens0[4:, :] == 0.0)


def test_initial_state_sensitivity_matches_finite_differences():
    def state(lam):
        return initial_state(dataclasses.replace(SAMPLE, lambda_csl=lam))[0]

    _, sens = initial_state(SAMPLE)
    h = 1e-3 * SAMPLE.lambda_csl
    fd = (state(SAMPLE.lambda_csl + h) - state(SAMPLE.lambda_csl - h)) / (2 * h)
    assert np.abs(fd - sens).max() < 1e-8 * np.abs(sens).max()
    assert check_physicality(initial_state(SAMPLE)[0])


def test_initial_state_unphysical_cold_damped_corner_raises():
    # the Brownian model has zero diffusion at T = 0 but keeps damping, which
    # would settle below vacuum; that must surface as an error, not a state
    p = dataclasses.replace(SAMPLE, temperature=0.0, lambda_csl=0.0, g=0.0)
    with pytest.raises(PhysicalityError):
        initial_state(p)


def test_initial_state_undamped_heated_mechanics_raises():
    p = dataclasses.replace(SAMPLE, gamma_m=0.0, g=0.0, lambda_csl=1e6,
                            temperature=0.0)
    with pytest.raises(NonHurwitzError):
        initial_state(p)
