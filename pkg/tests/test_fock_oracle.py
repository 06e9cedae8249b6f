import numpy as np
import pytest

from cslfisher.estimation import quantum_fisher
from cslfisher.fock import gaussian_density_matrix, qfi_oracle_fock, root_fidelity

from conftest import random_physical_sigma


def geometric_fisher_information(nbar, terms=4000):
    """Classical Fisher information of the thermal photon-number
    distribution with respect to its mean, summed numerically in log space."""
    k = np.arange(terms)
    log_deriv = k / nbar - (k + 1) / (1 + nbar)
    log_p = k * np.log(nbar) - (k + 1) * np.log1p(nbar)
    return float(np.sum(np.exp(log_p) * log_deriv ** 2))


def test_geometric_distribution_fisher_matches_closed_form():
    for nbar in (0.4, 1.0, 2.5):
        assert np.isclose(geometric_fisher_information(nbar),
                          1.0 / (nbar * (nbar + 1)), rtol=1e-10)


def test_oracle_unit_case():
    got = qfi_oracle_fock(np.eye(2), np.eye(2), cutoff=60)
    assert abs(got - 4.0 / 3.0) < 1e-3


def test_oracle_thermal_matches_number_statistics():
    # varying the occupation of a thermal state: the quantum information
    # equals the number-distribution information
    for nbar, dn in ((0.7, 1.0), (1.8, 0.5)):
        sigma = (nbar + 0.5) * np.eye(2)
        analytic = dn ** 2 * geometric_fisher_information(nbar)
        got = qfi_oracle_fock(sigma, dn * np.eye(2))
        assert abs(got - analytic) / analytic < 1e-3


def test_oracle_zero_sensitivity():
    assert abs(qfi_oracle_fock(1.3 * np.eye(2), np.zeros((2, 2)))) < 1e-6


def test_oracle_agrees_with_closed_form_on_random_states(rng):
    for _ in range(6):
        sigma = random_physical_sigma(rng, 1, max_squeeze=0.5, max_thermal=1.5)
        sens = rng.normal(0.0, 0.4, (2, 2))
        sens = 0.5 * (sens + sens.T)
        closed = quantum_fisher(sigma, sens)
        oracle = qfi_oracle_fock(sigma, sens)
        assert abs(closed - oracle) / max(abs(closed), 1e-12) < 1e-3


def test_oracle_rejects_small_cutoff():
    with pytest.raises(ValueError):
        qfi_oracle_fock(np.eye(2), np.eye(2), cutoff=30)


def test_oracle_reports_unreachable_cutoff():
    hot = 30.5 * np.eye(2)  # needs far more than 60 number states
    with pytest.raises(ArithmeticError):
        qfi_oracle_fock(hot, np.eye(2), cutoff=40, max_cutoff=60)


def test_density_matrix_reproduces_covariance(rng):
    from cslfisher.fock import quadrature_operators

    x, p = quadrature_operators(80)
    ops = (x, p)
    for _ in range(4):
        sigma = random_physical_sigma(rng, 1, max_squeeze=0.5, max_thermal=1.5)
        rho = gaussian_density_matrix(sigma, 80)
        assert np.isclose(np.trace(rho).real, 1.0, atol=1e-12)
        rec = np.array([[np.trace(rho @ (a @ b + b @ a)).real / 2 for b in ops]
                        for a in ops])
        # matches the construction contract: truncation-tail limited
        assert np.abs(rec - sigma).max() < 1e-6 * max(1.0, np.abs(sigma).max())


def test_root_fidelity_properties(rng):
    rho = gaussian_density_matrix(1.2 * np.eye(2), 60)
    assert abs(root_fidelity(rho, rho) - 1.0) < 1e-10
    other = gaussian_density_matrix(np.diag([1.7, 0.9]), 60)
    f = root_fidelity(rho, other)
    assert 0.0 < f < 1.0
    assert abs(f - root_fidelity(other, rho)) < 1e-10
