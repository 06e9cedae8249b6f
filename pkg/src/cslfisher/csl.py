"""Collapse diffusion rate from the fundamental collapse parameters.

The rate fed to the dynamics is
lambda_rate * hbar * alpha / (omega_m * mass * r_c^2), where alpha is the
dimensionless mass-scaling integral over the Fourier transform of the mass
density, weighted by a Gaussian of width 1/r_c.  SI units are carried
explicitly here so the result lands in inverse seconds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .dynamics import HBAR

ATOMIC_MASS_UNIT = 1.66053906660e-27  # kg

#: relative accuracy demanded of the mass-scaling quadrature
_QUAD_RTOL = 1e-6


@dataclass(frozen=True)
class CslParams:
    """Fundamental collapse parameters plus the mechanical context.

    lambda_rate : collapse rate, 1/s
    r_c : correlation (decoherence) length, m
    mass : total mass of the mechanical element, kg
    omega_m : mechanical angular frequency, rad/s
    """

    lambda_rate: float
    r_c: float
    mass: float
    omega_m: float

    def __post_init__(self):
        if self.lambda_rate < 0:
            raise ValueError("lambda_rate must be non-negative")
        for name in ("r_c", "mass", "omega_m"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class MassDensity:
    """Homogeneous test-mass geometry: a sphere (dimension = radius) or a
    cube (dimension = side)."""

    shape: str
    mass: float
    dimension: float

    def __post_init__(self):
        if self.shape not in ("sphere", "cube"):
            raise ValueError(f"shape must be 'sphere' or 'cube', got {self.shape!r}")
        if not self.mass > 0 or not self.dimension > 0:
            raise ValueError("mass and dimension must be strictly positive")

    @property
    def volume(self) -> float:
        if self.shape == "sphere":
            return 4.0 / 3.0 * np.pi * self.dimension ** 3
        return self.dimension ** 3

    @property
    def density(self) -> float:
        return self.mass / self.volume


def sphere_form_factor(x):
    """Normalized Fourier transform of a homogeneous unit-mass sphere,
    3 (sin x - x cos x) / x^3, with a series branch near zero."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 1e-4
    xs = x[small]
    out[small] = 1.0 - xs ** 2 / 10.0 + xs ** 4 / 280.0
    xl = x[~small]
    out[~small] = 3.0 * (np.sin(xl) - xl * np.cos(xl)) / xl ** 3
    return out if out.ndim else float(out)


def _sinc(x):
    """sin(x)/x with the removable singularity filled."""
    return np.sinc(np.asarray(x, dtype=float) / np.pi)


def _quad(fn, lo, hi, what):
    value, err = integrate.quad(fn, lo, hi, epsabs=0.0, epsrel=1e-10, limit=400)
    if err > _QUAD_RTOL * max(abs(value), 1e-300):
        raise ArithmeticError(
            f"{what} quadrature did not converge: achieved {err:.2e} "
            f"against requested {_QUAD_RTOL:g} relative")
    return value


def alpha_factor(density: MassDensity, r_c: float) -> float:
    """Dimensionless mass-scaling factor of the collapse rate.

    The Gaussian-weighted Fourier integral is reduced analytically before
    quadrature: the sphere is isotropic, so the angular average turns it
    into one radial integral; the cube factorizes into three axis
    integrals.  Both reduce to (mass / 1 amu)^2 / 2 in the point-mass
    limit.
    """
    if not r_c > 0:
        raise ValueError("r_c must be strictly positive")
    mass_ratio_sq = (density.mass / ATOMIC_MASS_UNIT) ** 2
    if density.shape == "sphere":
        a = density.dimension / r_c

        def radial(u):
            return u ** 4 * np.exp(-u * u) * sphere_form_factor(a * u) ** 2

        J = _quad(radial, 0.0, 12.0, "sphere mass-scaling")
        return 4.0 / (3.0 * np.sqrt(np.pi)) * mass_ratio_sq * J

    half = density.dimension / (2.0 * r_c)

    def axis_weighted(u):
        return u * u * np.exp(-u * u) * _sinc(half * u) ** 2

    def axis_plain(u):
        return np.exp(-u * u) * _sinc(half * u) ** 2

    J2 = 2.0 * _quad(axis_weighted, 0.0, 12.0, "cube mass-scaling (weighted axis)")
    J0 = 2.0 * _quad(axis_plain, 0.0, 12.0, "cube mass-scaling (plain axis)")
    return mass_ratio_sq / np.pi ** 1.5 * J2 * J0 ** 2


def diffusion_rate_from_alpha(params: CslParams, alpha: float) -> float:
    """Collapse diffusion rate in 1/s from a precomputed alpha."""
    return params.lambda_rate * HBAR * alpha / (
        params.omega_m * params.mass * params.r_c ** 2)


def csl_diffusion_rate(params: CslParams, density: MassDensity) -> float:
    """Collapse diffusion rate in 1/s for the given geometry."""
    if density.mass != params.mass:
        raise ValueError("density mass must equal the collapse-parameter mass")
    return diffusion_rate_from_alpha(params, alpha_factor(density, params.r_c))
