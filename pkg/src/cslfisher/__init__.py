"""Fisher-information precision limits for estimating the collapse
diffusion rate of a mechanical mode monitored through two optical cavities.
"""

__version__ = "0.1.0"

from .csl import CslParams, MassDensity, alpha_factor, csl_diffusion_rate
from .dynamics import (
    InputNoiseSpec,
    NonHurwitzError,
    SystemParams,
    Trajectory,
    build_diffusion,
    build_drift,
    evolve,
    initial_state,
    steady_state,
)
from .estimation import (
    FisherResult,
    MeasurementSpec,
    PureStateSingularity,
    classical_fisher,
    measurement_covariance,
    point_fisher,
    quantum_fisher,
    strategy_fisher,
)
from .fock import qfi_oracle_fock
from .gaussian import (
    Mode,
    PhysicalityError,
    apply_symplectic,
    beam_splitter_transform,
    check_physicality,
    extract_mode,
    is_symplectic,
    symplectic_form,
)

__all__ = [
    "CslParams", "MassDensity", "alpha_factor", "csl_diffusion_rate",
    "InputNoiseSpec", "NonHurwitzError", "SystemParams", "Trajectory",
    "build_diffusion", "build_drift", "evolve", "initial_state", "steady_state",
    "FisherResult", "MeasurementSpec", "PureStateSingularity",
    "classical_fisher", "measurement_covariance", "point_fisher",
    "quantum_fisher", "strategy_fisher", "qfi_oracle_fock",
    "Mode", "PhysicalityError", "apply_symplectic", "beam_splitter_transform",
    "check_physicality", "extract_mode", "is_symplectic", "symplectic_form",
    "__version__",
]
