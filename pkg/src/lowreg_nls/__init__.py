"""Low-regularity Fourier integrators for the cubic nonlinear Schroedinger
equation on the torus, with Strang splitting and brute-force oracles."""

from .baselines import integrate, plane_wave, reference_solve, step, strang_step
from .experiments import (
    ConservationSeries,
    ConvergenceResult,
    ExperimentConfig,
    energy,
    estimate_order,
    mass,
    random_hr_data,
    run_conservation_study,
    run_convergence_studies,
    run_convergence_study,
)
from .integrators import Method, SchemeParams, j1_1d, j2_1d, kj, step_lowreg_1d, step_lowreg_dd
from .oracles import duhamel_integral_direct, kj_direct
from .spectral import (
    Field,
    NormKind,
    TorusGrid,
    free_propagate,
    from_physical,
    inv_derivative,
    norm,
    phi1_apply,
    to_physical,
    zero_mode_slice,
)

__version__ = "0.1.0"
