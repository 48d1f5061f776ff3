"""Multi-photon interferometric lithography: entangled-state deposition
rates, a brute-force Fock-space oracle, and sub-wavelength pattern synthesis
in one and two dimensions."""

from .errors import (
    CutoffExceededError,
    NumericError,
    OptimizationAbort,
    QlithoError,
    StateValidationError,
)
from .states import (
    FixedMTerm,
    ProtoState1D,
    ProtoState2D,
    SuperpositionFixedM,
    SuperpositionFixedN,
    derived_cross_weights,
    noon_state,
    state_from_dict,
    state_to_dict,
    validate,
)
from .fock import (
    FockVector,
    annihilate,
    basis_state,
    build_proto_state,
    create,
    deposition_expectation,
    deposition_matrix_element,
    superposed_mode_annihilate,
    superposition_ket,
    vacuum,
)
from .deposition import (
    diagonal_rate_1d,
    diagonal_rate_2d,
    fixed_m_rate_by_order,
    fixed_m_superposition_rate,
    fixed_n_superposition_rate,
    matrix_element_1d,
    matrix_element_2d,
    noon_rate,
    superposition_2d_rate,
)
from .synth import (
    ApproximationReport,
    FourierProgram,
    TargetPattern1D,
    TargetPattern2D,
    approximation_ok,
    classical_intensity,
    fourier_coefficients,
    fourier_coefficients_2d,
    load_target_csv,
    objective_1d,
    objective_2d,
    penalty_rate,
    periodic_grid,
    program_exposure,
    rayleigh_resolution,
    square_target,
    to_fourier_program,
    trench,
    trench_target,
    truncation_distance,
)
from .optimize import (
    FitResult,
    OptimizerConfig,
    SuperpositionFit,
    decode_1d,
    decode_2d,
    default_config,
    encode_1d,
    encode_2d,
    fit_superposition_1d,
    fit_superposition_2d,
    minimize,
)

__version__ = "0.1.0"
