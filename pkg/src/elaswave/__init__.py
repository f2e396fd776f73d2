"""Spectral laboratory for elastic wave propagation on periodic grids.

The package splits into: the frequency-symbol layer (:mod:`elaswave.symbol`),
torus grids and unitary transforms (:mod:`elaswave.grid`), the grid
propagators (:mod:`elaswave.propagate`), independent reference computations
(:mod:`elaswave.reference`), the sector/cap growth experiments and
positive-direction checks (:mod:`elaswave.experiments`), and a batch CLI
(:mod:`elaswave.cli`).
"""

from .symbol import (
    BlockDecomposition,
    FrequencyPoint,
    LameParams,
    MultiplierSample,
    block_decomposition,
    branch_exponential,
    eigenvalue_diagonal,
    geodesic_rotation,
    half_wave_multiplier,
    lame_symbol_matrix,
    partition_of_unity,
    smooth_step,
    smooth_step_prime,
    symbol_square_root,
)
from .grid import (
    SpectralVectorField,
    TorusGrid,
    VectorField,
    apply_multiplier,
    apply_multiplier_table,
    field_to_csv,
    forward_transform,
    gaussian_bump,
    inverse_transform,
    load_field,
    plane_wave,
    random_band_limited,
    save_field,
    sobolev_norm,
    translate,
)
from .propagate import (
    FLAVORS,
    PropagationRequest,
    TimeStepPrecisionWarning,
    apply_symbol_spectrally,
    cosine_solution,
    half_wave,
    pde_residual,
)
from .reference import (
    PlaneWaveSpec,
    front_radius,
    leapfrog_reference,
    multiplier_via_eigendecomposition,
    plane_wave_exact,
    radial_energy_histogram,
    scalar_half_wave,
    taylor_kickoff,
)
from .experiments import (
    ExperimentReport,
    LineDeviation,
    MaximalNormResult,
    SharpnessConfig,
    SpaceTimeRatios,
    SweepRow,
    block_deviation_bound,
    convergence_along_line,
    critical_time,
    evaluate_solution_at,
    evaluation_convergence,
    fit_loglog,
    frequency_sector_nodes,
    lower_bound_functional,
    maximal_norm_on_cap,
    measure_cap,
    measure_sector,
    phase_bound_max,
    phase_pair,
    ratio_sweep,
    scale_measurements,
    sector_datum_sobolev_norm,
    space_time_norm_check,
    spatial_cap_nodes,
    time_cutoff,
    time_cutoff_prime,
    write_plot_data,
    write_report_csv,
)

__version__ = "0.1.0"
