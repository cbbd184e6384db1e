"""Vacuum radiation pressure on a scattering mirror in 1+1 dimensions.

Frequency-domain response (scattering amplitudes, motional susceptibility,
dispersion relations), mechanical impedance with stability and passivity
analysis, and time-domain dynamics with energy bookkeeping.  Internally
the reflectivity scale and the mirror mass are 1; the single physical
knob is the dimensionless coupling tau_omega.
"""

from .analysis import (
    MirrorMechanics,
    Rectangle,
    StabilityReport,
    admittance,
    count_rhp_zeros,
    default_contour,
    default_probes,
    impedance,
    laplace_impedance,
    motional_impedance,
    passivity_check,
    refine_root,
    sample_gamma_real,
    spectral_impedance,
    stability_report,
)
from .dispersion import (
    TimeKernel,
    acceleration_weights,
    build_time_kernel,
    consistency_check,
    continue_upper_half,
    fit_tail_cutoff,
    kk_reconstruct,
)
from .dynamics import (
    EnergyLedger,
    ForceProfile,
    Trajectory,
    energy_ledger,
    fit_runaway_rate,
    simulate_perfect_mirror,
    simulate_with_memory,
)
from .errors import (
    AccuracyError,
    AdmittanceSingularityError,
    BranchCutError,
    ConfigError,
    ContinuationError,
    ContourError,
    CutoffDivergenceError,
    FitError,
    FrequencyRangeError,
    GridMismatchError,
    ImpedancePoleError,
    RegularizationError,
    RootConvergenceError,
    VacMirrorError,
)
from .numerics import QuadratureSettings
from .scattering import (
    MirrorModel,
    UnitSystem,
    load_table,
    lorentzian_mirror,
    perfect_mirror,
    reflectivity,
    save_table,
    tabulated_mirror,
    transmissivity,
    validate_model,
)
from .susceptibility import (
    ResponseCurve,
    SusceptibilityResult,
    alpha,
    beta,
    compute_susceptibility,
    gamma,
    induced_mass,
    lorentzian_gamma,
    reflection_cutoff,
    susceptibility,
)

__version__ = "0.1.0"
