"""Normalized solutions of a gauged planar Schrödinger equation.

Numerical companion to the variational analysis of

    -Delta u + lambda u + gauge coupling = (e^{u^2} - 1) u + g(|x|)

posed on radial functions in the plane with a prescribed L^2 mass: sharp
constants and mass thresholds, a projected-gradient local minimizer on
the mass sphere, concentration-path diagnostics and a string-method
saddle search, and a corpus-based checker for every standalone
inequality the analysis uses.
"""

from .errors import (
    AdmissibilityError,
    InvalidArgumentError,
    MagnitudeOverflowError,
    NumericFailureError,
    OutOfRegimeError,
    ReparameterizationFailureError,
    TruncationWarning,
)
from .radial_core import (
    RadialFunction,
    RadialGrid,
    build_grid,
    dilate_mass_preserving,
    gauge_dilate,
    load_csv,
    moser,
    moser_exact_integrals,
    norms,
    save_csv,
)
from .functionals import (
    EnergyBreakdown,
    PohozaevValue,
    chern_simons,
    cumulative_charge,
    energy,
    energy_and_gradient,
    exp_integrals,
    gradient,
    multiplier,
    pohozaev,
)
from .perturbation import (
    AssumptionReport,
    Perturbation,
    check_assumptions,
    example_g,
    load_perturbation_csv,
    save_perturbation_csv,
)
from .constants import (
    ConstantsReport,
    GNReport,
    gn_sharp_constant,
    h_tilde,
    kappa_lower_bound,
    s_crit,
    s_zero,
    thresholds,
    zeta,
    zeta_weighted,
)
from .minimizer import (
    DilationProfile,
    SolverOptions,
    SolverReport,
    dilation_profile,
    minimize_local,
    seed_function,
    seed_profile,
)
from .mountain_pass import (
    PathEnergyProfile,
    PathState,
    StringOptions,
    StringReport,
    build_initial_path,
    extended_energy,
    moser_exp_integral,
    moser_superposition,
    path_energy_profile,
    psi_n,
    string_method,
    superposition_kinetic_prediction,
)
from .inequality_suite import (
    CorpusSpec,
    InequalityRecord,
    SuiteReport,
    boundary_probe,
    generate_corpus,
    verify_corpus,
    verify_lemma32_chain,
)

__version__ = "1.0.0"
