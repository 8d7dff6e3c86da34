"""Numerical laboratory for semiclassical spectral bounds on rasterized
domains: regularized geometry functionals, discrete Laplace and Landau
operators, Riesz means against their phase-space main terms, exact
finite-dimensional remainder identities, and uncertainty-principle mass
diagnostics."""

from .errors import BoundViolation, ConfigError, NumericalFailure
from .geometry import (
    GridDomain,
    ThicknessCertificate,
    complement_within_box,
    inradius,
    load_mask,
    make_shape,
    measure,
    regularized_inradius,
    save_mask,
    thickness_check,
    width,
    width_domination_constant,
)
from .operators import (
    BC_DIRICHLET,
    BC_NEUMANN,
    DiscreteOperator,
    LandauParams,
    Spectrum,
    covering_spectrum,
    dispersion_validity_cap,
    eigensolve,
    landau_hamiltonian,
    landau_levels,
    laplacian,
    save_spectrum_csv,
    torus_modes,
)
from .semiclassics import (
    BoundReport,
    ImprovementFit,
    RieszQuery,
    aizenman_lieb_lift,
    bound_report,
    fit_improvement_constants,
    g_function,
    main_term,
    riesz_mean,
    semiclassical_constant,
    write_fit_json,
    write_report_csv,
)
from .traces import (
    TracePairInstance,
    bly_kroger_finite,
    cross_term_cancellation,
    random_instance,
    run_verification_suite,
    verify_dirichlet_identity,
    verify_neumann_identity,
)
from .uncertainty import (
    ExtendedFunction,
    SpectralMass,
    high_energy_mass,
    landau_high_energy_mass,
    landau_kernel,
    landau_level_mass,
    landau_level_masses,
    landau_projection_apply,
    landau_truncation_radius,
    projection_lemma_check,
    remainders_free,
    zero_extend,
)

__version__ = "0.1.0"

__all__ = [
    "BoundViolation",
    "ConfigError",
    "NumericalFailure",
    "GridDomain",
    "ThicknessCertificate",
    "complement_within_box",
    "inradius",
    "load_mask",
    "make_shape",
    "measure",
    "regularized_inradius",
    "save_mask",
    "thickness_check",
    "width",
    "width_domination_constant",
    "BC_DIRICHLET",
    "BC_NEUMANN",
    "DiscreteOperator",
    "LandauParams",
    "Spectrum",
    "covering_spectrum",
    "dispersion_validity_cap",
    "eigensolve",
    "landau_hamiltonian",
    "landau_levels",
    "laplacian",
    "save_spectrum_csv",
    "torus_modes",
    "BoundReport",
    "ImprovementFit",
    "RieszQuery",
    "aizenman_lieb_lift",
    "bound_report",
    "fit_improvement_constants",
    "g_function",
    "main_term",
    "riesz_mean",
    "semiclassical_constant",
    "write_fit_json",
    "write_report_csv",
    "TracePairInstance",
    "bly_kroger_finite",
    "cross_term_cancellation",
    "random_instance",
    "run_verification_suite",
    "verify_dirichlet_identity",
    "verify_neumann_identity",
    "ExtendedFunction",
    "SpectralMass",
    "high_energy_mass",
    "landau_high_energy_mass",
    "landau_kernel",
    "landau_level_mass",
    "landau_level_masses",
    "landau_projection_apply",
    "landau_truncation_radius",
    "projection_lemma_check",
    "remainders_free",
    "zero_extend",
    "__version__",
]
