"""Ground states of two-component Hartree/Choquard systems.

A numerical library plus CLI: parameter classification (existence,
regularity regions, decay laws), free-space Riesz convolution, constrained
Sobolev-gradient descent to the ground state, and quantitative diagnostics
(Pohozaev residual, radial symmetry, tail fits, convolution-inequality
audits).
"""

from .params import (
    DecayCase,
    ExistenceClass,
    ProblemParams,
    RegularityRegion,
    ThetaInterval,
    check_h1,
    classify_existence,
    classify_regularity,
    decay_case,
    theta_interval,
)
from .grid import (
    Field,
    GridSpec,
    RadialProfile,
    dirichlet_energy,
    h1_norm_sq,
    integrate,
    lp_norm,
    radial_profile,
    read_field,
    resample,
    write_field,
)
from .riesz import (
    RieszPlan,
    get_plan,
    kernel_value,
    riesz_apply,
    riesz_constant,
    riesz_direct,
)
from .functional import (
    EnergyBreakdown,
    StatePair,
    energy,
    euler_residual,
    interaction,
    nehari_scale,
    project_nehari,
)
from .rearrange import HalfSpace, polarize, riesz_rearrangement_check, schwarz
from .solver import (
    GaussianInit,
    NonexistenceRefusedError,
    RandomInit,
    SolveConfig,
    SolveReport,
    initialize,
    solve,
)
from .diagnostics import (
    DecayFit,
    fit_decay,
    hls_audit,
    pohozaev_residual,
    symmetry_deviation,
)

__all__ = [
    "DecayCase",
    "DecayFit",
    "EnergyBreakdown",
    "ExistenceClass",
    "Field",
    "GaussianInit",
    "GridSpec",
    "HalfSpace",
    "NonexistenceRefusedError",
    "ProblemParams",
    "RadialProfile",
    "RandomInit",
    "RegularityRegion",
    "RieszPlan",
    "SolveConfig",
    "SolveReport",
    "StatePair",
    "ThetaInterval",
    "check_h1",
    "classify_existence",
    "classify_regularity",
    "decay_case",
    "dirichlet_energy",
    "energy",
    "euler_residual",
    "fit_decay",
    "get_plan",
    "h1_norm_sq",
    "hls_audit",
    "initialize",
    "integrate",
    "interaction",
    "kernel_value",
    "lp_norm",
    "nehari_scale",
    "pohozaev_residual",
    "polarize",
    "project_nehari",
    "radial_profile",
    "read_field",
    "resample",
    "riesz_apply",
    "riesz_constant",
    "riesz_direct",
    "riesz_rearrangement_check",
    "schwarz",
    "solve",
    "symmetry_deviation",
    "theta_interval",
    "write_field",
]

__version__ = "0.1.0"
