"""Numerical laboratory for ground states of rotating 2D Bose-Einstein
condensates: spectral energy minimization under a unit-mass constraint,
critical constants from the Townes profile, vortex-lattice trial states
and vortex-freeness diagnostics."""

__version__ = "0.1.0"

from .fields import (
    ComplexField,
    Grid2D,
    RealField,
    angular_derivative,
    angular_momentum,
    boundary_mass_fraction,
    inner_product,
    l2_norm,
    laplacian,
    load_gpf1,
    normalize,
    quartic_integral,
    save_gpf1,
    spectral_gradient,
)
from .model import (
    EnergyBreakdown,
    GPParams,
    Trap,
    WSpec,
    check_diamagnetic,
    chemical_potential,
    covariant_energy,
    covariant_kinetic,
    critical_velocity,
    energy,
    l2_gradient,
)
from .townes import (
    RadialProfile,
    TownesConstants,
    critical_mass,
    gn_sharpness_check,
    profile_on_grid,
    relax_townes_2d,
    solve_townes,
)
from .flow import (
    GroundStateResult,
    SolverOptions,
    continuation_sweep,
    gaussian_initial,
    minimize,
    multistart_uniqueness_probe,
    random_phase_initial,
    vortex_initial,
)
from .trial import (
    HexLattice,
    TrialReport,
    certify_upper_bound,
    gaussian_state,
    lattice_state,
    translate_magnetic,
    translated_lattice_state,
)
from .diagnostics import (
    Decomposition,
    LinearizedOps,
    PhaseAlignment,
    VortexReport,
    align_phase,
    contour_winding,
    decay_fit,
    decompose,
    residual_coupled_system,
    vortex_scan,
)
