"""Engagement-optimal article targeting under fair-exposure constraints.

Models how two articles spread through a population split into two
affiliation groups with homophilic sharing, solves the platform's
targeting problem with and without fairness constraints, and validates
the closed-form answers with Monte Carlo and network simulation.
"""

from .errors import (
    DegenerateDenominator,
    DegenerateSample,
    EmptyCandidateSet,
    FairshareError,
    InfeasibleHomophily,
    InfeasibleProblem,
    NearDefectiveMatrix,
    NoEvents,
    UnknownPreset,
    ZeroDenominator,
    ZeroPsi,
    ZFormSingular,
)
from .fairness import (
    ConstraintGeometry,
    FairnessBounds,
    constant_fair_exposure_check,
    constraint_geometry,
    exposure_ratios,
    intergroup_dominance_condition,
    max_average_exposure,
)
from .graphs import SocialGraph, generate_synthetic_graph, graph_from_edges
from .model import (
    Article,
    Group,
    ModelParams,
    PreferenceSpec,
    Targeting,
    click_fraction,
    compute_psi,
    params_from_preferences,
)
from .optimizer import (
    FairSolution,
    check_feasible,
    check_feasible_geometric,
    enumerate_vertices,
    grid_feasible,
    grid_solve,
    price_of_fairness,
    solve_agnostic,
    solve_agnostic_zform,
    solve_fair,
)
from .presets import PRESET_NAMES, preset
from .propagation import (
    ExposureSeries,
    MassTrajectory,
    PropagationCoefficients,
    coefficients,
    coefficients_closed_form,
    coefficients_recursive,
    exposure_series,
    objective_coefficients,
    propagate_recursive,
    total_mass,
)
from .simulate import (
    SimConfig,
    SimResult,
    disparity_metrics,
    empirical_pof,
    resolve_policy,
    simulate_graph,
    simulate_mass_model,
)

__version__ = "0.1.0"
