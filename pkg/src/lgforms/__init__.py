"""Desk-scale machinery for lattice interacting systems: conserved
quantities, configuration-space form calculus, spectral gaps, verified
inequality constants, and decomposition of shift-invariant closed forms."""

from .configspace import (
    Configuration,
    TransitionGraph,
    apply_edge,
    apply_move,
    conserved_vector,
    exchange,
    find_path,
    irreducibly_quantified_check,
    is_class_measurable,
)
from .errors import (
    BudgetExceededError,
    DegenerateDenominatorError,
    IllConditionedError,
    InvalidQueryError,
    LgformsError,
    NotClosedError,
)
from .forms import (
    Form,
    Potential,
    boundary_differential,
    differential,
    is_closed,
    project_form,
    solve_potential,
    sp_norm,
)
from .interaction import (
    ConsvBasis,
    InteractionTable,
    StateSpace,
    conserved_basis,
    gep,
    identity_interaction,
    is_simple,
    load_interaction,
    sep,
    validate_interaction,
)
from .locales import (
    LatticeBox,
    Locale,
    boundary,
    box,
    complete,
    counting_report,
    cycle,
    grid,
    orbit_edge_counts,
    path,
    perimeter,
    tempered_ratio,
)
from .measure import (
    ExpansionPieces,
    Rate,
    SiteMeasure,
    c_phi_nu,
    canonical_rate,
    conditional_expectation,
    expand_base,
    expand_mu,
    geometric_measure,
    is_reversible,
    mu_norm,
    rate_bounds,
    renormalize,
    renormalize_inverse,
    trivial_rate,
    uniform_measure,
    weighted_norm,
)
from .spectral import (
    GapReport,
    InequalityReport,
    estimate_ctilde,
    spectral_gap,
    uniform_gap_scan,
    verify_boundary_estimate,
    verify_dagger_bound,
    verify_mpl,
    verify_sigma_gap_bound,
)
from .tables import FunctionTable
from .varadhan import (
    DecompositionResult,
    ShiftInvariantForm,
    current_form,
    decompose,
    delta_map,
    gamma_differential,
    is_closed_shift_invariant,
    locality_probe,
    project_to_box,
    psi_sequence,
    synthesize_form,
)

__version__ = "0.1.0"
