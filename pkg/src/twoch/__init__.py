"""Global conservative solutions of the two-component Camassa-Holm system,
computed through a Lagrangian reformulation."""

from twoch.diagnostics import (
    energy_lagrangian,
    invariant_residuals,
    pq_identity_defects,
    regularity_monitor,
    sup_distance,
)
from twoch.dynamics import assemble_PQ, chi_eval, evolve, g_eval, rhs_eval, rk4_step
from twoch.maps import (
    apply_relabeling,
    check_relabeling,
    d_distance,
    from_lagrangian,
    gamma_relabel,
    label_grid,
    to_lagrangian,
)
from twoch.state import (
    EulerianState,
    GridSpec,
    LagrangianState,
    RadonMeasure,
    RelabelingMap,
    canonicalize,
    validate_eulerian,
)

__all__ = [
    "EulerianState", "GridSpec", "LagrangianState", "RadonMeasure", "RelabelingMap",
    "apply_relabeling", "assemble_PQ", "canonicalize", "check_relabeling", "chi_eval",
    "d_distance", "energy_lagrangian", "evolve", "from_lagrangian", "g_eval",
    "gamma_relabel", "invariant_residuals", "label_grid", "pq_identity_defects",
    "regularity_monitor", "rhs_eval", "rk4_step", "sup_distance", "to_lagrangian",
    "validate_eulerian",
]
