"""Qudit Bloch parametrization and measurement-induced geometric discord."""

__version__ = "0.1.0"

from .discord import (
    DiscordResult,
    FamilySpec,
    OptimizerConfig,
    analytic_d1,
    d1_discord,
    d1_objective,
    d2_discord,
    extract_family_parameter,
    i0_matrix,
    isotropic_state,
    lower_bounds,
    make_family,
    oracle_d1,
    werner_state,
    xi,
)
from .measurement import (
    apply_local_measurement,
    bloch_projector,
    canonical_measurement,
    disturbance,
    measurement_from_unitary,
    q_expansion_family_a,
    q_matrix,
)
from .states import (
    BipartiteState,
    bipartite_compose,
    bipartite_decompose,
    bloch_to_density,
    density_to_bloch,
    is_locally_maximally_mixed,
    partial_trace,
    ppt_min_eigenvalue,
    purity_check,
    radii,
)
from .su_algebra import (
    GellMannBasis,
    StructureTensors,
    adjoint_rep,
    dims_table,
    generate_basis,
    preserves_d_tensor,
    star,
    structure_constants,
    wedge,
)
