"""Forward Dirichlet solver for the 2-D electrical impedance equation.

Solutions of div(sigma grad u) = 0 on star-shaped plane domains are fitted
at the boundary with an orthonormalized basis built from the real parts of
Bers formal powers of the Vekua equation attached to the conductivity.
"""

from .boundary_solver import (
    BoundaryBasis,
    IllConditionedSystemError,
    RankDeficiencyError,
    SolveReport,
    boundary_traces,
    collocation_fit,
    evaluate_interior,
    orthonormalize,
    scaled_boundary_condition,
    total_error,
)
from .conductivity import (
    ConductivityError,
    ConductivityField,
    GeneratingSequence,
    StripInterpolation,
    build_strip_interpolation,
    builtin_case,
    field_from_csv,
    generating_sequence,
    geometric_case,
)
from .formal_powers import (
    FormalPowerTable,
    QuadratureConfig,
    asymptotics_check,
    build_formal_powers,
    dump_table_csv,
    fg_antiderivative,
    stencil_from_callable,
    stencil_from_table,
    vekua_residual,
)
from .geometry import (
    AngleSet,
    RadialGrid,
    StarDomain,
    arc_length_weights,
    beaked_domain,
    build_angle_set,
    build_radial_grid,
    make_domain,
    star_domain_from_json,
    unit_disk,
)
from .experiments import (
    CASES,
    TABLES,
    ExperimentConfig,
    OracleResult,
    TableRow,
    run_beaked_suite,
    run_case,
    run_oracles,
    run_table,
)

__version__ = "0.1.0"
