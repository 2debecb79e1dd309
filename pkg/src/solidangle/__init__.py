"""Successive minima, normalized minimal bases and solid-angle bounds for rank-3 lattices."""
from .bounds import (
    CUBE_OMEGA,
    FCC_OMEGA,
    FCC_STERADIANS,
    BoundReport,
    Branch,
    NuParam,
    bound_reduced,
    classify_and_bound,
    lower_bound_non_wr,
    nu_param,
    theta23_kbound,
    wr_condition,
)
from .errors import *  # noqa: F401,F403
from .harness import (
    LatticeModel,
    ModelKind,
    ScanDomain,
    ScanId,
    VerificationReport,
    all_minimal_triples,
    gen_lattice,
    scan_monotonicity,
    verify_sp_area,
    verify_theorem_main3,
)
from .lattice import (
    BasisMatrix,
    GramMatrix,
    MinimalVectorSet,
    SuccessiveMinima,
    enumerate_short_vectors,
    gram_from_basis,
    is_well_rounded,
    minimal_vector_set,
    successive_minima,
)
from .reduction import (
    MinimaRatios,
    ReducedBasis,
    VertexAngles,
    check_pairwise_angle_bounds,
    minima_ratios,
    normalize_minimal_basis,
    vertex_angles,
)
from .solid import (
    SolidAngle,
    lhuilier_solid_angle,
    monte_carlo_solid_angle,
    oosterom_solid_angle,
    spherical_triangle_area,
)

__version__ = "0.1.0"
