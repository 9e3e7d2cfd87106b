"""Exact-arithmetic pipeline for L_p Lebesgue constants of convex lattice
polytopes on the d-torus: Fourier-Motzkin elimination into nested summation
systems, closed-form Dirichlet-type kernel evaluation, tensor-grid
quadrature, and scaling studies of the known growth laws.
"""

__version__ = "0.1.0"

from .errors import (
    BudgetExceeded,
    DegeneratePolytope,
    DimensionTooLarge,
    EmptySet,
    InsufficientData,
    LebconstError,
    MissingInscribedBox,
    PolytopeFormatError,
    SingularArgument,
    UnboundedPolytope,
)
from .geometry import (
    HalfSpace,
    HRep,
    LatticePointSet,
    Simplex,
    VRep,
    as_hrep,
    bounding_box,
    hrep_from_vrep,
    is_empty,
    lattice_points,
    load_hrep,
    load_polytope,
    parse_polytope,
    triangulate,
    vrep_from_hrep,
)
from .fmelim import (
    FLOOR_CLOSED,
    HALF_OPEN,
    AffineBound,
    NestedSystem,
    SignedPrefixForm,
    eliminate,
    form_degree_bounds,
    form_lattice_points,
    nested_count,
    nested_lattice_points,
    signed_point_counts,
    to_signed_prefix_forms,
)
from .kernel import (
    EPS_SING,
    FormKernel,
    degrees,
    eval_direct,
    eval_f,
    eval_forms,
    eval_g,
    eval_nested,
    s_t,
    split_applicable,
)
from .quadrature import (
    NormEstimate,
    PointwiseEvaluator,
    QuadratureConfig,
    l2_exact,
    torus_lp_norm,
)
from .experiments import (
    FAMILY_KINDS,
    FIT_MODELS,
    FamilyMember,
    FamilySpec,
    FitResult,
    MeasurementRecord,
    RatioRow,
    RatioTable,
    bound_ratios,
    fit_log_model,
    hardy_lower_bound,
    lebesgue_constant,
    random_hrep,
    read_records,
    scale_study,
    write_records,
)

__all__ = [name for name in dir() if not name.startswith("_")]
