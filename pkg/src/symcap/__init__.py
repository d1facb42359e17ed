"""Numerical estimation of symplectic capacities and curve-length bounds
for convex bodies: gauges and polars, the Clarke dual action minimization,
loop symmetrization operators, boundary girth search, and characteristic
flow integration."""

from .capacity import (
    CapacityResult,
    OptimizerConfig,
    c_j,
    clarke_edge_norm,
    clarke_functional,
    clarke_minimize,
    ellipsoid_ehz_exact,
)
from .characteristics import (
    Trajectory,
    closed_orbit_action,
    ellipsoid_flow_states,
    export_trajectory,
    integrate_characteristic,
)
from .errors import (
    BodyNotSymmetric,
    BodyNotSymmetricUnderW,
    CalibrationError,
    DegenerateLoop,
    DimensionMismatch,
    GradientUndefinedAtZero,
    GraphDisconnected,
    LoopNotOnBoundary,
    LoopNotSymmetric,
    NonConvexParameters,
    NotSmoothBody,
    OptimizerDidNotConverge,
    OrbitNotClosed,
    OriginNotInterior,
    SpecParseError,
    StepUnstable,
    SymcapError,
    TooFewVertices,
    ZeroAction,
    ZeroActionStart,
)
from .geometry import (
    ConvexBody,
    Ellipsoid,
    LpBall,
    Polytope,
    ball,
    body_from_dict,
    body_from_json_file,
    body_to_dict,
    cross_polytope,
    cube,
    lp_ball,
)
from .girth import (
    BoundaryGraph,
    build_boundary_graph,
    check_schaffer_bound,
    schaffer_bound,
    shortest_antipodal_path,
    symmetric_girth,
)
from .loops import (
    ContainmentDetails,
    DiscreteLoop,
    action,
    containment_score,
    export_loop_metrics,
    gauge_length,
    resample_by_gauge_arclength,
    split_at_half_length,
)
from .symmetry import (
    SymmetrizationOutcome,
    symmetrize_central,
    symmetrize_mfold,
)
from .symplectic import SymplecticFrame, alpha_m
from .verify import VerificationRecord, run_verify

__version__ = "0.1.0"

__all__ = [
    "BodyNotSymmetric",
    "BodyNotSymmetricUnderW",
    "BoundaryGraph",
    "CalibrationError",
    "CapacityResult",
    "ContainmentDetails",
    "ConvexBody",
    "DegenerateLoop",
    "DimensionMismatch",
    "DiscreteLoop",
    "Ellipsoid",
    "GradientUndefinedAtZero",
    "GraphDisconnected",
    "LoopNotOnBoundary",
    "LoopNotSymmetric",
    "LpBall",
    "NonConvexParameters",
    "NotSmoothBody",
    "OptimizerConfig",
    "OptimizerDidNotConverge",
    "OrbitNotClosed",
    "OriginNotInterior",
    "Polytope",
    "SpecParseError",
    "StepUnstable",
    "SymcapError",
    "SymmetrizationOutcome",
    "SymplecticFrame",
    "Trajectory",
    "TooFewVertices",
    "VerificationRecord",
    "ZeroAction",
    "ZeroActionStart",
    "action",
    "alpha_m",
    "ball",
    "body_from_dict",
    "body_from_json_file",
    "body_to_dict",
    "build_boundary_graph",
    "c_j",
    "check_schaffer_bound",
    "clarke_edge_norm",
    "clarke_functional",
    "clarke_minimize",
    "closed_orbit_action",
    "containment_score",
    "cross_polytope",
    "cube",
    "ellipsoid_ehz_exact",
    "ellipsoid_flow_states",
    "export_loop_metrics",
    "export_trajectory",
    "gauge_length",
    "integrate_characteristic",
    "lp_ball",
    "resample_by_gauge_arclength",
    "run_verify",
    "schaffer_bound",
    "shortest_antipodal_path",
    "split_at_half_length",
    "symmetric_girth",
    "symmetrize_central",
    "symmetrize_mfold",
]
