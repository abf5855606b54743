"""Metrization of cone metric spaces.

``d(x, y) = inf{||u|| : D(x, y) <= u}`` turns a cone metric ``D`` into an
ordinary metric with the same convergent sequences.  The package computes
``d`` numerically for cones in R^n, validates cone metrics, checks that
contractive conditions carry over from ``D`` to ``d``, and runs fixed-point
iterations measured with ``d``.
"""

__version__ = "0.1.0"

from .cone import (  # noqa: E402
    Cone,
    ConeReport,
    Generators,
    Halfspaces,
    NormSpec,
    OrderedVectorSpace,
    Orthant,
    ProjectionError,
    SecondOrder,
    cone_contains,
    dual_contains,
    estimate_normality_constant,
    interior_contains,
    leq,
    project_onto_cone,
    strictly_less,
    validate_cone,
)
from .fixpoint import IterationTrace, banach_iterate, verify_rate_bounds  # noqa: E402
from .metrics import (  # noqa: E402
    ConeMetric,
    DiscreteConeMetric,
    FiniteTableConeMetric,
    GeometricLqConeMetric,
    ProductConeMetric,
    closed_form_d,
    random_cone_metric_table,
    truncation_tail_bound,
    validate_cone_metric,
)
from .metrize import (  # noqa: E402
    MetrizationResult,
    check_convergence_equivalence,
    check_metric_axioms,
    distance_matrix,
    equivalent_metric,
    metrize_vector,
)
from .transfer import (  # noqa: E402
    Banach,
    BoundedConeMap,
    CallableConeMap,
    Chatterjea,
    Dominance,
    FiveCoefficient,
    HalfBetaMax5,
    HardyRogersSym,
    IteratedPower,
    Kannan,
    LinearMatrix,
    QuasiMax5,
    QuasiMax5Half,
    ScalarOnRplus,
    TransferReport,
    TwoTerm,
    ZamfirescuMax3,
    check_corollary,
    check_dominance_transfer,
    check_phi_transfer,
    eval_condition_cone,
    eval_condition_scalar,
    parse_condition,
    phi_operator_norm,
    psi_from_phi,
)

__all__ = [
    "__version__",
    "IterationTrace",
    "banach_iterate",
    "verify_rate_bounds",
    "Cone",
    "ConeReport",
    "Generators",
    "Halfspaces",
    "NormSpec",
    "OrderedVectorSpace",
    "Orthant",
    "ProjectionError",
    "SecondOrder",
    "cone_contains",
    "dual_contains",
    "estimate_normality_constant",
    "interior_contains",
    "leq",
    "project_onto_cone",
    "strictly_less",
    "validate_cone",
    "ConeMetric",
    "DiscreteConeMetric",
    "FiniteTableConeMetric",
    "GeometricLqConeMetric",
    "ProductConeMetric",
    "closed_form_d",
    "random_cone_metric_table",
    "truncation_tail_bound",
    "validate_cone_metric",
    "MetrizationResult",
    "check_convergence_equivalence",
    "check_metric_axioms",
    "distance_matrix",
    "equivalent_metric",
    "metrize_vector",
    "Banach",
    "BoundedConeMap",
    "CallableConeMap",
    "Chatterjea",
    "Dominance",
    "FiveCoefficient",
    "HalfBetaMax5",
    "HardyRogersSym",
    "IteratedPower",
    "Kannan",
    "LinearMatrix",
    "QuasiMax5",
    "QuasiMax5Half",
    "ScalarOnRplus",
    "TransferReport",
    "TwoTerm",
    "ZamfirescuMax3",
    "check_corollary",
    "check_dominance_transfer",
    "check_phi_transfer",
    "eval_condition_cone",
    "eval_condition_scalar",
    "parse_condition",
    "phi_operator_norm",
    "psi_from_phi",
]
