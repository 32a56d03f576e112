"""Boolean explanations for fuzzy classifiers via coherence analysis.

A fuzzy function ``f : [0,1]^n -> [0,1]^m`` is coherent at ``x`` under a
projection ``d`` when ``d(f(x)) == d(f(d(x)))``: rounding the inputs
first and the output last agree.  On coherent functions the projected
behaviour is a genuine Boolean function, which this package extracts,
minimizes into DNF, and reports.  Incoherent functions are first made
coherent by one of two repairs (domain extension with control inputs,
or output modification against a coherent fallback).
"""

from .coherence import (
    CoherenceReport,
    ComponentReport,
    SamplingSpec,
    Witness,
    check_coherence,
    coherence_masks,
    default_sampling,
    incoherent_components,
    is_coherent_at,
)
from .core import (
    MAX_TABLE_INPUTS,
    RAW_TOL,
    Affine,
    Compose,
    Condition,
    Const,
    Coord,
    FuzzyExpr,
    LiftedProjection,
    Parallel,
    Piece,
    Piecewise,
    Projection,
    TConorm,
    TNorm,
    TruthTable,
    all_vertices,
    apply_projection,
    compose,
    eval_expr,
    from_dict,
    identity,
    parallel,
    to_dict,
    vertex_index,
)
from .errors import (
    CapacityError,
    CohexpError,
    ContractError,
    SerializationError,
    TrainingError,
    ValidationError,
)
from .experiments import (
    Dataset,
    ExperimentReport,
    ExplanationReport,
    ExtractionResult,
    FormulaScore,
    SplitMetrics,
    canonical_setting,
    default_gamma,
    default_train_config,
    evaluate,
    extract_and_score,
    make_dataset,
    run_experiment,
    write_artifacts,
)
from .functor import (
    MAX_SIMPLIFY_INPUTS,
    DnfFormula,
    FunctorLawReport,
    bool_compose,
    booleanize,
    default_var_names,
    identity_table,
    table_to_dnf,
    verify_functor_law,
)
from .gamma import (
    GAMMA_KINDS,
    ExtendedExpr,
    GammaSpec,
    NoncompDemo,
    OutputModExpr,
    QuotientMorphism,
    apply_gamma,
    demo_noncompositional,
    explain,
    extensionally_equal,
    functor_gamma,
    gamma_extend,
    gamma_output_mod,
    quotient_compose,
    quotient_of,
)
from .nn import (
    MlpExpr,
    MlpModel,
    TrainConfig,
    TrainResult,
    forward,
    gradient_check,
    init_model,
    loss,
    loss_and_grads,
    train,
)
from .serialize import load_expr, load_json, save_expr, save_json

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "CohexpError",
    "ValidationError",
    "CapacityError",
    "SerializationError",
    "ContractError",
    "TrainingError",
    # core
    "RAW_TOL",
    "MAX_TABLE_INPUTS",
    "Projection",
    "FuzzyExpr",
    "Const",
    "Coord",
    "TNorm",
    "TConorm",
    "Affine",
    "LiftedProjection",
    "Compose",
    "Parallel",
    "Condition",
    "Piece",
    "Piecewise",
    "TruthTable",
    "all_vertices",
    "vertex_index",
    "identity",
    "eval_expr",
    "apply_projection",
    "compose",
    "parallel",
    "to_dict",
    "from_dict",
    # coherence
    "SamplingSpec",
    "Witness",
    "ComponentReport",
    "CoherenceReport",
    "default_sampling",
    "coherence_masks",
    "is_coherent_at",
    "check_coherence",
    "incoherent_components",
    # functor
    "MAX_SIMPLIFY_INPUTS",
    "DnfFormula",
    "FunctorLawReport",
    "default_var_names",
    "booleanize",
    "identity_table",
    "bool_compose",
    "verify_functor_law",
    "table_to_dnf",
    # gamma
    "GAMMA_KINDS",
    "GammaSpec",
    "ExtendedExpr",
    "OutputModExpr",
    "gamma_extend",
    "gamma_output_mod",
    "apply_gamma",
    "QuotientMorphism",
    "quotient_of",
    "quotient_compose",
    "functor_gamma",
    "extensionally_equal",
    "explain",
    "NoncompDemo",
    "demo_noncompositional",
    # nn
    "MlpModel",
    "MlpExpr",
    "TrainConfig",
    "TrainResult",
    "init_model",
    "forward",
    "loss",
    "loss_and_grads",
    "gradient_check",
    "train",
    # experiments
    "Dataset",
    "SplitMetrics",
    "FormulaScore",
    "ExplanationReport",
    "ExtractionResult",
    "ExperimentReport",
    "canonical_setting",
    "make_dataset",
    "evaluate",
    "extract_and_score",
    "default_train_config",
    "default_gamma",
    "run_experiment",
    "write_artifacts",
    # serialization
    "load_json",
    "save_json",
    "load_expr",
    "save_expr",
]
