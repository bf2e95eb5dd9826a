"""Parametric fault tree analysis via probabilistic Horn abduction.

Models of redundant systems are written in a small text language, parsed
into a parametric fault tree, translated into probabilistic Horn clause
theories, and analyzed with a best-first abductive search. Qualitative
results (minimal cut sets) and quantitative results (prior and posterior
unreliability) can be cross-checked against exhaustive enumeration.
"""

from .compile import CompileOptions, compile_direct, compile_disjoint, expand_kofn
from .dsl import parse_model, serialize_model
from .engine import (
    EXHAUSTIVE,
    Explanation,
    ExplanationSearch,
    ProbabilityBounds,
    StopCriteria,
    explain,
    minimal_explanations,
    probability,
)
from .errors import (
    AnalysisError,
    DslError,
    EngineError,
    ModelInvalidError,
    OracleError,
    PftaError,
    TheoryError,
)
from .measures import (
    CutSet,
    MeasureReport,
    UnreliabilityPoint,
    attach_posteriors,
    basic_event_posterior,
    basic_event_posteriors,
    curve_times,
    cut_set_posterior,
    measure_report,
    minimal_cut_sets,
    parse_instance,
    system_unreliability,
    unreliability_curve,
)
from .model import (
    EventNode,
    EventRef,
    FailureRate,
    Gate,
    Parameter,
    ParamType,
    PftModel,
    failure_probability,
    format_instance,
    instantiate,
    require_valid,
    validate,
)
from .oracle import (
    GroundFaultTree,
    evaluate,
    exact_probability,
    prime_implicants,
    unfold,
)
from .pha import (
    Atom,
    AssumptionReport,
    Clause,
    DisjointDeclaration,
    PhaTheory,
    Var,
    check_assumptions,
    entails,
    parse_theory,
    serialize,
    unify,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisError",
    "AssumptionReport",
    "Atom",
    "Clause",
    "CompileOptions",
    "CutSet",
    "DisjointDeclaration",
    "DslError",
    "EngineError",
    "EXHAUSTIVE",
    "EventNode",
    "EventRef",
    "Explanation",
    "ExplanationSearch",
    "FailureRate",
    "Gate",
    "GroundFaultTree",
    "MeasureReport",
    "ModelInvalidError",
    "OracleError",
    "Parameter",
    "ParamType",
    "PftaError",
    "PftModel",
    "PhaTheory",
    "ProbabilityBounds",
    "StopCriteria",
    "TheoryError",
    "UnreliabilityPoint",
    "Var",
    "attach_posteriors",
    "basic_event_posterior",
    "basic_event_posteriors",
    "check_assumptions",
    "compile_direct",
    "compile_disjoint",
    "curve_times",
    "cut_set_posterior",
    "entails",
    "evaluate",
    "exact_probability",
    "expand_kofn",
    "explain",
    "failure_probability",
    "format_instance",
    "instantiate",
    "measure_report",
    "minimal_cut_sets",
    "minimal_explanations",
    "parse_instance",
    "parse_model",
    "parse_theory",
    "prime_implicants",
    "probability",
    "require_valid",
    "serialize",
    "serialize_model",
    "system_unreliability",
    "unfold",
    "unify",
    "unreliability_curve",
    "validate",
]
