"""Worst-case execution-time bounds for abstract binary programs on an
instruction-cache + pipeline timing model.

Three analyses over the same program automata:
  * explicit  - exhaustive product exploration from a known initial cache,
  * abstract  - exploration against a classifier-automaton cache model,
  * refine    - automatic model refinement for an unknown initial cache.
"""

from .cache import (
    CacheConfig,
    CacheState,
    Classification,
    ClassifiedAccess,
    ClassifiedTrace,
    ReplacementPolicy,
    access,
    find,
    init_cache,
    simulate,
    validate_state,
)
from .classifier import (
    AccessSymbol,
    ClassifierAutomaton,
    accepts,
    allows,
    as_symbols,
    complement,
    from_pattern,
    full_alphabet,
    hit_or_miss,
    infix_language,
    intersect,
    is_empty_language,
    minimize,
    parse_model,
    same_language,
    subtract,
)
from .errors import (
    AbstractModelEmpty,
    AlphabetMismatch,
    AnalysisError,
    BoundExceeded,
    IterationBudgetExceeded,
    ParseError,
    PatternParseError,
    UnknownInstruction,
    ValidationError,
)
from .explorer import ExplorationResult, explore_abstract, explore_explicit
from .program import (
    Edge,
    Instruction,
    Program,
    branching_loop_program,
    ensure_bounded,
    language_sequences,
    parse_program,
    serialize_program,
)
from .refinement import (
    FeasibilityVerdict,
    RefinementResult,
    RefinementStep,
    build_o_t,
    candidate_initial_states,
    infeasible_core,
    infeasible_from_every_state,
    is_feasible_from_some_state,
    realizable_from,
    run_refinement,
)
from .timing import StepCost, step_cost, trace_time

__version__ = "0.1.0"

__all__ = [
    "AbstractModelEmpty",
    "AccessSymbol",
    "AlphabetMismatch",
    "AnalysisError",
    "BoundExceeded",
    "CacheConfig",
    "CacheState",
    "Classification",
    "ClassifiedAccess",
    "ClassifiedTrace",
    "ClassifierAutomaton",
    "Edge",
    "ExplorationResult",
    "FeasibilityVerdict",
    "Instruction",
    "IterationBudgetExceeded",
    "ParseError",
    "PatternParseError",
    "Program",
    "RefinementResult",
    "RefinementStep",
    "ReplacementPolicy",
    "StepCost",
    "UnknownInstruction",
    "ValidationError",
    "accepts",
    "access",
    "allows",
    "as_symbols",
    "branching_loop_program",
    "build_o_t",
    "candidate_initial_states",
    "complement",
    "ensure_bounded",
    "explore_abstract",
    "explore_explicit",
    "find",
    "from_pattern",
    "full_alphabet",
    "hit_or_miss",
    "infeasible_core",
    "infeasible_from_every_state",
    "infix_language",
    "init_cache",
    "intersect",
    "is_empty_language",
    "is_feasible_from_some_state",
    "language_sequences",
    "minimize",
    "parse_model",
    "parse_program",
    "realizable_from",
    "run_refinement",
    "same_language",
    "serialize_program",
    "simulate",
    "step_cost",
    "subtract",
    "trace_time",
    "validate_state",
]
