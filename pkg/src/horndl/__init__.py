"""Two-phase description-logic instance retrieval.

A TBox given as function-free DL clauses is compiled — independently of
the fact set — into optimised query plans (:func:`compile_program`),
which an execution engine (:class:`Engine`) then runs against a separate
fact store with loop elimination and deterministic ancestor resolution.

Typical use::

    from horndl import parse_kb, compile_program, Engine

    kb = parse_kb(text)
    engine = Engine(compile_program(kb))
    result = engine.query(kb.queries[0])
"""

from .engine import (
    Engine,
    EngineError,
    EngineInvariantError,
    QueryError,
    QueryResult,
    Stats,
    run_query,
)
from .generators import build as build_kb
from .generators import generate as generate_kb_text
from .interpreter import STEP_LIMIT_ENV, StepLimitExceeded, solve_query_ref
from .model import (
    Binary,
    Const,
    DLClause,
    Equality,
    PredName,
    Signature,
    Unary,
    Var,
    canonical_literal,
    negate,
    signature_of,
    validate_dl_clause,
)
from .parser import (
    KBSyntaxError,
    KnowledgeBase,
    ingest_abox_csv,
    parse_kb,
    render_kb,
)
from .plan import CompiledProgram, Options, PlanError, compile_program, emit_readable
from .store import FactSource, MemoryStore

__version__ = "0.1.0"

__all__ = [
    "Binary",
    "CompiledProgram",
    "Const",
    "DLClause",
    "Engine",
    "EngineError",
    "EngineInvariantError",
    "Equality",
    "FactSource",
    "KBSyntaxError",
    "KnowledgeBase",
    "MemoryStore",
    "Options",
    "PlanError",
    "PredName",
    "QueryError",
    "QueryResult",
    "STEP_LIMIT_ENV",
    "Signature",
    "Stats",
    "StepLimitExceeded",
    "Unary",
    "Var",
    "build_kb",
    "canonical_literal",
    "compile_program",
    "emit_readable",
    "generate_kb_text",
    "ingest_abox_csv",
    "negate",
    "parse_kb",
    "render_kb",
    "run_query",
    "signature_of",
    "solve_query_ref",
    "validate_dl_clause",
]
