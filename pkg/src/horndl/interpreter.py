"""Reference interpreter: goal-directed proof search with ancestor lists.

This is the executable semantics the compiled engine is tested against.  A
goal is proved by, in order of alternatives:

* equality goals are evaluated directly (they are ground by the time they
  run, thanks to the roles-first body order);
* if an *identical* goal is already on the ancestor list, the whole call
  fails (loop elimination);
* if the complement of the goal unifies with an ancestor, the goal succeeds
  (ancestor resolution) — and clause resolution is still tried on
  backtracking;
* otherwise the goal is pushed on the ancestor list and resolved against
  facts and program clauses.

Implemented with recursive generators plus a step watchdog; it is a
small-scale oracle, not the production path.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

from .model import (
    Binary,
    Const,
    Equality,
    Literal,
    PredName,
    Unary,
    Var,
    canonical_literal,
    consts_of,
)
from .parser import KnowledgeBase, kb_clauses
from .transform import (
    HornClause,
    HornProgram,
    facts_to_clauses,
    order_program_binary_first,
    pdl,
    prune_negated_binary_heads,
)

STEP_LIMIT_ENV = "HORNDL_STEP_LIMIT"


class StepLimitExceeded(RuntimeError):
    pass


class ResolutionInvariantError(RuntimeError):
    """More than one ancestor matched a goal — the search is ill-behaved."""


class NonGroundEqualityError(RuntimeError):
    """An (in)equality goal ran before its variables were bound."""


@dataclass
class InterpCounters:
    steps: int = 0
    loop_elims: int = 0
    ancres: int = 0


class _Cell:
    __slots__ = ("val",)

    def __init__(self) -> None:
        self.val = None


def _deref(t):
    while isinstance(t, _Cell) and t.val is not None:
        t = t.val
    return t


# Runtime goals are tuples: ("u", pred, a) / ("b", pred, a1, a2) /
# ("eq", positive, a1, a2); args are Const or _Cell.


def _to_runtime(lit: Literal, env: dict) -> tuple:
    lit = canonical_literal(lit)

    def conv(t):
        if isinstance(t, Var):
            return env.setdefault(t, _Cell())
        return t

    if isinstance(lit, Unary):
        return ("u", lit.pred, conv(lit.arg))
    if isinstance(lit, Binary):
        return ("b", lit.pred, conv(lit.arg1), conv(lit.arg2))
    if isinstance(lit, Equality):
        return ("eq", lit.positive, conv(lit.arg1), conv(lit.arg2))
    raise TypeError(f"cannot execute {lit!r}")


def _identical(g0: tuple, g1: tuple) -> bool:
    if g0[0] != g1[0] or g0[1] != g1[1]:
        return False
    for a, b in zip(g0[2:], g1[2:]):
        a, b = _deref(a), _deref(b)
        if isinstance(a, _Cell) or isinstance(b, _Cell):
            if a is not b:
                return False
        elif a != b:
            return False
    return True


class Interpreter:
    def __init__(
        self,
        program: HornProgram,
        facts: Sequence[Literal],
        step_limit: Optional[int] = None,
    ):
        self.clause_index: dict[PredName, list[HornClause]] = {}
        for clause in program.clauses:
            self.clause_index.setdefault(clause.head.pred, []).append(clause)
        self.unary_facts: dict[PredName, list[Const]] = {}
        self.binary_facts: dict[PredName, list[tuple[Const, Const]]] = {}
        for f in facts:
            f = canonical_literal(f)
            if isinstance(f, Unary):
                self.unary_facts.setdefault(f.pred, []).append(f.arg)
            elif isinstance(f, Binary):
                self.binary_facts.setdefault(f.pred, []).append((f.arg1, f.arg2))
        names: set[str] = set()
        for f in facts:
            for c in consts_of(canonical_literal(f)):
                names.add(c.name)
        for clause in program.clauses:
            for lit in (clause.head, *clause.body):
                for c in consts_of(lit):
                    names.add(c.name)
        self.universe = sorted(names)
        if step_limit is None:
            raw = os.environ.get(STEP_LIMIT_ENV)
            step_limit = int(raw) if raw else None
        self.step_limit = step_limit
        self.counters = InterpCounters()
        self.trail: list[_Cell] = []

    # -- bindings

    def _bind(self, cell: _Cell, value) -> None:
        cell.val = value
        self.trail.append(cell)

    def _undo(self, mark: int) -> None:
        while len(self.trail) > mark:
            self.trail.pop().val = None

    def _unify(self, a, b) -> bool:
        a, b = _deref(a), _deref(b)
        if a is b:
            return True
        if isinstance(a, _Cell):
            self._bind(a, b)
            return True
        if isinstance(b, _Cell):
            self._bind(b, a)
            return True
        return a == b

    # -- search

    def _tick(self) -> None:
        self.counters.steps += 1
        if self.step_limit is not None and self.counters.steps > self.step_limit:
            raise StepLimitExceeded(f"interpreter exceeded {self.step_limit} steps")

    def solve(self, goals: Sequence[tuple], anc: tuple) -> Iterator[None]:
        if not goals:
            yield None
            return
        first, rest = goals[0], goals[1:]
        for _ in self.solve_goal(first, anc):
            yield from self.solve(rest, anc)

    def solve_goal(self, goal: tuple, anc: tuple) -> Iterator[None]:
        self._tick()
        kind = goal[0]
        if kind == "eq":
            _, positive, a, b = goal
            a, b = _deref(a), _deref(b)
            if isinstance(a, _Cell) or isinstance(b, _Cell):
                raise NonGroundEqualityError(f"(in)equality over unbound variables")
            if (a == b) == positive:
                yield None
            return

        for g0 in anc:
            if _identical(g0, goal):
                self.counters.loop_elims += 1
                return

        pred: PredName = goal[1]
        if kind == "u":
            neg = pred.negate()
            matches = []
            for entry in anc:
                if entry[0] == "u" and entry[1] == neg:
                    a, b = _deref(entry[2]), _deref(goal[2])
                    if isinstance(a, _Cell) or isinstance(b, _Cell) or a == b:
                        matches.append(entry)
            if len(matches) > 1:
                raise ResolutionInvariantError(
                    f"{len(matches)} ancestors match goal {pred.text}"
                )
            if matches:
                mark = len(self.trail)
                if self._unify(matches[0][2], goal[2]):
                    self.counters.ancres += 1
                    yield None
                self._undo(mark)

        new_anc = (goal,) + anc
        if kind == "u":
            for c in self.unary_facts.get(pred, ()):
                mark = len(self.trail)
                if self._unify(goal[2], c):
                    yield None
                self._undo(mark)
        else:
            for c1, c2 in self.binary_facts.get(pred, ()):
                mark = len(self.trail)
                if self._unify(goal[2], c1) and self._unify(goal[3], c2):
                    yield None
                self._undo(mark)

        for clause in self.clause_index.get(pred, ()):
            mark = len(self.trail)
            env: dict = {}
            head = _to_runtime(clause.head, env)
            if all(self._unify(g, h) for g, h in zip(goal[2:], head[2:])):
                body = [_to_runtime(lit, env) for lit in clause.body]
                yield from self.solve(body, new_anc)
            self._undo(mark)

    def run(self, goals: Sequence[Literal]) -> list[tuple[str, ...]]:
        env: dict = {}
        runtime = [_to_runtime(g, env) for g in goals]
        variables: list[Var] = []
        for g in goals:
            lit = canonical_literal(g)
            terms = (lit.arg,) if isinstance(lit, Unary) else (lit.arg1, lit.arg2)
            for t in terms:
                if isinstance(t, Var) and t not in variables:
                    variables.append(t)
        answers: set[tuple[str, ...]] = set()
        for _ in self.solve(runtime, ()):
            # an unbound variable means the proof holds for every individual
            rows = [[]]
            for v in variables:
                val = _deref(env[v])
                if isinstance(val, _Cell):
                    rows = [r + [name] for r in rows for name in self.universe]
                else:
                    rows = [r + [val.name] for r in rows]
            answers.update(tuple(r) for r in rows)
        return sorted(answers)


def interp(
    goals: Sequence[Literal],
    anc: Sequence[tuple],
    program: HornProgram,
    facts: Sequence[Literal],
    step_limit: Optional[int] = None,
) -> Iterator[None]:
    """Prove the conjunction of goals under a given ancestor list."""
    engine = Interpreter(program, facts, step_limit)
    env: dict = {}
    runtime = [_to_runtime(g, env) for g in goals]
    yield from engine.solve(runtime, tuple(anc))


def program_of(kb: KnowledgeBase) -> HornProgram:
    """The executable rule program of a KB (contrapositives, roles-first)."""
    horn = pdl(kb_clauses(kb))
    horn = prune_negated_binary_heads(horn)
    return order_program_binary_first(horn)


def solve_query_ref(
    kb: KnowledgeBase,
    goals: Sequence[Literal],
    step_limit: Optional[int] = None,
) -> list[tuple[str, ...]]:
    """Reference answers for a conjunctive query, sorted and deduplicated."""
    program = program_of(kb)
    rules = HornProgram(tuple(c for c in program.clauses if not c.is_fact()))
    facts = list(kb.abox) + [c.head for c in program.clauses if c.is_fact()]
    engine = Interpreter(rules, facts, step_limit)
    return engine.run([canonical_literal(g) for g in goals])
