"""Translation of disjunctive clauses into a Horn program of contrapositives.

Every non-equality literal of a clause yields one Horn rule with that literal
as head and the complements of the remaining literals as body (in source
order).  Rules whose head is a negated role are dropped afterwards: goals of
that shape can never be proven and, for well-formed clauses, never appear in
any remaining body either.  Finally each body is reordered so role goals come
first, which guarantees that every equality goal and every shared variable is
bound before it is needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .model import (
    Binary,
    Const,
    DLClause,
    Equality,
    Literal,
    Unary,
    Var,
    canonical_literal,
    is_ground,
    negate,
    vars_of,
)


class TransformError(Exception):
    """A clause cannot be turned into executable Horn rules."""


HeadLiteral = Union[Unary, Binary]


@dataclass(frozen=True)
class HornClause:
    head: HeadLiteral
    body: tuple[Literal, ...]
    origin: Optional[DLClause] = None

    def is_fact(self) -> bool:
        return not self.body and is_ground(self.head)

    def __repr__(self) -> str:
        if not self.body:
            return f"{self.head!r}."
        return f"{self.head!r} :- " + ", ".join(repr(g) for g in self.body) + "."


@dataclass(frozen=True)
class HornProgram:
    clauses: tuple[HornClause, ...]

    def __iter__(self):
        return iter(self.clauses)

    def __len__(self) -> int:
        return len(self.clauses)


def pdl(clauses: Iterable[DLClause]) -> HornProgram:
    """All contrapositives of the given clauses, one per non-equality literal.

    Raises :class:`TransformError` for clauses containing an inequality
    (its contrapositives would need a positive-equality goal, which has no
    executable reading under unique names) or consisting of equalities only.
    """
    rules: list[HornClause] = []
    for clause in clauses:
        lits = [canonical_literal(l) for l in clause.literals]
        for lit in lits:
            if isinstance(lit, Equality) and not lit.positive:
                raise TransformError(
                    f"inequality literal in clause {clause!r}: "
                    "a contrapositive would contain a positive equality goal"
                )
        heads = [l for l in lits if not isinstance(l, Equality)]
        if not heads:
            raise TransformError(f"clause {clause!r} contains only equality literals")
        for k, lit in enumerate(lits):
            if isinstance(lit, Equality):
                continue
            body = tuple(negate(other) for i, other in enumerate(lits) if i != k)
            rules.append(HornClause(lit, body, origin=clause))
    return HornProgram(tuple(rules))


def prune_negated_binary_heads(program: HornProgram) -> HornProgram:
    """Drop rules headed by a negated role; check none survive in bodies."""
    kept = tuple(
        c
        for c in program.clauses
        if not (isinstance(c.head, Binary) and c.head.pred.negated)
    )
    for clause in kept:
        for goal in clause.body:
            if isinstance(goal, Binary) and goal.pred.negated:
                raise TransformError(
                    f"negated role goal {goal!r} survives pruning in {clause!r}; "
                    "the source clause is not well-formed"
                )
    return HornProgram(kept)


def order_binary_first(clause: HornClause) -> HornClause:
    """Stable-partition the body: role goals first, then the rest.

    Relative source order is preserved within each group.  In the result,
    every variable of a non-role goal is bound by the time the goal runs
    (left-to-right execution), because well-formed clauses keep all their
    variables inside role literals whenever a role literal exists.
    """
    binaries = tuple(g for g in clause.body if isinstance(g, Binary))
    rest = tuple(g for g in clause.body if not isinstance(g, Binary))
    return HornClause(clause.head, binaries + rest, origin=clause.origin)


def order_program_binary_first(program: HornProgram) -> HornProgram:
    return HornProgram(tuple(order_binary_first(c) for c in program.clauses))


def facts_to_clauses(facts: Iterable[Literal]) -> list[HornClause]:
    """Ground assertions as bodyless Horn rules."""
    out: list[HornClause] = []
    for lit in facts:
        lit = canonical_literal(lit)
        if isinstance(lit, Equality):
            raise TransformError(f"equality assertion {lit!r} is not storable")
        if not is_ground(lit):
            raise TransformError(f"assertion {lit!r} is not ground")
        if isinstance(lit, Binary) and lit.pred.negated:
            raise TransformError(
                f"negated role assertion {lit!r}: the reduced assertion form "
                "allows only positive role facts"
            )
        out.append(HornClause(lit, ()))
    return out


def split_parts(program: HornProgram) -> tuple[HornProgram, HornProgram]:
    """Split into (rules, ground facts)."""
    tbox = tuple(c for c in program.clauses if not c.is_fact())
    abox = tuple(c for c in program.clauses if c.is_fact())
    return HornProgram(tbox), HornProgram(abox)


def check_body_groundness(clause: HornClause) -> bool:
    """True if left-to-right execution grounds every non-role goal.

    Simulates the set of bound variables (head variables excluded — callers
    may invoke with the head argument unbound) through the body: role goals
    bind their variables; every equality and every unary goal must only use
    variables already bound, unless the clause has no role goals at all
    (single-variable clauses bind via the head).
    """
    if not any(isinstance(g, Binary) for g in clause.body):
        return True
    bound: set[Var] = set()
    for goal in clause.body:
        if isinstance(goal, Binary):
            bound |= vars_of(goal)
        else:
            if not vars_of(goal) <= bound:
                return False
    return True
