"""Brute-force entailment oracle for small knowledge bases.

The clause language is function-free, so a clause set is satisfiable iff it
has a Herbrand model over the named constants: ground every clause over the
constants (equalities decide immediately under unique names), then run a
small DPLL SAT check.  ``S entails query`` iff ``S + {complement of query}``
is unsatisfiable.  Exponential in KB size — for tests and differential
checks only.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Sequence

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
)


def _collect_constants(
    clauses: Sequence[DLClause], facts: Sequence[Literal], pad: bool = True
) -> list[Const]:
    """Named constants of the KB.  With ``pad`` a fresh constant is added
    when there are none, so grounding always has a non-empty domain; answer
    enumeration must not use the padding constant."""
    out: set[Const] = set()
    for c in clauses:
        out |= c.constants
    for f in facts:
        lit = canonical_literal(f)
        if isinstance(lit, Unary):
            if isinstance(lit.arg, Const):
                out.add(lit.arg)
        elif isinstance(lit, Binary):
            for t in (lit.arg1, lit.arg2):
                if isinstance(t, Const):
                    out.add(t)
    if pad and not out:
        out.add(Const("c0"))
    return sorted(out, key=lambda c: c.name)


class _AtomTable:
    def __init__(self) -> None:
        self.ids: dict[tuple, int] = {}

    def lit_to_int(self, lit: Literal) -> int:
        """Signed DIMACS-style integer for a ground predicate literal."""
        if isinstance(lit, Unary):
            key = (lit.pred.base, lit.arg.name)
            sign = -1 if lit.pred.negated else 1
        elif isinstance(lit, Binary):
            key = (lit.pred.base, lit.arg1.name, lit.arg2.name)
            sign = -1 if lit.pred.negated else 1
        else:
            raise TypeError(f"not a predicate literal: {lit!r}")
        var = self.ids.setdefault(key, len(self.ids) + 1)
        return sign * var


def _ground_clause(clause: DLClause, consts: Sequence[Const], atoms: _AtomTable) -> list[list[int]]:
    variables = sorted(clause.variables, key=lambda v: v.name)
    out: list[list[int]] = []
    for assignment in itertools.product(consts, repeat=len(variables)):
        env = dict(zip(variables, assignment))
        ground: list[int] = []
        satisfied = False
        for lit in clause.literals:
            lit = canonical_literal(lit)
            if isinstance(lit, Equality):
                a = env.get(lit.arg1, lit.arg1)
                b = env.get(lit.arg2, lit.arg2)
                # unique names: ground equality is decided immediately
                if (a == b) == lit.positive:
                    satisfied = True
                    break
                continue
            if isinstance(lit, Unary):
                g = Unary(lit.pred, env.get(lit.arg, lit.arg))
            else:
                g = Binary(lit.pred, env.get(lit.arg1, lit.arg1), env.get(lit.arg2, lit.arg2))
            ground.append(atoms.lit_to_int(g))
        if not satisfied:
            out.append(ground)
    return out


def _dpll(clauses: list[list[int]]) -> bool:
    """Satisfiability of a CNF given as signed-int clauses."""
    assignment: dict[int, bool] = {}

    def solve(clauses: list[list[int]]) -> bool:
        # unit propagation
        clauses = [list(c) for c in clauses]
        while True:
            unit = None
            simplified: list[list[int]] = []
            for c in clauses:
                lits = []
                sat = False
                for lit in c:
                    val = assignment.get(abs(lit))
                    if val is None:
                        lits.append(lit)
                    elif (lit > 0) == val:
                        sat = True
                        break
                if sat:
                    continue
                if not lits:
                    return False
                if len(lits) == 1 and unit is None:
                    unit = lits[0]
                simplified.append(lits)
            clauses = simplified
            if unit is None:
                break
            assignment[abs(unit)] = unit > 0
            trail.append(abs(unit))
        if not clauses:
            return True
        branch = clauses[0][0]
        for value in (branch > 0, branch <= 0):
            mark = len(trail)
            assignment[abs(branch)] = value
            trail.append(abs(branch))
            if solve(clauses):
                return True
            while len(trail) > mark:
                del assignment[trail.pop()]
        return False

    trail: list[int] = []
    return solve(clauses)


def ground_cnf(
    clauses: Sequence[DLClause], facts: Sequence[Literal]
) -> tuple[list[list[int]], _AtomTable, list[Const]]:
    consts = _collect_constants(clauses, facts)
    atoms = _AtomTable()
    cnf: list[list[int]] = []
    for clause in clauses:
        cnf.extend(_ground_clause(clause, consts, atoms))
    for fact in facts:
        cnf.append([atoms.lit_to_int(canonical_literal(fact))])
    return cnf, atoms, consts


def satisfiable(clauses: Sequence[DLClause], facts: Sequence[Literal]) -> bool:
    cnf, _, _ = ground_cnf(clauses, facts)
    return _dpll(cnf)


def entails(clauses: Sequence[DLClause], facts: Sequence[Literal], query: Literal) -> bool:
    """Does every model of the KB satisfy the ground query literal?"""
    query = canonical_literal(query)
    if not is_ground(query):
        raise ValueError(f"query literal must be ground: {query!r}")
    from .model import negate

    cnf, atoms, _ = ground_cnf(clauses, facts)
    cnf.append([atoms.lit_to_int(negate(query))])
    return not _dpll(cnf)


def certain_answers(
    clauses: Sequence[DLClause],
    facts: Sequence[Literal],
    goals: Sequence[Literal],
) -> list[tuple[str, ...]]:
    """Bindings over named constants under which every goal is entailed.

    The answer tuple lists the query variables in first-occurrence order.
    Matches the execution semantics of the interpreter and the compiled
    engine: each goal is checked independently under the binding.
    """
    goals = [canonical_literal(g) for g in goals]
    variables: list[Var] = []
    for g in goals:
        for t in (g.arg,) if isinstance(g, Unary) else (g.arg1, g.arg2):
            if isinstance(t, Var) and t not in variables:
                variables.append(t)
    consts = _collect_constants(clauses, facts, pad=False)
    cache: dict[Literal, bool] = {}

    def holds(lit: Literal) -> bool:
        if lit not in cache:
            cache[lit] = entails(clauses, facts, lit)
        return cache[lit]

    out: set[tuple[str, ...]] = set()
    for assignment in itertools.product(consts, repeat=len(variables)):
        env = dict(zip(variables, assignment))
        ok = True
        for g in goals:
            if isinstance(g, Unary):
                inst = Unary(g.pred, env.get(g.arg, g.arg))
            else:
                inst = Binary(g.pred, env.get(g.arg1, g.arg1), env.get(g.arg2, g.arg2))
            if not holds(inst):
                ok = False
                break
        if ok:
            out.add(tuple(env[v].name for v in variables))
    return sorted(out)


def retrieve(
    clauses: Sequence[DLClause],
    facts: Sequence[Literal],
    pred,
) -> list[tuple[str, ...]]:
    """All constant tuples a with ``KB entails pred(a)``, sorted by name."""
    consts = _collect_constants(clauses, facts, pad=False)
    out: list[tuple[str, ...]] = []
    if pred.arity == 1:
        for c in consts:
            if entails(clauses, facts, Unary(pred, c)):
                out.append((c.name,))
    else:
        for a in consts:
            for b in consts:
                if entails(clauses, facts, Binary(pred, a, b)):
                    out.append((a.name, b.name))
    return sorted(out)
