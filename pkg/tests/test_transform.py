import random

import pytest

from horndl.model import (
    Binary,
    Const,
    DLClause,
    Equality,
    Neg,
    PredName,
    Unary,
    Var,
    vars_of,
)
from horndl.transform import (
    HornProgram,
    TransformError,
    facts_to_clauses,
    order_binary_first,
    order_program_binary_first,
    pdl,
    prune_negated_binary_heads,
    split_parts,
)
from conftest import random_kb

X, Y, Z = Var("X"), Var("Y"), Var("Z")
HAS_CHILD = PredName("hasChild", False, 2)

IOCASTE = DLClause(
    [
        Unary(PredName("ans"), X),
        Neg(Binary(HAS_CHILD, X, Y)),
        Neg(Binary(HAS_CHILD, Y, Z)),
        Neg(Unary(PredName("patricide"), Y)),
        Unary(PredName("patricide"), Z),
    ]
)


class TestPdl:
    def test_one_contrapositive_per_non_equality_literal(self):
        program = pdl([IOCASTE])
        assert len(program.clauses) == 5
        heads = sorted(c.head.pred.text for c in program.clauses)
        assert heads == ["ans", "not_hasChild", "not_hasChild", "not_patricide", "patricide"]

    def test_equality_heads_skipped(self):
        clause = DLClause(
            [
                Unary(PredName("happy"), X),
                Neg(Binary(HAS_CHILD, X, Y)),
                Neg(Binary(HAS_CHILD, X, Z)),
                Equality(True, Y, Z),
            ]
        )
        program = pdl([clause])
        assert len(program.clauses) == 3
        happy = next(c for c in program.clauses if c.head.pred.base == "happy")
        assert any(isinstance(g, Equality) and not g.positive for g in happy.body)

    def test_singleton_clause_becomes_fact(self):
        program = pdl([DLClause([Unary(PredName("c"), Const("a"))])])
        (clause,) = program.clauses
        assert clause.is_fact()

    def test_count_law_on_random_kbs(self):
        rng = random.Random(9)
        for _ in range(40):
            kb = random_kb(rng)
            expected = sum(
                sum(1 for l in c.literals if not isinstance(l, Equality))
                for c in kb.tbox
            )
            assert len(pdl(kb.tbox).clauses) == expected


class TestPruneNegatedBinaryHeads:
    def test_iocaste_drops_not_haschild(self):
        pruned = prune_negated_binary_heads(pdl([IOCASTE]))
        assert len(pruned.clauses) == 3
        assert all(c.head.pred.text != "not_hasChild" for c in pruned.clauses)
        # and no negated role goals survive in any body
        for clause in pruned.clauses:
            for goal in clause.body:
                assert not (isinstance(goal, Binary) and goal.pred.negated)

    def test_positive_role_head_kept(self):
        role_clause = DLClause([Binary(PredName("s", False, 2), Y, X), Neg(Binary(PredName("r", False, 2), X, Y))])
        pruned = prune_negated_binary_heads(pdl([role_clause]))
        assert any(c.head.pred.text == "s" for c in pruned.clauses)

    def test_unary_only_program_unchanged(self):
        program = pdl([DLClause([Unary(PredName("p"), X), Neg(Unary(PredName("q"), X))])])
        assert prune_negated_binary_heads(program).clauses == program.clauses


def _binary_first_ok(clause) -> bool:
    seen_binary_vars = set()
    for goal in clause.body:
        if isinstance(goal, Binary):
            seen_binary_vars |= vars_of(goal)
        else:
            if vars_of(goal) - seen_binary_vars - vars_of(clause.head):
                # a later binary goal must still be able to bind it
                rest_ok = False
                return rest_ok
    return True


class TestBinaryFirst:
    def test_roles_precede_unary_goals(self):
        program = prune_negated_binary_heads(pdl([IOCASTE]))
        for clause in order_program_binary_first(program).clauses:
            kinds = ["b" if isinstance(g, Binary) else "u" for g in clause.body]
            assert kinds == sorted(kinds, key=lambda k: k != "b")

    def test_no_binary_goals_unchanged(self):
        program = pdl([DLClause([Unary(PredName("p"), X), Neg(Unary(PredName("q"), X))])])
        (clause,) = program.clauses
        assert order_binary_first(clause) == clause

    def test_random_programs_satisfy_rule(self):
        rng = random.Random(3)
        for _ in range(40):
            kb = random_kb(rng)
            program = order_program_binary_first(prune_negated_binary_heads(pdl(kb.tbox)))
            for clause in program.clauses:
                assert _binary_first_ok(clause)

    def test_relative_role_order_preserved(self):
        program = order_program_binary_first(prune_negated_binary_heads(pdl([IOCASTE])))
        ans = next(c for c in program.clauses if c.head.pred.base == "ans")
        roles = [g for g in ans.body if isinstance(g, Binary)]
        assert roles[0].arg1 == X  # hasChild(X, Y) still before hasChild(Y, Z)


class TestSplitParts:
    def test_facts_and_rules_separate(self):
        program = pdl(
            [IOCASTE, DLClause([Unary(PredName("patricide"), Const("o"))])]
        )
        rules, facts = split_parts(program)
        assert all(not c.is_fact() for c in rules.clauses)
        assert [c.head for c in facts.clauses] == [Unary(PredName("patricide"), Const("o"))]

    def test_all_facts(self):
        program = pdl([DLClause([Unary(PredName("c"), Const("a"))])])
        rules, facts = split_parts(program)
        assert not rules.clauses and len(facts.clauses) == 1


class TestFactsToClauses:
    def test_ground_facts_accepted(self):
        facts = [Unary(PredName("p", True), Const("a")), Binary(HAS_CHILD, Const("a"), Const("b"))]
        clauses = facts_to_clauses(facts)
        assert [c.head for c in clauses] == facts

    def test_non_ground_fact_rejected(self):
        with pytest.raises(TransformError):
            facts_to_clauses([Unary(PredName("p"), X)])

    def test_negated_role_fact_rejected(self):
        with pytest.raises(TransformError):
            facts_to_clauses([Binary(PredName("hasChild", True, 2), Const("a"), Const("b"))])
