import random

import pytest

from horndl.bruteforce import certain_answers, satisfiable
from horndl.engine import Engine, QueryError, Stats, run_query
from horndl.generators import alcoholic, happy, iocaste_clean
from horndl.interpreter import STEP_LIMIT_ENV, StepLimitExceeded, solve_query_ref
from horndl.model import (
    Binary,
    Const,
    DLClause,
    Equality,
    PredName,
    Unary,
    Var,
)
from horndl.parser import KnowledgeBase, kb_clauses, parse_kb
from horndl.plan import Options, compile_program
from conftest import OPTIONS_MENU, UNARIES, random_kb

X, Y = Var("X"), Var("Y")
ANS = PredName("ans")
HAS_CHILD = PredName("hasChild", False, 2)


def answers(kb, goals, options=Options(), step_limit=None):
    return run_query(compile_program(kb, options), goals, step_limit=step_limit).answers


class TestGoldenAnswers:
    def test_iocaste_is_i(self):
        kb = iocaste_clean(2)
        assert answers(kb, kb.queries[0]) == [("i",)]

    def test_open_world_negative(self):
        kb = parse_kb(
            "some(hasChild, patricide & some(hasChild, ~patricide)) => ans.\n"
            "hasChild(i1, i2).\nhasChild(i2, i3).\npatricide(i2).\n"
        )
        assert answers(kb, [Unary(ANS, Const("i1"))]) == []

    def test_happy_is_kate(self):
        kb = happy()
        assert answers(kb, kb.queries[0]) == [("kate",)]

    def test_alcoholic_holds(self):
        kb = alcoholic(3)
        assert answers(kb, kb.queries[0]) == [()]

    def test_role_query(self):
        kb = iocaste_clean(2)
        result = run_query(compile_program(kb), [Binary(HAS_CHILD, Const("i"), X)])
        assert result.variables == ("X",)
        assert result.answers == [("e1",), ("e2",)]

    def test_conjunctive_query(self):
        kb = iocaste_clean(2)
        got = answers(kb, [Binary(HAS_CHILD, X, Y), Unary(PredName("patricide"), Y)])
        assert ("i", "e1") in got

    def test_universal_proof_expands_to_all_individuals(self):
        kb = KnowledgeBase(
            tbox=[DLClause([Unary(PredName("c"), X)])],
            abox=[Unary(PredName("d"), Const("a")), Unary(PredName("d"), Const("b"))],
        )
        assert answers(kb, [Unary(PredName("c"), X)]) == [("a",), ("b",)]


class TestCounters:
    def test_iocaste_base_counters(self):
        n = 5
        result = run_query(compile_program(iocaste_clean(n)), [Unary(ANS, X)])
        assert result.stats.orphan_ancres == 2 * n - 2
        assert result.stats.loop_elims == 0
        assert result.stats.ancres == 0

    def test_cycle_terminates_with_loop_elims(self):
        kb = iocaste_clean(1)
        kb.abox[:] = [
            Binary(HAS_CHILD, Const("a"), Const("b")),
            Binary(HAS_CHILD, Const("b"), Const("a")),
        ]
        result = run_query(compile_program(kb), [Unary(PredName("patricide"), X)])
        assert result.answers == []
        assert result.stats.loop_elims > 0

    def test_ancestor_resolution_counted_without_ground_optim(self):
        kb = iocaste_clean(2)
        result = run_query(compile_program(kb, Options(ground_optim=False)), [Unary(ANS, X)])
        assert result.answers == [("i",)]

    def test_duplicate_proofs_deduplicated(self):
        kb = iocaste_clean(3)
        result = run_query(compile_program(kb, Options(projection=False)), [Unary(ANS, X)])
        assert result.answers == [("i",)]
        assert result.stats.solutions >= 2  # one proof per witness pair

    def test_stats_serialisation(self):
        stats = Stats(loop_elims=1, ancres=2, orphan_ancres=3, runtime_ms=4.5)
        assert stats.to_lines() == [
            "loop=1",
            "ancres=2",
            "orphancres=3",
            "runtime_ms=4.500",
        ]


class TestStepLimit:
    def test_explicit_limit(self):
        kb = iocaste_clean(50)
        with pytest.raises(StepLimitExceeded):
            answers(kb, kb.queries[0], step_limit=10)

    def test_environment_limit(self, monkeypatch):
        monkeypatch.setenv(STEP_LIMIT_ENV, "10")
        kb = iocaste_clean(50)
        with pytest.raises(StepLimitExceeded):
            Engine(compile_program(kb)).query(kb.queries[0])

    def test_limit_not_hit(self):
        kb = iocaste_clean(2)
        assert answers(kb, kb.queries[0], step_limit=10_000) == [("i",)]


class TestQueryErrors:
    def test_unknown_predicate(self):
        with pytest.raises(QueryError):
            answers(iocaste_clean(2), [Unary(PredName("ghost"), X)])

    def test_unknown_role(self):
        with pytest.raises(QueryError):
            answers(iocaste_clean(2), [Binary(PredName("ghost", False, 2), X, Y)])

    def test_negated_role_goal(self):
        with pytest.raises(QueryError):
            answers(iocaste_clean(2), [Binary(PredName("hasChild", True, 2), X, Y)])

    def test_positive_equality_goal(self):
        with pytest.raises(QueryError):
            answers(iocaste_clean(2), [Equality(True, X, Y)])


class TestHashing:
    def test_hash_and_list_context_agree(self):
        kb = alcoholic(5)
        on = run_query(compile_program(kb, Options(hashing=True)), kb.queries[0])
        off = run_query(compile_program(kb, Options(hashing=False)), kb.queries[0])
        assert on.answers == off.answers == [()]
        assert on.stats.orphan_ancres == off.stats.orphan_ancres


class TestRoleHierarchy:
    def test_subrole_inclusion(self):
        kb = parse_kb("subrole(r, s).\nr(a, b).\np(X) | ~s(X, Y).")
        assert answers(kb, [Binary(PredName("s", False, 2), X, Y)]) == [("a", "b")]

    def test_symmetric_role(self):
        kb = parse_kb("subrole(inv(r), r).\nr(a, b).\np(X) | ~r(X, Y).")
        assert answers(kb, [Binary(PredName("r", False, 2), X, Y)]) == [
            ("a", "b"),
            ("b", "a"),
        ]


class TestMenuEquivalence:
    KBS = [
        iocaste_clean(3),
        happy(),
        alcoholic(2),
    ]

    def test_all_settings_agree_on_examples(self):
        for kb in self.KBS:
            expected = None
            for name, options in OPTIONS_MENU.items():
                got = answers(kb, kb.queries[0], options)
                if expected is None:
                    expected = got
                else:
                    assert got == expected, f"setting {name} diverged"

    def test_all_settings_agree_on_random_kbs(self):
        rng = random.Random(101)
        checked = 0
        while checked < 20:
            kb = random_kb(rng)
            if not satisfiable(kb_clauses(kb), kb.abox):
                continue
            checked += 1
            compiled = {
                name: compile_program(kb, options)
                for name, options in OPTIONS_MENU.items()
            }
            for pred in UNARIES:
                goal = [Unary(pred, X)]
                oracle = certain_answers(kb_clauses(kb), kb.abox, goal)
                for name, cp in compiled.items():
                    got = run_query(cp, goal, step_limit=500_000).answers
                    assert got == oracle, f"setting {name} wrong for {pred.text}"


class TestRetrieve:
    def test_retrieve_concept(self):
        engine = Engine(compile_program(iocaste_clean(2)))
        assert engine.retrieve(ANS).answers == [("i",)]

    def test_reference_solver_agreement(self):
        kb = iocaste_clean(3)
        assert answers(kb, kb.queries[0]) == solve_query_ref(kb, kb.queries[0])
