import random

import pytest

from horndl.bruteforce import certain_answers, satisfiable
from horndl.generators import alcoholic, happy, iocaste_clean
from horndl.interpreter import (
    Interpreter,
    StepLimitExceeded,
    program_of,
    solve_query_ref,
)
from horndl.model import Binary, Const, PredName, Unary, Var
from horndl.parser import KnowledgeBase, kb_clauses, parse_kb
from conftest import UNARIES, random_kb

X = Var("X")
ANS = PredName("ans")
HAS_CHILD = PredName("hasChild", False, 2)


class TestReferenceSolver:
    def test_iocaste_pattern_two(self):
        kb = iocaste_clean(2)
        assert solve_query_ref(kb, kb.queries[0]) == [("i",)]

    def test_open_world_negative(self):
        kb = iocaste_clean(2)
        kb = KnowledgeBase(
            tbox=kb.tbox,
            abox=[
                Binary(HAS_CHILD, Const("i1"), Const("i2")),
                Binary(HAS_CHILD, Const("i2"), Const("i3")),
                Unary(PredName("patricide"), Const("i2")),
            ],
        )
        assert solve_query_ref(kb, [Unary(ANS, Const("i1"))]) == []

    def test_happy_is_kate(self):
        kb = happy()
        assert solve_query_ref(kb, kb.queries[0]) == [("kate",)]

    def test_alcoholic_chain(self):
        kb = alcoholic(3)
        assert solve_query_ref(kb, kb.queries[0]) == [()]

    def test_empty_program_query(self):
        kb = parse_kb("p(a).")
        assert solve_query_ref(kb, [Unary(PredName("q", True), X)]) == []

    def test_ground_success_returns_empty_tuple(self):
        kb = iocaste_clean(2)
        assert solve_query_ref(kb, [Unary(ANS, Const("i"))]) == [()]


class TestCounters:
    def _engine(self, kb):
        program = program_of(kb)
        rules = type(program)(tuple(c for c in program.clauses if not c.is_fact()))
        facts = list(kb.abox) + [c.head for c in program.clauses if c.is_fact()]
        return Interpreter(rules, facts)

    def test_loop_elimination_on_cycle(self):
        kb = iocaste_clean(1)
        kb.abox[:] = [
            Binary(HAS_CHILD, Const("a"), Const("b")),
            Binary(HAS_CHILD, Const("b"), Const("a")),
        ]
        engine = self._engine(kb)
        assert engine.run([Unary(PredName("patricide"), X)]) == []
        assert engine.counters.loop_elims > 0

    def test_ancestor_resolution_counted(self):
        engine = self._engine(iocaste_clean(2))
        assert engine.run([Unary(ANS, X)]) == [("i",)]
        assert engine.counters.ancres > 0

    def test_step_limit(self):
        kb = iocaste_clean(50)
        with pytest.raises(StepLimitExceeded):
            solve_query_ref(kb, kb.queries[0], step_limit=10)


class TestOracleEquivalence:
    def test_random_kbs_match_entailment(self):
        rng = random.Random(17)
        checked = 0
        while checked < 60:
            kb = random_kb(rng)
            clauses = kb_clauses(kb)
            if not satisfiable(clauses, kb.abox):
                continue  # inconsistent KBs entail everything; out of scope
            checked += 1
            for p in UNARIES + [u.negate() for u in UNARIES]:
                goal = [Unary(p, X)]
                assert solve_query_ref(kb, goal, step_limit=300_000) == certain_answers(
                    clauses, kb.abox, goal
                )
