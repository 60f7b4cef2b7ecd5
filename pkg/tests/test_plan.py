import pytest

from horndl.generators import alcoholic, happy, iocaste_clean
from horndl.model import Binary, Const, DLClause, Neg, PredName, Unary, Var
from horndl.parser import KnowledgeBase, parse_kb
from horndl.plan import (
    Options,
    PlanError,
    compile_program,
    emit_readable,
)

X, Y = Var("X"), Var("Y")
HAS_CHILD = PredName("hasChild", False, 2)
ANS = PredName("ans")
PATRICIDE = PredName("patricide")


class TestOptions:
    def test_defaults(self):
        opts = Options()
        assert opts.decompose and opts.indexing and opts.projection
        assert opts.filtering and opts.ground_optim and opts.hashing
        assert opts.orphan == "first"

    def test_bad_orphan_value(self):
        with pytest.raises(PlanError):
            Options(orphan="last").validate()

    def test_projection_requires_classification(self):
        with pytest.raises(PlanError):
            Options(classification=False).validate()
        Options(classification=False, projection=False).validate()


class TestCompile:
    def test_iocaste_predicates(self):
        cp = compile_program(iocaste_clean(2))
        assert cp.preds[ANS].entry_kind == "superset"
        assert cp.preds[PATRICIDE].loop_guard  # recursive
        assert cp.preds[ANS.negate()].entry_kind == "empty"
        assert cp.preds[PATRICIDE.negate()].ancres_guard  # dnr

    def test_iocaste_universe_and_signature(self):
        cp = compile_program(iocaste_clean(2))
        assert cp.universe == ("e1", "e2", "i", "t")
        assert ANS in cp.unary_signature
        assert PATRICIDE.negate() in cp.unary_signature

    def test_inverted_index_requested_only_with_indexing(self):
        assert HAS_CHILD in compile_program(iocaste_clean(2)).needed_inverted
        cp = compile_program(iocaste_clean(2), Options(indexing=False))
        assert cp.needed_inverted == frozenset()

    def test_ground_optim_off_builds_single_variant(self):
        cp = compile_program(iocaste_clean(2), Options(ground_optim=False))
        ans = cp.preds[ANS]
        assert ans.det is None and ans.nondet is None
        assert ans.single

    def test_extra_facts_extend_signature(self):
        fact = Unary(PredName("patricide", True), Const("x9"))
        cp = compile_program(iocaste_clean(2), extra_facts=[fact])
        assert fact in cp.abox_facts
        assert "x9" in cp.universe

    def test_ill_formed_clause_rejected(self):
        kb = KnowledgeBase(
            tbox=[DLClause([Unary(PredName("c"), X), Unary(PredName("d"), Y)])],
            abox=[],
        )
        with pytest.raises(PlanError):
            compile_program(kb)

    def test_reserved_role_prefix_rejected(self):
        kb = parse_kb("base_r(a, b).")
        with pytest.raises(PlanError):
            compile_program(kb)

    def test_known_predicates(self):
        cp = compile_program(iocaste_clean(2))
        assert cp.known(ANS)
        assert cp.known(HAS_CHILD)
        assert not cp.known(PredName("ghost"))

    def test_role_inclusion_plan(self):
        kb = parse_kb("subrole(r, s).\nr(a, b).\np(X) | ~s(X, Y).")
        cp = compile_program(kb)
        rep = cp.role_info.rewrite[PredName("s", False, 2)][0]
        assert cp.role_plans[rep] == ((PredName("r", False, 2), False),)


class TestEmit:
    def test_happy_has_no_ancestor_plumbing(self):
        text = emit_readable(compile_program(happy()))
        assert "resolve_ancestor" not in text
        assert "push_" not in text
        assert "in_loop_context" not in text

    def test_happy_single_rule_with_components(self):
        text = emit_readable(compile_program(happy()))
        det_rules = [l for l in text.splitlines() if l.startswith("det_happy(")]
        assert len(det_rules) == 1
        assert "-> true )" in det_rules[0]  # independent checks are pruned
        assert "choice_happy(A)" in text
        assert "nondet_happy(" in text

    def test_atomic_predicates_read_from_store(self):
        text = emit_readable(compile_program(happy()))
        assert "clever(A) :- abox_clever(A)." in text
        assert "pretty(A) :- abox_pretty(A)." in text

    def test_iocaste_guards_emitted(self):
        text = emit_readable(compile_program(iocaste_clean(2)))
        assert "in_loop_context(patricide(A)), !, fail." in text
        assert "resolve_ancestor(not_patricide(A))" in text
        assert "push_context" in text or "push_ancres_context" in text
        assert "member_of_superset_ans(A)" in text

    def test_inverted_index_lookup_named(self):
        text = emit_readable(compile_program(iocaste_clean(2)))
        assert "idx_hasChild(" in text
        text_plain = emit_readable(
            compile_program(iocaste_clean(2), Options(indexing=False))
        )
        assert "idx_" not in text_plain

    def test_role_tables_line(self):
        text = emit_readable(compile_program(alcoholic(1)))
        assert "% role hasParent/2: tables [hasParent]" in text

    def test_orphan_resolves_against_context(self):
        text = emit_readable(compile_program(iocaste_clean(2)))
        assert "not_ans(A) :- resolve_ancestor(ans(A))." in text
