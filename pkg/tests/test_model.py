import pytest
from hypothesis import given, strategies as st

from horndl.model import (
    Binary,
    Const,
    DLClause,
    Equality,
    Neg,
    PredName,
    Signature,
    Unary,
    Var,
    canonical_literal,
    negate,
    signature_of,
    validate_dl_clause,
)

X, Y, Z = Var("X"), Var("Y"), Var("Z")


def pred(name, negated=False, arity=1):
    return PredName(name, negated, arity)


names = st.sampled_from(["p", "q", "r", "s"])
terms = st.one_of(
    st.sampled_from([X, Y]),
    st.sampled_from([Const("a"), Const("b"), Const("c")]),
)
unary_literals = st.builds(
    Unary, st.builds(PredName, names, st.booleans(), st.just(1)), terms
)
binary_literals = st.builds(
    Binary, st.builds(PredName, names, st.booleans(), st.just(2)), terms, terms
)
equalities = st.builds(Equality, st.booleans(), terms, terms)
literals = st.one_of(unary_literals, binary_literals, equalities)


class TestPredName:
    def test_text_round_trip(self):
        p = pred("happy")
        assert PredName.from_text(p.text, 1) == p
        n = pred("happy", True)
        assert n.text == "not_happy"
        assert PredName.from_text("not_happy", 1) == n

    def test_negate_is_involution(self):
        p = pred("p", False, 2)
        assert p.negate().negated
        assert p.negate().negate() == p

    def test_negate_flips_only_the_flag(self):
        p = pred("p", True, 2)
        n = p.negate()
        assert (n.base, n.arity) == (p.base, p.arity)
        assert n.negated != p.negated


class TestCanonicalLiteral:
    def test_outer_negation_folds_into_predicate(self):
        assert canonical_literal(Neg(Unary(pred("patricide"), X))) == Unary(
            pred("patricide", True), X
        )

    def test_double_negation_cancels(self):
        lit = Unary(pred("p"), X)
        assert canonical_literal(Neg(Neg(lit))) == lit

    def test_negated_equality_becomes_inequality(self):
        got = canonical_literal(Neg(Equality(True, X, Y)))
        assert got == Equality(False, X, Y)

    @given(literals)
    def test_idempotent(self, lit):
        once = canonical_literal(lit)
        assert canonical_literal(once) == once

    @given(literals)
    def test_negate_is_involution_on_literals(self, lit):
        assert negate(negate(lit)) == lit


IOCASTE_CLAUSE = DLClause(
    [
        Unary(pred("ans"), X),
        Neg(Binary(pred("hasChild", arity=2), X, Y)),
        Neg(Binary(pred("hasChild", arity=2), Y, Z)),
        Neg(Unary(pred("patricide"), Y)),
        Unary(pred("patricide"), Z),
    ]
)


class TestValidation:
    def test_iocaste_clause_is_well_formed(self):
        assert validate_dl_clause(IOCASTE_CLAUSE) == []

    def test_self_loop_role_clause_is_well_formed(self):
        clause = DLClause([Unary(pred("p"), X), Neg(Binary(pred("r", arity=2), X, X))])
        assert validate_dl_clause(clause) == []

    def test_two_variables_without_roles_violates_p2(self):
        clause = DLClause([Unary(pred("c"), X), Unary(pred("d"), Y)])
        assert any(v.rule == "p2" for v in validate_dl_clause(clause))

    def test_variable_outside_roles_violates_p3(self):
        clause = DLClause(
            [Neg(Binary(pred("r", arity=2), X, Y)), Unary(pred("c"), Z)]
        )
        assert any(v.rule == "p3" for v in validate_dl_clause(clause))

    def test_positive_role_with_concept_violates_p4(self):
        clause = DLClause([Binary(pred("r", arity=2), X, Y), Unary(pred("c"), X)])
        assert any(v.rule == "p4" for v in validate_dl_clause(clause))

    def test_role_inclusion_is_well_formed(self):
        clause = DLClause(
            [Binary(pred("s", arity=2), X, Y), Neg(Binary(pred("r", arity=2), X, Y))]
        )
        assert validate_dl_clause(clause) == []

    def test_p4_variable_sets_must_match(self):
        clause = DLClause(
            [Binary(pred("s", arity=2), X, Y), Neg(Binary(pred("r", arity=2), X, X))]
        )
        assert any(v.rule == "p4" for v in validate_dl_clause(clause))


class TestSignature:
    def test_iocaste_signature(self):
        sig = signature_of([IOCASTE_CLAUSE])
        assert sig.unary == {pred("ans"), pred("patricide"), pred("patricide", True)}
        assert sig.binary == {pred("hasChild", arity=2)}

    def test_empty(self):
        assert signature_of([]) == Signature()

    def test_union(self):
        a = signature_of([DLClause([Unary(pred("p"), X)])])
        b = signature_of([DLClause([Unary(pred("q"), X)])])
        assert (a | b).unary == {pred("p"), pred("q")}

    def test_contains(self):
        sig = signature_of([IOCASTE_CLAUSE])
        assert pred("ans") in sig
        assert pred("hasChild", arity=2) in sig
        assert pred("nothere") not in sig
