"""Core data model: terms, literals, clauses and their well-formedness rules.

The clause language is function-free first-order logic restricted to unary
predicates (concepts), binary predicates (roles) and equality.  Negation is
kept *inside* predicate names as a boolean flag; the textual prefix ``not_``
only appears when reading or printing.  A clause is a disjunction of
literals; well-formed clauses additionally satisfy the structural properties
checked by :func:`validate_dl_clause`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Union


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Var:
    """A universally quantified variable (rendered with a capital letter)."""

    name: str

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    """An individual constant (rendered lower-case, quoted when needed)."""

    name: str

    def __repr__(self) -> str:
        return self.name


Term = Union[Var, Const]


# ---------------------------------------------------------------------------
# Predicate names


NOT_PREFIX = "not_"


@dataclass(frozen=True)
class PredName:
    """A possibly-negated predicate name.

    ``negated`` is semantic: ``PredName("Happy", True, 1)`` denotes the
    complement of the concept ``Happy``.  The ``not_`` spelling exists only
    at the I/O boundary (:meth:`text` / :meth:`from_text`).
    """

    base: str
    negated: bool = False
    arity: int = 1

    @property
    def text(self) -> str:
        return (NOT_PREFIX + self.base) if self.negated else self.base

    # predicate names key the hottest runtime dictionaries (ancestor
    # contexts); cache the hash and the complement on first use
    def __hash__(self) -> int:
        try:
            return self._hash  # type: ignore[attr-defined]
        except AttributeError:
            h = hash((self.base, self.negated, self.arity))
            object.__setattr__(self, "_hash", h)
            return h

    def negate(self) -> "PredName":
        try:
            return self._neg  # type: ignore[attr-defined]
        except AttributeError:
            neg = PredName(self.base, not self.negated, self.arity)
            object.__setattr__(self, "_neg", neg)
            return neg

    @staticmethod
    def from_text(text: str, arity: int) -> "PredName":
        if text.startswith(NOT_PREFIX) and len(text) > len(NOT_PREFIX):
            return PredName(text[len(NOT_PREFIX):], True, arity)
        return PredName(text, False, arity)

    def __repr__(self) -> str:
        return f"{self.text}/{self.arity}"


# ---------------------------------------------------------------------------
# Literals


@dataclass(frozen=True)
class Unary:
    pred: PredName
    arg: Term

    def __post_init__(self) -> None:
        if self.pred.arity != 1:
            raise ValueError(f"unary literal with non-unary predicate {self.pred!r}")

    def __repr__(self) -> str:
        return f"{self.pred.text}({self.arg!r})"


@dataclass(frozen=True)
class Binary:
    pred: PredName
    arg1: Term
    arg2: Term

    def __post_init__(self) -> None:
        if self.pred.arity != 2:
            raise ValueError(f"binary literal with non-binary predicate {self.pred!r}")

    def __repr__(self) -> str:
        return f"{self.pred.text}({self.arg1!r}, {self.arg2!r})"


@dataclass(frozen=True)
class Equality:
    """``arg1 = arg2`` when positive, ``arg1 != arg2`` when not."""

    positive: bool
    arg1: Term
    arg2: Term

    def __repr__(self) -> str:
        op = "=" if self.positive else "!="
        return f"{self.arg1!r} {op} {self.arg2!r}"


@dataclass(frozen=True)
class Neg:
    """An explicit outer negation, used only pre-canonicalisation."""

    lit: "Literal"

    def __repr__(self) -> str:
        return f"~({self.lit!r})"


Literal = Union[Unary, Binary, Equality, Neg]


def canonical_literal(lit: Literal) -> Literal:
    """Fold explicit negations into the literal itself.

    ``~P(x)`` becomes the complemented predicate applied to ``x``; ``~(x=y)``
    becomes the inequality; double negations cancel.  Literals without an
    outer ``Neg`` are already canonical and returned unchanged.
    """
    while isinstance(lit, Neg):
        inner = lit.lit
        if isinstance(inner, Neg):
            lit = inner.lit
        elif isinstance(inner, (Unary, Binary)):
            return negate(inner)
        elif isinstance(inner, Equality):
            return Equality(not inner.positive, inner.arg1, inner.arg2)
        else:
            raise TypeError(f"cannot canonicalise {lit!r}")
    return lit


def negate(lit: Literal) -> Literal:
    """The complement of a canonical literal (involution)."""
    if isinstance(lit, Unary):
        return Unary(lit.pred.negate(), lit.arg)
    if isinstance(lit, Binary):
        return Binary(lit.pred.negate(), lit.arg1, lit.arg2)
    if isinstance(lit, Equality):
        return Equality(not lit.positive, lit.arg1, lit.arg2)
    if isinstance(lit, Neg):
        return canonical_literal(lit.lit)
    raise TypeError(f"cannot negate {lit!r}")


def terms_of(lit: Literal) -> tuple[Term, ...]:
    lit = canonical_literal(lit)
    if isinstance(lit, Unary):
        return (lit.arg,)
    return (lit.arg1, lit.arg2)


def vars_of(lit: Literal) -> set[Var]:
    return {t for t in terms_of(lit) if isinstance(t, Var)}


def consts_of(lit: Literal) -> set[Const]:
    return {t for t in terms_of(lit) if isinstance(t, Const)}


def is_ground(lit: Literal) -> bool:
    return not vars_of(lit)


# ---------------------------------------------------------------------------
# Clauses


@dataclass(frozen=True)
class DLClause:
    """A disjunction of canonical literals, in source order."""

    literals: tuple[Literal, ...]

    def __init__(self, literals: Iterable[Literal]):
        object.__setattr__(
            self, "literals", tuple(canonical_literal(l) for l in literals)
        )

    @property
    def variables(self) -> set[Var]:
        out: set[Var] = set()
        for lit in self.literals:
            out |= vars_of(lit)
        return out

    @property
    def constants(self) -> set[Const]:
        out: set[Const] = set()
        for lit in self.literals:
            out |= consts_of(lit)
        return out

    def is_ground(self) -> bool:
        return not self.variables

    def __repr__(self) -> str:
        return " | ".join(repr(l) for l in self.literals)


@dataclass(frozen=True)
class Violation:
    """One well-formedness failure, named after the property it breaks."""

    rule: str
    message: str


def validate_dl_clause(clause: DLClause) -> list[Violation]:
    """Check the structural clause properties; empty list means well-formed.

    * ``shape``: only unary/binary/equality literals over Var/Const terms.
    * ``p2``: a clause without binary literals is ground, or mentions no
      constants and no (in)equalities and uses exactly one variable.
    * ``p3``: if the clause has a binary literal, every variable of the
      clause occurs in some binary literal.
    * ``p4``: if the clause has a positive binary literal B, all other
      literals are negative binary literals and together use exactly the
      variables of B.
    """
    out: list[Violation] = []
    lits = clause.literals
    if not lits:
        out.append(Violation("shape", "empty clause"))
        return out
    binaries = [l for l in lits if isinstance(l, Binary)]
    equalities = [l for l in lits if isinstance(l, Equality)]

    if not binaries:
        if not clause.is_ground():
            if clause.constants:
                out.append(
                    Violation("p2", "non-ground clause without roles mentions constants")
                )
            if equalities:
                out.append(
                    Violation("p2", "non-ground clause without roles contains (in)equalities")
                )
            if len(clause.variables) != 1:
                out.append(
                    Violation(
                        "p2",
                        "non-ground clause without roles must use exactly one variable, "
                        f"found {sorted(v.name for v in clause.variables)}",
                    )
                )
    else:
        bin_vars: set[Var] = set()
        for b in binaries:
            bin_vars |= vars_of(b)
        stray = clause.variables - bin_vars
        if stray:
            out.append(
                Violation(
                    "p3",
                    "variables outside every role literal: "
                    f"{sorted(v.name for v in stray)}",
                )
            )

    positive_binaries = [b for b in binaries if not b.pred.negated]
    if positive_binaries:
        if len(positive_binaries) > 1:
            out.append(Violation("p4", "more than one positive role literal"))
        b = positive_binaries[0]
        rest = [l for l in lits if l is not b]
        for l in rest:
            if not (isinstance(l, Binary) and l.pred.negated):
                out.append(
                    Violation(
                        "p4",
                        f"literal {l!r} beside a positive role literal is not a negative role",
                    )
                )
        rest_vars: set[Var] = set()
        for l in rest:
            rest_vars |= vars_of(l)
        if rest and rest_vars != vars_of(b):
            out.append(
                Violation("p4", "remaining literals do not use exactly the head role's variables")
            )
    return out


# ---------------------------------------------------------------------------
# Signatures


@dataclass(frozen=True)
class Signature:
    """The predicate names (with polarity and arity) occurring in a source."""

    unary: frozenset[PredName] = field(default_factory=frozenset)
    binary: frozenset[PredName] = field(default_factory=frozenset)

    def __contains__(self, pred: PredName) -> bool:
        return pred in self.unary or pred in self.binary

    def __or__(self, other: "Signature") -> "Signature":
        return Signature(self.unary | other.unary, self.binary | other.binary)


def _iter_literals(source) -> Iterable[Literal]:
    for item in source:
        if isinstance(item, DLClause):
            yield from item.literals
        elif hasattr(item, "head"):  # Horn clause duck-type
            if item.head is not None:
                yield item.head
            yield from item.body
        else:
            yield item


def signature_of(source) -> Signature:
    """Signature of an iterable of clauses, Horn clauses or literals."""
    un: set[PredName] = set()
    bi: set[PredName] = set()
    for lit in _iter_literals(source):
        lit = canonical_literal(lit)
        if isinstance(lit, Unary):
            un.add(lit.pred)
        elif isinstance(lit, Binary):
            bi.add(lit.pred)
    return Signature(frozenset(un), frozenset(bi))
