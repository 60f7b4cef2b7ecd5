"""Concrete syntax for knowledge bases.

A knowledge base is a sequence of statements, each ended by ``.``:

* clauses — disjunctions of literals: ``Ans(X) | ~hasChild(X, Y) | ...``
  Variables start with an upper-case letter, constants are lower-case
  identifiers (or single-quoted strings), ``~`` negates, ``|`` separates
  disjuncts, ``X = Y`` is equality.
* ground single-literal clauses are assertions (facts) and go to the fact
  part of the KB;
* inclusion sugar — ``lhs => C.`` where ``lhs`` is built from concept
  names, ``~``, ``&`` and ``some(role, lhs)``, and ``C`` is a possibly
  negated concept name.  :func:`normalize_axiom` lowers these to clauses.
* role inclusions — ``subrole(r, s).`` with either side possibly
  ``inv(...)``.
* queries — ``?- Goal1, Goal2, ... .`` (stored, runnable via the CLI).

``%`` starts a line comment.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from typing import Iterable, Union

from .model import (
    Binary,
    Const,
    DLClause,
    Equality,
    Literal,
    Neg,
    PredName,
    Term,
    Unary,
    Var,
    canonical_literal,
    is_ground,
    validate_dl_clause,
)


class KBSyntaxError(ValueError):
    """A syntax or well-formedness error, with source position."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"line {line}, column {column}: {message}" if line else message)
        self.message = message
        self.line = line
        self.column = column


# ---------------------------------------------------------------------------
# Role axioms and the knowledge base record


@dataclass(frozen=True)
class RoleRef:
    """A role name, possibly inverted."""

    name: str
    inverted: bool = False

    def __repr__(self) -> str:
        return f"inv({self.name})" if self.inverted else self.name


@dataclass(frozen=True)
class RoleAxiom:
    """``sub`` is a subrole of ``sup``."""

    sub: RoleRef
    sup: RoleRef

    def __repr__(self) -> str:
        return f"subrole({self.sub!r}, {self.sup!r})"


@dataclass
class KnowledgeBase:
    tbox: list[DLClause] = field(default_factory=list)
    abox: list[Literal] = field(default_factory=list)
    role_axioms: list[RoleAxiom] = field(default_factory=list)
    queries: list[tuple[Literal, ...]] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Inclusion sugar trees


@dataclass(frozen=True)
class ConceptAtom:
    name: str
    negated: bool = False


@dataclass(frozen=True)
class ConceptAnd:
    parts: tuple


@dataclass(frozen=True)
class ConceptSome:
    role: str
    sub: object


@dataclass(frozen=True)
class AxiomSugar:
    lhs: object
    rhs: ConceptAtom


def normalize_axiom(axiom: AxiomSugar) -> DLClause:
    """Lower ``lhs => C`` to the clause ``C(x) | ~lhs(x)``.

    The left-hand side is negated structurally: conjunctions flatten to a
    sequence of complemented literals, ``some(r, D)`` introduces a fresh
    variable ``y`` with a negated role literal ``~r(x, y)`` followed by the
    negation of ``D`` at ``y``.  Literal order follows the sugar tree
    left-to-right, right-hand side first.
    """
    fresh = _var_names()
    x = Var(next(fresh))
    rhs = Unary(PredName(axiom.rhs.name, axiom.rhs.negated, 1), x)
    lits = [rhs] + _negate_lhs(axiom.lhs, x, fresh)
    return DLClause(lits)


def _var_names():
    base = ["X", "Y", "Z", "U", "V", "W"]
    yield from base
    i = 1
    while True:
        for b in base:
            yield f"{b}{i}"
        i += 1


def _negate_lhs(tree, var: Var, fresh) -> list[Literal]:
    if isinstance(tree, ConceptAtom):
        return [Unary(PredName(tree.name, not tree.negated, 1), var)]
    if isinstance(tree, ConceptAnd):
        out: list[Literal] = []
        for part in tree.parts:
            out.extend(_negate_lhs(part, var, fresh))
        return out
    if isinstance(tree, ConceptSome):
        y = Var(next(fresh))
        role = Binary(PredName(tree.role, True, 2), var, y)
        return [role] + _negate_lhs(tree.sub, y, fresh)
    raise TypeError(f"not a concept tree: {tree!r}")


# ---------------------------------------------------------------------------
# Tokenizer


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*)
  | (?P<arrow>=>)
  | (?P<query>\?-)
  | (?P<lower>[a-z][A-Za-z0-9_]*)
  | (?P<upper>[A-Z_][A-Za-z0-9_]*)
  | (?P<quoted>'(?:[^'\\]|\\.)*')
  | (?P<punct>[().,|=~&])
    """,
    re.VERBOSE,
)

_IDENT_RE = re.compile(r"[a-z][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    line: int
    column: int


def _tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise KBSyntaxError(
                f"unexpected character {text[pos]!r}", line, pos - line_start + 1
            )
        kind = m.lastgroup
        value = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, value, line, m.start() - line_start + 1))
        line += value.count("\n")
        if "\n" in value:
            line_start = m.start() + value.rindex("\n") + 1
        pos = m.end()
    return tokens


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else Token("", "", 1, 1)
            raise KBSyntaxError("unexpected end of input", last.line, last.column)
        self.pos += 1
        return tok

    def expect(self, value: str) -> Token:
        tok = self.next()
        if tok.value != value:
            raise KBSyntaxError(f"expected {value!r}, found {tok.value!r}", tok.line, tok.column)
        return tok

    def error(self, message: str) -> KBSyntaxError:
        tok = self.peek() or (self.tokens[-1] if self.tokens else Token("", "", 1, 1))
        return KBSyntaxError(message, tok.line, tok.column)

    # -- statements

    def statement_has_arrow(self) -> bool:
        i = self.pos
        while i < len(self.tokens) and self.tokens[i].value != ".":
            if self.tokens[i].kind == "arrow":
                return True
            i += 1
        return False

    def parse_statement(self, kb: KnowledgeBase) -> None:
        tok = self.peek()
        assert tok is not None
        if tok.kind == "query":
            self.next()
            kb.queries.append(self.parse_goal_list())
            self.expect(".")
            return
        if (
            tok.value == "subrole"
            and self.pos + 1 < len(self.tokens)
            and self.tokens[self.pos + 1].value == "("
        ):
            kb.role_axioms.append(self.parse_role_axiom())
            return
        if self.statement_has_arrow():
            axiom = self.parse_axiom()
            clause = normalize_axiom(axiom)
            self._add_clause(kb, clause, tok)
            return
        clause = self.parse_clause()
        self._add_clause(kb, clause, tok)

    def _add_clause(self, kb: KnowledgeBase, clause: DLClause, tok: Token) -> None:
        violations = validate_dl_clause(clause)
        if violations:
            v = violations[0]
            raise KBSyntaxError(f"ill-formed clause ({v.rule}): {v.message}", tok.line, tok.column)
        if len(clause.literals) == 1 and clause.is_ground():
            lit = clause.literals[0]
            if isinstance(lit, Equality):
                raise KBSyntaxError("equality assertions are not supported", tok.line, tok.column)
            if isinstance(lit, Binary) and lit.pred.negated:
                raise KBSyntaxError(
                    "negated role assertions are not supported (reduced assertion form)",
                    tok.line,
                    tok.column,
                )
            kb.abox.append(lit)
        else:
            kb.tbox.append(clause)

    def parse_role_axiom(self) -> RoleAxiom:
        self.expect("subrole")
        self.expect("(")
        sub = self.parse_role_ref()
        self.expect(",")
        sup = self.parse_role_ref()
        self.expect(")")
        self.expect(".")
        return RoleAxiom(sub, sup)

    def parse_role_ref(self) -> RoleRef:
        tok = self.next()
        if tok.kind != "lower":
            raise KBSyntaxError(f"expected a role name, found {tok.value!r}", tok.line, tok.column)
        if tok.value == "inv" and self.peek() and self.peek().value == "(":
            self.next()
            inner = self.next()
            if inner.kind != "lower":
                raise KBSyntaxError(
                    f"expected a role name, found {inner.value!r}", inner.line, inner.column
                )
            self.expect(")")
            return RoleRef(inner.value, True)
        return RoleRef(tok.value, False)

    # -- clauses

    def parse_clause(self) -> DLClause:
        lits = [self.parse_disjunct()]
        while self.peek() and self.peek().value == "|":
            self.next()
            lits.append(self.parse_disjunct())
        self.expect(".")
        return DLClause(lits)

    def parse_disjunct(self) -> Literal:
        if self.peek() and self.peek().value == "~":
            self.next()
            return canonical_literal(Neg(self.parse_positive_literal()))
        return self.parse_positive_literal()

    def parse_positive_literal(self) -> Literal:
        tok = self.peek()
        if tok is None:
            raise self.error("expected a literal")
        if tok.kind in ("upper", "quoted") or (
            tok.kind == "lower"
            and not (self.pos + 1 < len(self.tokens) and self.tokens[self.pos + 1].value == "(")
        ):
            left = self.parse_term()
            self.expect("=")
            right = self.parse_term()
            return Equality(True, left, right)
        name = self.next()
        if name.kind != "lower":
            raise KBSyntaxError(
                f"expected a predicate name, found {name.value!r}", name.line, name.column
            )
        self.expect("(")
        args = [self.parse_term()]
        if self.peek() and self.peek().value == ",":
            self.next()
            args.append(self.parse_term())
        self.expect(")")
        if len(args) == 1:
            return Unary(PredName.from_text(name.value, 1), args[0])
        return Binary(PredName.from_text(name.value, 2), args[0], args[1])

    def parse_term(self) -> Term:
        tok = self.next()
        if tok.kind == "upper":
            return Var(tok.value)
        if tok.kind == "lower":
            return Const(tok.value)
        if tok.kind == "quoted":
            raw = tok.value[1:-1]
            return Const(raw.replace("\\'", "'").replace("\\\\", "\\"))
        raise KBSyntaxError(f"expected a term, found {tok.value!r}", tok.line, tok.column)

    # -- inclusion sugar

    def parse_axiom(self) -> AxiomSugar:
        lhs = self.parse_concept()
        self.expect("=>")
        negated = False
        if self.peek() and self.peek().value == "~":
            self.next()
            negated = True
        name = self.next()
        if name.kind != "lower":
            raise KBSyntaxError(
                f"expected a concept name, found {name.value!r}", name.line, name.column
            )
        self.expect(".")
        return AxiomSugar(lhs, ConceptAtom(name.value, negated))

    def parse_concept(self):
        parts = [self.parse_concept_prim()]
        while self.peek() and self.peek().value == "&":
            self.next()
            parts.append(self.parse_concept_prim())
        if len(parts) == 1:
            return parts[0]
        return ConceptAnd(tuple(parts))

    def parse_concept_prim(self):
        tok = self.next()
        if tok.value == "~":
            name = self.next()
            if name.kind != "lower":
                raise KBSyntaxError(
                    f"expected a concept name, found {name.value!r}", name.line, name.column
                )
            return ConceptAtom(name.value, True)
        if tok.value == "(":
            inner = self.parse_concept()
            self.expect(")")
            return inner
        if tok.value == "some":
            self.expect("(")
            role = self.next()
            if role.kind != "lower":
                raise KBSyntaxError(
                    f"expected a role name, found {role.value!r}", role.line, role.column
                )
            self.expect(",")
            sub = self.parse_concept()
            self.expect(")")
            return ConceptSome(role.value, sub)
        if tok.kind == "lower":
            return ConceptAtom(tok.value, False)
        raise KBSyntaxError(f"expected a concept, found {tok.value!r}", tok.line, tok.column)

    def parse_goal_list(self) -> tuple[Literal, ...]:
        goals = [self.parse_disjunct()]
        while self.peek() and self.peek().value == ",":
            self.next()
            goals.append(self.parse_disjunct())
        return tuple(goals)


def _check_arities(kb: KnowledgeBase) -> None:
    seen: dict[str, int] = {}
    def note(pred: PredName) -> None:
        prev = seen.setdefault(pred.base, pred.arity)
        if prev != pred.arity:
            raise KBSyntaxError(
                f"predicate {pred.base!r} used with arities {prev} and {pred.arity}"
            )
    for clause in kb.tbox:
        for lit in clause.literals:
            if isinstance(lit, (Unary, Binary)):
                note(lit.pred)
    for lit in kb.abox:
        if isinstance(lit, (Unary, Binary)):
            note(lit.pred)
    for ax in kb.role_axioms:
        note(PredName(ax.sub.name, False, 2))
        note(PredName(ax.sup.name, False, 2))
    for goals in kb.queries:
        for lit in goals:
            if isinstance(lit, (Unary, Binary)):
                note(lit.pred)


def parse_kb(text: str) -> KnowledgeBase:
    """Parse a knowledge base; raises :class:`KBSyntaxError` on failure."""
    tokens = _tokenize(text)
    parser = _Parser(tokens)
    kb = KnowledgeBase()
    while parser.peek() is not None:
        parser.parse_statement(kb)
    _check_arities(kb)
    return kb


def parse_query(text: str) -> tuple[Literal, ...]:
    """Parse a conjunctive query like ``Ans(X)`` or ``p(X), r(X, Y)``."""
    tokens = _tokenize(text)
    parser = _Parser(tokens)
    goals = parser.parse_goal_list()
    tok = parser.peek()
    if tok is not None and tok.value == ".":
        parser.next()
        tok = parser.peek()
    if tok is not None:
        raise KBSyntaxError(
            f"unexpected {tok.value!r} after query", tok.line, tok.column
        )
    return goals


def role_axiom_clause(axiom: RoleAxiom) -> DLClause:
    """The clause form of a role inclusion: ``sup(x,y) | ~sub(x,y)``."""
    x, y = Var("X"), Var("Y")

    def atom(ref: RoleRef, negated: bool) -> Binary:
        pred = PredName(ref.name, negated, 2)
        return Binary(pred, y, x) if ref.inverted else Binary(pred, x, y)

    return DLClause([atom(axiom.sup, False), atom(axiom.sub, True)])


def kb_clauses(kb: KnowledgeBase) -> list[DLClause]:
    """All clauses of the KB: stated clauses plus lowered role inclusions."""
    return list(kb.tbox) + [role_axiom_clause(ax) for ax in kb.role_axioms]


# ---------------------------------------------------------------------------
# Rendering (inverse of parsing, used for round-trips and generators)


def render_const(c: Const) -> str:
    if _IDENT_RE.match(c.name) and not c.name.startswith("not_"):
        return c.name
    return "'" + c.name.replace("\\", "\\\\").replace("'", "\\'") + "'"


def render_term(t: Term) -> str:
    return t.name if isinstance(t, Var) else render_const(t)


def render_literal(lit: Literal) -> str:
    lit = canonical_literal(lit)
    if isinstance(lit, Unary):
        body = f"{lit.pred.base}({render_term(lit.arg)})"
        return f"~{body}" if lit.pred.negated else body
    if isinstance(lit, Binary):
        body = f"{lit.pred.base}({render_term(lit.arg1)}, {render_term(lit.arg2)})"
        return f"~{body}" if lit.pred.negated else body
    if isinstance(lit, Equality):
        core = f"{render_term(lit.arg1)} = {render_term(lit.arg2)}"
        return core if lit.positive else f"~ {core}"
    raise TypeError(f"cannot render {lit!r}")


def render_kb(kb: KnowledgeBase) -> str:
    lines: list[str] = []
    for ax in kb.role_axioms:
        lines.append(f"subrole({ax.sub!r}, {ax.sup!r}).")
    for clause in kb.tbox:
        lines.append(" | ".join(render_literal(l) for l in clause.literals) + ".")
    for lit in kb.abox:
        lines.append(render_literal(lit) + ".")
    for goals in kb.queries:
        lines.append("?- " + ", ".join(render_literal(g) for g in goals) + ".")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# CSV fact ingestion


def ingest_abox_csv(source) -> list[Literal]:
    """Read assertions from CSV text, a file path, or an open file.

    The first row is a header ``pred,polarity,arity`` describing every
    following row: ``polarity`` is ``pos`` or ``neg``, ``arity`` 1 or 2.
    Data rows hold the constant(s).  Negated role assertions are rejected.
    """
    if isinstance(source, str) and "\n" not in source and source.endswith(".csv"):
        with open(source, newline="") as fh:
            rows = list(csv.reader(fh))
    elif isinstance(source, str):
        rows = list(csv.reader(io.StringIO(source)))
    else:
        rows = list(csv.reader(source))
    if not rows:
        raise KBSyntaxError("empty fact CSV: missing pred,polarity,arity header")
    header = [cell.strip() for cell in rows[0]]
    if len(header) != 3:
        raise KBSyntaxError(f"fact CSV header must be pred,polarity,arity, found {header}")
    pred_text, polarity, arity_text = header
    if polarity not in ("pos", "neg"):
        raise KBSyntaxError(f"polarity must be pos or neg, found {polarity!r}")
    if arity_text not in ("1", "2"):
        raise KBSyntaxError(f"arity must be 1 or 2, found {arity_text!r}")
    arity = int(arity_text)
    negated = polarity == "neg"
    if negated and arity == 2:
        raise KBSyntaxError("negated role assertions are not supported")
    pred = PredName(pred_text, negated, arity)
    if not _IDENT_RE.match(pred_text.removeprefix("not_")) or pred_text.startswith("not_"):
        raise KBSyntaxError(
            f"predicate name {pred_text!r} must be a plain identifier without not_ prefix "
            "(use polarity=neg)"
        )
    out: list[Literal] = []
    for i, row in enumerate(rows[1:], start=2):
        cells = [cell.strip() for cell in row]
        if len(cells) != arity:
            raise KBSyntaxError(f"row {i}: expected {arity} constant(s), found {len(cells)}")
        for cell in cells:
            if not cell:
                raise KBSyntaxError(f"row {i}: empty constant")
            if cell[0].isupper() or cell[0] == "_":
                raise KBSyntaxError(
                    f"row {i}: {cell!r} looks like a variable; constants start lower-case"
                )
        if arity == 1:
            out.append(Unary(pred, Const(cells[0])))
        else:
            out.append(Binary(pred, Const(cells[0]), Const(cells[1])))
    return out
