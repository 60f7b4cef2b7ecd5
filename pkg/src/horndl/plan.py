"""Query-plan compilation: rules + fact signature -> executable plan IR.

Compilation is fact-independent: it needs the rules and the *names* of the
stored predicates, never the facts.  The output is a
:class:`CompiledProgram` holding one :class:`CompiledPredicate` per unary
predicate plus flattened table plans for roles.  A compiled predicate
carries up to three clause lists:

* ``det`` — bodies ordered assuming the head argument is bound; each clause
  ends with a local prune (first proof wins);
* ``nondet`` — bodies ordered for an unbound head, no pruning;
* ``single`` — the only variant when the ground/unground split is disabled.

Around the clause lists sit the guard layers, each present only when the
predicate's classification requires it: a loop guard (recursive predicates),
an ancestor-resolution alternative (DNR predicates), a stored-fact link
(predicates present in the fact signature), and per-clause context pushes
(only for clauses that can actually lead back to the predicate or its
negation, placed as late as the body allows).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .analysis import (
    ATOMIC,
    GENERAL,
    ORPHAN,
    QUERY,
    Classification,
    Component,
    Disjunct,
    RemovedClause,
    RoleInfo,
    SupersetExpr,
    classify,
    filter_program,
    miniset,
    order_body,
    transform_roles,
)
from .model import (
    Binary,
    Const,
    DLClause,
    Equality,
    Literal,
    PredName,
    Term,
    Unary,
    Var,
    consts_of,
    signature_of,
    validate_dl_clause,
    vars_of,
)
from .parser import KnowledgeBase, kb_clauses
from .transform import (
    HornClause,
    HornProgram,
    facts_to_clauses,
    order_program_binary_first,
    pdl,
    prune_negated_binary_heads,
    split_parts,
)


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class Options:
    """The compilation toggles; first-listed values are the defaults."""

    decompose: bool = True
    indexing: bool = True
    projection: bool = True
    filtering: bool = True
    ground_optim: bool = True
    orphan: str = "first"  # "first" | "general"
    hashing: bool = True
    classification: bool = True

    def validate(self) -> None:
        if self.orphan not in ("first", "general"):
            raise PlanError(f"orphan must be 'first' or 'general', got {self.orphan!r}")
        if not self.classification:
            if self.projection:
                raise PlanError("projection requires classification")


# ---------------------------------------------------------------------------
# Plan IR


@dataclass(frozen=True)
class FactLookup:
    """Unary stored-predicate access."""

    pred: PredName
    arg: Term


@dataclass(frozen=True)
class RoleCall:
    """Binary goal; resolved against the role's flattened table plan.

    ``mode`` is the compile-time binding pattern (b = bound, f = free) used
    for index selection; the engine re-checks groundness at run time.
    ``use_inverted`` marks fb-mode lookups that should go through the
    inverted index."""

    pred: PredName
    arg1: Term
    arg2: Term
    mode: str
    use_inverted: bool


@dataclass(frozen=True)
class UnaryCall:
    pred: PredName
    arg: Term
    variant: str  # "det" | "single" | "dispatch"


@dataclass(frozen=True)
class OrphanCheck:
    pred: PredName
    arg: Term


@dataclass(frozen=True)
class NonIdentity:
    arg1: Term
    arg2: Term


@dataclass(frozen=True)
class PushContext:
    loop: bool
    ancres: bool


@dataclass(frozen=True)
class ComponentItem:
    items: tuple


PlanItem = Union[
    FactLookup, RoleCall, UnaryCall, OrphanCheck, NonIdentity, PushContext, ComponentItem
]


@dataclass(frozen=True)
class PlanClause:
    head_arg: Term
    items: tuple
    det_cut: bool
    origin: Optional[HornClause] = None


@dataclass(frozen=True)
class SupersetPlan:
    """Compiled superset: each disjunct is an ordered item tuple binding the
    head variable."""

    expr: SupersetExpr
    consts: tuple[str, ...]
    disjuncts: tuple[tuple, ...]  # tuples of PlanItems binding head_var
    head_var: Var = Var("__superset__")


@dataclass
class CompiledPredicate:
    pred: PredName
    category: str
    recursive: bool = False
    dnr: bool = False
    anr: bool = False
    loop_guard: bool = False
    ancres_guard: bool = False
    abox_link: bool = False
    det: Optional[tuple[PlanClause, ...]] = None
    nondet: Optional[tuple[PlanClause, ...]] = None
    single: Optional[tuple[PlanClause, ...]] = None
    superset: Optional[SupersetPlan] = None
    entry_kind: str = "empty"  # atomic|fact|superset|nondet|single|empty

    def bound_clauses(self) -> tuple[PlanClause, ...]:
        """Clause list for a bound-argument call."""
        return self.det if self.det is not None else (self.single or ())

    def unbound_clauses(self) -> tuple[PlanClause, ...]:
        return self.nondet if self.nondet is not None else (self.single or ())


@dataclass
class CompiledProgram:
    options: Options
    preds: dict[PredName, CompiledPredicate]
    role_plans: dict[PredName, tuple[tuple[PredName, bool], ...]]
    role_info: RoleInfo
    classification: Classification
    removed: list[RemovedClause]
    rules: list[HornClause]
    unary_abox: frozenset[PredName]
    binary_abox: frozenset[PredName]
    abox_facts: tuple[Literal, ...]
    needed_inverted: frozenset[PredName]
    #: every constant name the KB mentions, including in filtered-out clauses
    universe: tuple[str, ...] = ()
    #: every unary predicate the rules mention, including filtered-out ones
    unary_signature: frozenset[PredName] = frozenset()

    def predicate(self, pred: PredName) -> Optional[CompiledPredicate]:
        return self.preds.get(pred)

    def known(self, pred: PredName) -> bool:
        if pred.arity == 2:
            return pred in self.role_plans or pred in self.binary_abox
        return pred in self.preds


# ---------------------------------------------------------------------------
# Compilation


def _bound_term(t: Term, bound: set[Var]) -> bool:
    return isinstance(t, Const) or t in bound


class _ClauseBuilder:
    def __init__(self, cls: Classification, options: Options, raw: bool):
        self.cls = cls
        self.options = options
        self.raw = raw

    def build(self, clause: HornClause, kind: str, pred_flags) -> PlanClause:
        head_arg = clause.head.arg
        head_vars = {head_arg} if isinstance(head_arg, Var) else set()
        # the single variant serves bound and unbound callers alike; order
        # it for the bound case, which entry dispatch makes the common one
        bound: set[Var] = set(head_vars) if kind in ("det", "single") else set()
        outputs = head_vars - bound
        if self.raw:
            ordered: list = list(clause.body)
        else:
            ordered = order_body(
                clause.body,
                bound,
                head_vars,
                outputs,
                self.cls,
                orphan_as_general=(self.options.orphan == "general"),
                decompose=self.options.decompose,
            )
        items, _ = self._convert(ordered, set(bound))
        items = self._insert_push(items, clause.head.pred, pred_flags)
        return PlanClause(head_arg, tuple(items), det_cut=(kind == "det"), origin=clause)

    def _convert(self, ordered: Sequence, bound: set[Var]) -> tuple[list, set[Var]]:
        items: list = []
        for entry in ordered:
            if isinstance(entry, Component):
                sub, _ = self._convert(entry.items, set(bound))
                items.append(ComponentItem(tuple(sub)))
                continue  # component bindings are discarded
            goal = entry
            if isinstance(goal, Equality):
                if goal.positive:
                    raise PlanError(f"positive equality goal {goal!r} is not executable")
                items.append(NonIdentity(goal.arg1, goal.arg2))
            elif isinstance(goal, Binary):
                b1 = _bound_term(goal.arg1, bound)
                b2 = _bound_term(goal.arg2, bound)
                mode = ("b" if b1 else "f") + ("b" if b2 else "f")
                use_inv = mode == "fb" and self.options.indexing
                items.append(RoleCall(goal.pred, goal.arg1, goal.arg2, mode, use_inv))
                bound |= vars_of(goal)
            else:
                assert isinstance(goal, Unary)
                category = self.cls.category(goal.pred)
                # a stored predicate whose negation can carry ancestor
                # context down to it still needs the resolution guard
                guarded = self.cls.reach.reaches(goal.pred.negate(), goal.pred)
                if category == ATOMIC and not guarded:
                    items.append(FactLookup(goal.pred, goal.arg))
                    bound |= vars_of(goal)
                elif category == ORPHAN:
                    items.append(OrphanCheck(goal.pred, goal.arg))
                    # ancestor resolution may bind, but ordering does not rely on it
                else:
                    if not self.options.ground_optim or self.raw:
                        variant = "single"
                    elif _bound_term(goal.arg, bound):
                        variant = "det"
                    else:
                        variant = "dispatch"
                    items.append(UnaryCall(goal.pred, goal.arg, variant))
                    bound |= vars_of(goal)
        return items, bound

    def _insert_push(self, items: list, head: PredName, flags) -> list:
        need_loop, need_ancres, reach = flags
        if self.raw:
            push_loop, push_ancres = True, True
        else:
            funcs = _invoked_functors(items)
            closure: set[PredName] = set(funcs)
            for f in funcs:
                closure |= reach[f]
            push_loop = need_loop and head in closure
            push_ancres = need_ancres and head.negate() in closure
        if not (push_loop or push_ancres):
            return items
        position = self._push_position(items, head, reach)
        return items[:position] + [PushContext(push_loop, push_ancres)] + items[position:]

    def _push_position(self, items: list, head: PredName, reach) -> int:
        """Latest sound position: before the first item whose execution may
        consult the context for this predicate (or its negation)."""
        targets = {head, head.negate()}

        def consults(item) -> bool:
            if isinstance(item, ComponentItem):
                return any(consults(i) for i in item.items)
            if isinstance(item, OrphanCheck):
                return item.pred in targets or self.raw
            if isinstance(item, UnaryCall):
                if self.raw:
                    return True
                return bool(({item.pred} | reach[item.pred]) & targets)
            return False

        for i, item in enumerate(items):
            if consults(item):
                return i
        return len(items)


def _invoked_functors(items: Sequence) -> set[PredName]:
    out: set[PredName] = set()
    for item in items:
        if isinstance(item, ComponentItem):
            out |= _invoked_functors(item.items)
        elif isinstance(item, (UnaryCall, OrphanCheck, FactLookup)):
            out.add(item.pred)
    return out


def _all_easy_bodies(clauses: Sequence[HornClause], cls: Classification) -> bool:
    """True when every body goal is a role or an atomic concept."""
    for clause in clauses:
        for goal in clause.body:
            if isinstance(goal, Binary):
                continue
            if isinstance(goal, Unary) and cls.category(goal.pred) == ATOMIC:
                continue
            return False
    return True


def _entry_prunable(clause: HornClause, head: PredName, cls: Classification) -> bool:
    """Clause cannot succeed with an empty ancestor context: it contains an
    orphan goal whose negation is a different predicate."""
    for goal in clause.body:
        if isinstance(goal, Unary) and cls.category(goal.pred) == ORPHAN:
            if goal.pred.negate() != head:
                return True
    return False


def compile_program(
    kb: KnowledgeBase,
    options: Options = Options(),
    extra_facts: Sequence[Literal] = (),
) -> CompiledProgram:
    """Compile a knowledge base's rules into an executable plan.

    Only the *signature* of the facts is consulted; the fact list itself is
    carried along unchanged so a store can be built later (possibly merged
    with externally ingested facts via ``extra_facts``).
    """
    options.validate()
    clauses = kb_clauses(kb)
    for clause in clauses:
        violations = validate_dl_clause(clause)
        if violations:
            raise PlanError(
                f"ill-formed clause {clause!r}: "
                + "; ".join(f"{v.rule}: {v.message}" for v in violations)
            )
    horn = order_program_binary_first(prune_negated_binary_heads(pdl(clauses)))
    rules_part, facts_part = split_parts(horn)
    abox_facts = tuple(kb.abox) + tuple(extra_facts) + tuple(
        c.head for c in facts_part.clauses
    )
    facts_to_clauses(abox_facts)  # validates groundness/polarity
    fact_sig = signature_of(abox_facts)
    unary_abox, binary_abox = fact_sig.unary, fact_sig.binary

    for pred in binary_abox | {
        g.pred for c in rules_part for g in c.body if isinstance(g, Binary)
    }:
        if pred.base.startswith("base_"):
            raise PlanError(f"role name {pred.base!r} collides with the reserved base_ prefix")

    rules, role_info = transform_roles(list(rules_part.clauses), binary_abox)

    unary_signature: set[PredName] = set(unary_abox)
    for clause in rules:
        for lit in (clause.head, *clause.body):
            if isinstance(lit, Unary):
                unary_signature.add(lit.pred)

    removed: list[RemovedClause] = []
    if options.filtering and options.classification:
        rules, removed = filter_program(rules, unary_abox)

    cls = classify(rules, unary_abox)
    raw = not options.classification

    rules_by_pred: dict[PredName, list[HornClause]] = {}
    for clause in rules:
        rules_by_pred.setdefault(clause.head.pred, []).append(clause)

    builder = _ClauseBuilder(cls, options, raw)
    preds: dict[PredName, CompiledPredicate] = {}
    for pred in sorted(cls.classes, key=lambda p: (p.base, p.negated)):
        pc = cls[pred]
        cp = CompiledPredicate(pred, pc.category, pc.recursive, pc.dnr, pc.anr)
        cp.abox_link = pred in unary_abox
        if pc.category == ATOMIC:
            cp.entry_kind = "atomic"
            cp.ancres_guard = cls.reach.reaches(pred.negate(), pred)
            if options.ground_optim and not raw:
                cp.det = ()
                cp.nondet = ()
            else:
                cp.single = ()
            preds[pred] = cp
            continue
        if pc.category == ORPHAN:
            cp.entry_kind = "empty"
            preds[pred] = cp
            continue
        own = rules_by_pred.get(pred, [])
        if raw:
            cp.loop_guard = True
            cp.ancres_guard = True
        else:
            cp.loop_guard = pc.recursive
            cp.ancres_guard = pc.dnr
        flags = (cp.loop_guard or raw, pc.anr or raw, cls.reach)
        if options.ground_optim and not raw:
            cp.det = tuple(builder.build(c, "det", flags) for c in own)
            cp.nondet = tuple(builder.build(c, "nondet", flags) for c in own)
        else:
            cp.single = tuple(builder.build(c, "single", flags) for c in own)

        entry_rules = [c for c in own if not _entry_prunable(c, pred, cls)]
        if raw:
            cp.entry_kind = "single"
        elif not entry_rules:
            cp.entry_kind = "fact" if cp.abox_link else "empty"
        else:
            superset_wanted = (
                options.projection
                and pc.category == GENERAL
                and not _all_easy_bodies(own, cls)
            )
            if superset_wanted:
                expr = miniset(pred, rules_by_pred, unary_abox, cls)
                if not expr.everything:
                    cp.superset = _compile_superset(expr, builder, unary_abox)
            if cp.superset is not None:
                cp.entry_kind = "superset"
            elif options.ground_optim:
                cp.entry_kind = "nondet"
            else:
                cp.entry_kind = "single"
        preds[pred] = cp

    needed_inverted = _collect_inverted(preds, role_info) if options.indexing else frozenset()

    universe_names: set[str] = set()
    for clause in horn.clauses:
        for lit in (clause.head, *clause.body):
            universe_names.update(c.name for c in consts_of(lit))
    for fact in abox_facts:
        universe_names.update(c.name for c in consts_of(fact))

    return CompiledProgram(
        options=options,
        preds=preds,
        role_plans=dict(role_info.flattened),
        role_info=role_info,
        classification=cls,
        removed=removed,
        rules=list(rules),
        unary_abox=unary_abox,
        binary_abox=binary_abox,
        abox_facts=abox_facts,
        needed_inverted=needed_inverted,
        universe=tuple(sorted(universe_names)),
        unary_signature=frozenset(unary_signature),
    )


def _compile_superset(
    expr: SupersetExpr, builder: _ClauseBuilder, unary_abox: frozenset[PredName]
) -> SupersetPlan:
    consts: list[str] = []
    disjuncts: list[tuple] = []
    head_var = Var("__superset__")
    for d in expr.disjuncts:
        if not isinstance(d, Disjunct):
            consts.extend(d.names)
            continue
        goals = []
        for g in d.goals:
            goals.append(_rename_head_var(g, d.head_var, head_var))
        if (
            len(goals) == 1
            and isinstance(goals[0], Unary)
            and goals[0].pred in unary_abox
            and builder.cls.category(goals[0].pred) == GENERAL
        ):
            # stored-instances branch of a general predicate: scan the
            # table, never call back into the predicate's full machinery
            # (the call would re-enter superset enumeration).  Atomic and
            # query goals stay full calls — they may derive instances
            # beyond their tables and can never recurse into a superset.
            disjuncts.append((FactLookup(goals[0].pred, head_var),))
            continue
        ordered = order_body(
            goals, set(), {head_var}, {head_var}, builder.cls,
            orphan_as_general=(builder.options.orphan == "general"),
            decompose=False,
        )
        items, _ = builder._convert(ordered, set())
        disjuncts.append(tuple(items))
    return SupersetPlan(expr, tuple(sorted(set(consts))), tuple(disjuncts), head_var)


def _rename_head_var(goal: Literal, old: Var, new: Var) -> Literal:
    def conv(t: Term) -> Term:
        return new if t == old else t

    if isinstance(goal, Unary):
        return Unary(goal.pred, conv(goal.arg))
    assert isinstance(goal, Binary)
    return Binary(goal.pred, conv(goal.arg1), conv(goal.arg2))


def _collect_inverted(
    preds: dict[PredName, CompiledPredicate], role_info: RoleInfo
) -> frozenset[PredName]:
    needed: set[PredName] = set()

    def visit_items(items) -> None:
        for item in items:
            if isinstance(item, ComponentItem):
                visit_items(item.items)
            elif isinstance(item, RoleCall):
                plan = role_info.flattened.get(item.pred, ())
                for table, swap in plan:
                    if item.mode == "fb" and not swap and item.use_inverted:
                        needed.add(table)
                    elif item.mode == "bf" and swap:
                        needed.add(table)

    for cp in preds.values():
        for variant in (cp.det, cp.nondet, cp.single):
            for clause in variant or ():
                visit_items(clause.items)
        if cp.superset:
            for d in cp.superset.disjuncts:
                visit_items(d)
    return frozenset(needed)


# ---------------------------------------------------------------------------
# Readable emission


def emit_readable(cp: CompiledProgram) -> str:
    lines: list[str] = []
    for pred in sorted(cp.preds, key=lambda p: (p.base, p.negated)):
        compiled = cp.preds[pred]
        lines.extend(_emit_predicate(compiled, cp))
    for role in sorted(cp.role_plans, key=lambda p: p.base):
        plan = cp.role_plans[role]
        if cp.role_info.rewrite.get(role, (role, False))[0] != role:
            continue
        tables = ", ".join(("inv " if swap else "") + t.base for t, swap in plan)
        lines.append(f"% role {role.base}/2: tables [{tables}]")
        for clause in cp.role_info.clauses.get(role, ()):
            lines.append(repr(clause))
        lines.append("")
    return "\n".join(lines)


def _emit_predicate(compiled: CompiledPredicate, cp: CompiledProgram) -> list[str]:
    pred = compiled.pred
    name = pred.text
    flags = [
        tag
        for tag, on in (
            ("recursive", compiled.recursive),
            ("dnr", compiled.dnr),
            ("anr", compiled.anr),
        )
        if on
    ]
    lines = [f"% {name}/1: {compiled.category}" + (f" [{', '.join(flags)}]" if flags else "")]
    if compiled.category == ATOMIC:
        if compiled.ancres_guard:
            lines.append(f"{name}(A) :- resolve_ancestor({pred.negate().text}(A)).")
        lines.append(f"{name}(A) :- abox_{name}(A).")
        lines.append("")
        return lines
    if compiled.category == ORPHAN:
        lines.append(f"{name}(A) :- resolve_ancestor({pred.negate().text}(A)).")
        lines.append("")
        return lines

    if compiled.entry_kind == "fact":
        lines.append(f"choice_{name}(A) :- abox_{name}(A).")
    elif compiled.entry_kind == "superset":
        lines.append(
            f"choice_{name}(A) :-\n"
            f"    (   nonvar(A) -> det_{name}(A)\n"
            f"    ;   member_of_superset_{name}(A),\n"
            f"        det_{name}(A)\n"
            f"    )."
        )
        lines.extend(_emit_superset(compiled, name))
    elif compiled.entry_kind == "nondet":
        lines.append(
            f"choice_{name}(A) :-\n"
            f"    (   nonvar(A) -> det_{name}(A)\n"
            f"    ;   nondet_{name}(A)\n"
            f"    )."
        )
    elif compiled.entry_kind == "empty":
        lines.append(f"% {name}/1 has no derivable instances at top level")

    for variant_name, clauses in (
        ("det", compiled.det),
        ("nondet", compiled.nondet),
        ("", compiled.single),
    ):
        if clauses is None:
            continue
        head = f"{variant_name}_{name}" if variant_name else name
        if compiled.loop_guard:
            lines.append(f"{head}(A) :- in_loop_context({name}(A)), !, fail.")
        if compiled.ancres_guard:
            lines.append(f"{head}(A) :- resolve_ancestor({pred.negate().text}(A)).")
        if compiled.abox_link:
            lines.append(f"{head}(A) :- abox_{name}(A).")
        for clause in clauses:
            lines.append(_emit_clause(head, clause, compiled, cp))
    lines.append("")
    return lines


def _emit_superset(compiled: CompiledPredicate, name: str) -> list[str]:
    sp = compiled.superset
    assert sp is not None
    branches: list[str] = []
    if sp.consts:
        branches.append("member(X, [" + ", ".join(sp.consts) + "])")
    for d in sp.disjuncts:
        names = _Namer(first=sp.head_var)
        names.reserve("A")
        branches.append(", ".join(_emit_item(i, names, compiled) for i in d))
    body = "\n        ;   ".join(branches) if branches else "fail"
    return [
        f"member_of_superset_{name}(A) :-\n"
        f"    setof(X, (    {body}\n"
        f"        ), S),\n"
        f"    member(A, S)."
    ]


class _Namer:
    def __init__(self, first: Optional[Var] = None):
        self.names: dict[Var, str] = {}
        if first is not None:
            self.names[first] = "X"

    def __call__(self, t: Term) -> str:
        if isinstance(t, Const):
            from .parser import render_const

            return render_const(t)
        got = self.names.get(t)
        if got is None:
            # first unused letter; X is reserved for superset heads
            taken = set(self.names.values())
            pool = "ABCDEFGHIJKLMNOPQRSTUVW"
            got = next((c for c in pool if c not in taken), f"V{len(taken)}")
            self.names[t] = got
        return got

    def reserve(self, name: str) -> None:
        self.names[Var("__" + name)] = name


def _emit_clause(
    head: str, clause: PlanClause, compiled: CompiledPredicate, cp
) -> str:
    names = _Namer()
    head_arg = names(clause.head_arg)
    head_txt = f"{head}({head_arg})"
    parts = [
        _emit_item(item, names, compiled, head_arg) for item in clause.items
    ]
    if clause.det_cut:
        parts.append("!")
    if not parts:
        return f"{head_txt}."
    return f"{head_txt} :- " + ", ".join(parts) + "."


def _emit_item(item, names: _Namer, compiled: CompiledPredicate, head_arg: str = "A") -> str:
    if isinstance(item, PushContext):
        kind = {
            (True, True): "push_context",
            (True, False): "push_loop_context",
            (False, True): "push_ancres_context",
        }[(item.loop, item.ancres)]
        return f"{kind}({compiled.pred.text}({head_arg}))"
    if isinstance(item, ComponentItem):
        inner = ", ".join(_emit_item(i, names, compiled, head_arg) for i in item.items)
        return f"( {inner} -> true )"
    if isinstance(item, FactLookup):
        return f"{item.pred.text}({names(item.arg)})"
    if isinstance(item, RoleCall):
        if item.use_inverted and item.mode == "fb":
            return f"idx_{item.pred.text}({names(item.arg2)}, {names(item.arg1)})"
        return f"{item.pred.text}({names(item.arg1)}, {names(item.arg2)})"
    if isinstance(item, UnaryCall):
        prefix = {"det": "det_", "single": "", "dispatch": "choice_"}[item.variant]
        return f"{prefix}{item.pred.text}({names(item.arg)})"
    if isinstance(item, OrphanCheck):
        return f"resolve_ancestor({item.pred.negate().text}({names(item.arg)}))"
    if isinstance(item, NonIdentity):
        return f"{names(item.arg1)} \\== {names(item.arg2)}"
    raise TypeError(f"cannot emit {item!r}")
