"""Static analyses of the rule program, independent of stored facts.

Everything here consumes the contrapositive Horn program (roles-first
bodies) plus the *signature* of the fact store, and produces the
information the planner needs:

* role transformation — role-inclusion clauses are condensed into
  strongly-connected components; each component is represented by one
  predicate and every role invocation is rewritten to its representative
  (with arguments swapped for inverse orientation).  Role answers then
  reduce to unions of stored tables, so role goals need no ancestor
  machinery at all.
* predicate classification — atomic / orphan / query / general, plus the
  recursive, DNR (may be derived via ancestor resolution) and ANR (may
  serve as the ancestor in such a resolution) flags.
* filtering — removal of clauses that provably cannot contribute
  (false-orphan, two-orphan, contra-two-orphan), iterated to fixpoint.
* goal ranking, body ordering and body decomposition into independent
  components.
* projected labels and minisets — cheap supersets of a predicate's
  solutions, used to drive instance enumeration by instance checking.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional, Sequence, Union

from .model import (
    Binary,
    Const,
    Equality,
    Literal,
    PredName,
    Term,
    Unary,
    Var,
    negate,
    vars_of,
)
from .transform import HornClause, HornProgram, TransformError


# ---------------------------------------------------------------------------
# Call graph over unary predicates


def build_call_graph(rules: Sequence[HornClause]) -> dict[PredName, set[PredName]]:
    """head functor -> unary functors invoked in its bodies."""
    graph: dict[PredName, set[PredName]] = {}
    for clause in rules:
        edges = graph.setdefault(clause.head.pred, set())
        for goal in clause.body:
            if isinstance(goal, Unary):
                edges.add(goal.pred)
    return graph


def transitive_reach(graph: dict[PredName, set[PredName]]) -> dict[PredName, frozenset[PredName]]:
    """For each predicate, everything reachable via one or more calls."""
    cache: dict[PredName, frozenset[PredName]] = {}

    def reach(start: PredName) -> frozenset[PredName]:
        if start in cache:
            return cache[start]
        seen: set[PredName] = set()
        stack = list(graph.get(start, ()))
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            stack.extend(graph.get(node, ()))
        result = frozenset(seen)
        cache[start] = result
        return result

    for node in list(graph):
        reach(node)
    return cache


class _Reach:
    """Reachability with lazy lookup for predicates absent from the graph."""

    def __init__(self, graph: dict[PredName, set[PredName]]):
        self.graph = graph
        self.cache: dict[PredName, frozenset[PredName]] = {}

    def __getitem__(self, pred: PredName) -> frozenset[PredName]:
        cached = self.cache.get(pred)
        if cached is None:
            seen: set[PredName] = set()
            stack = list(self.graph.get(pred, ()))
            while stack:
                node = stack.pop()
                if node in seen:
                    continue
                seen.add(node)
                stack.extend(self.graph.get(node, ()))
            cached = frozenset(seen)
            self.cache[pred] = cached
        return cached

    def reaches(self, src: PredName, dst: PredName) -> bool:
        return dst in self[src]

    def reaches_or_is(self, src: PredName, dst: PredName) -> bool:
        return src == dst or dst in self[src]


# ---------------------------------------------------------------------------
# Classification


ATOMIC = "atomic"
ORPHAN = "orphan"
QUERY = "query"
GENERAL = "general"


@dataclass(frozen=True)
class PredClass:
    category: str
    recursive: bool = False
    dnr: bool = False
    anr: bool = False


@dataclass
class Classification:
    classes: dict[PredName, PredClass]
    reach: _Reach

    def category(self, pred: PredName) -> str:
        cls = self.classes.get(pred)
        return cls.category if cls else ORPHAN

    def __getitem__(self, pred: PredName) -> PredClass:
        return self.classes.get(pred, PredClass(ORPHAN))


def classify(rules: Sequence[HornClause], unary_abox: frozenset[PredName]) -> Classification:
    """Classify every unary predicate mentioned by the rules or the store.

    * atomic — defined by stored facts only;
    * orphan — invoked somewhere but has neither rules nor facts (such a
      goal can only succeed by ancestor resolution);
    * query — derivable bottom-up without any ancestor machinery: not
      recursive, not DNR, and every unary goal in its rules is atomic or
      query;
    * general — everything else, with the flags: recursive (reaches
      itself), DNR (reachable from its own negation, so its guard must
      consult the ancestor context), ANR (reaches its own negation, so its
      rules must push the goal onto the ancestor context).
    """
    graph = build_call_graph(rules)
    reach = _Reach(graph)
    defined = set(graph)
    invoked: set[PredName] = set()
    for clause in rules:
        for goal in clause.body:
            if isinstance(goal, Unary):
                invoked.add(goal.pred)
    universe = defined | invoked | set(unary_abox)

    classes: dict[PredName, PredClass] = {}
    for pred in universe:
        if pred not in defined:
            classes[pred] = PredClass(ATOMIC if pred in unary_abox else ORPHAN)

    pending = [p for p in universe if p not in classes]
    flags = {
        p: (
            reach.reaches(p, p),
            reach.reaches(p.negate(), p),  # DNR
            reach.reaches(p, p.negate()),  # ANR
        )
        for p in pending
    }
    # fixpoint from below: promote to query while possible
    category = {p: GENERAL for p in pending}
    changed = True
    while changed:
        changed = False
        for p in pending:
            if category[p] == QUERY:
                continue
            recursive, dnr, _ = flags[p]
            if recursive or dnr:
                continue
            ok = True
            for clause in rules:
                if clause.head.pred != p:
                    continue
                for goal in clause.body:
                    if isinstance(goal, Unary):
                        q = goal.pred
                        sub = classes.get(q)
                        if (
                            sub is not None
                            and sub.category == ATOMIC
                            # a stored predicate reachable from its own
                            # negation may still resolve against ancestors,
                            # so it cannot anchor a context-free evaluation
                            and not reach.reaches(q.negate(), q)
                        ):
                            continue
                        if category.get(q) == QUERY:
                            continue
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                category[p] = QUERY
                changed = True
    for p in pending:
        recursive, dnr, anr = flags[p]
        classes[p] = PredClass(category[p], recursive, dnr, anr)
    return Classification(classes, reach)


# ---------------------------------------------------------------------------
# Filtering


@dataclass(frozen=True)
class RemovedClause:
    clause: HornClause
    reason: str


def _orphans(rules: Sequence[HornClause], unary_abox: frozenset[PredName]) -> set[PredName]:
    defined = {c.head.pred for c in rules} | set(unary_abox)
    invoked = {
        g.pred for c in rules for g in c.body if isinstance(g, Unary)
    }
    return invoked - defined


def filter_program(
    rules: Sequence[HornClause], unary_abox: frozenset[PredName]
) -> tuple[list[HornClause], list[RemovedClause]]:
    """Remove clauses that can never contribute an answer.

    A clause is removed when it has one of three properties (computed
    against the current program, to fixpoint — a removal can orphan a
    predicate and expose further removals):

    * false-orphan: the body invokes an orphan O, the head is not O's
      negation, and the head is not reachable from O's negation — so no
      matching ancestor can ever be present;
    * two-orphan: the body invokes two orphans with different functors
      (they would need two different negated-orphan ancestors on one
      branch, which filtered programs cannot produce);
    * contra-two-orphan: the head is the negation of an orphan O1 and the
      body invokes an orphan O2 != O1 as well as the negation of some
      orphan O3 (the contrapositive of a two-orphan clause).
    """
    kept = list(rules)
    removed: list[RemovedClause] = []
    changed = True
    while changed:
        changed = False
        orphans = _orphans(kept, unary_abox)
        reach = _Reach(build_call_graph(kept))

        def eliminable(clause: HornClause) -> Optional[str]:
            head = clause.head.pred
            body_orphans = [
                g.pred for g in clause.body if isinstance(g, Unary) and g.pred in orphans
            ]
            for o in body_orphans:
                not_o = o.negate()
                if head != not_o and not reach.reaches(not_o, head):
                    return f"false-orphan ({o.text} unreachable context)"
            if len(set(body_orphans)) >= 2:
                return "two-orphan"
            o1 = head.negate()
            if o1 in orphans:
                has_other_orphan = any(o != o1 for o in body_orphans)
                has_negated_orphan = any(
                    isinstance(g, Unary) and g.pred.negate() in orphans for g in clause.body
                )
                if has_other_orphan and has_negated_orphan:
                    return "contra-two-orphan"
            return None

        survivors: list[HornClause] = []
        for clause in kept:
            reason = eliminable(clause)
            if reason is None:
                survivors.append(clause)
            else:
                removed.append(RemovedClause(clause, reason))
                changed = True
        kept = survivors
    return kept, removed


# ---------------------------------------------------------------------------
# Goal ranking and body ordering


RANK_ORPHAN = 1
RANK_GROUND_INEQ = 2
RANK_GROUND_ROLE = 3
RANK_GROUND_EASY_CONCEPT = 4
RANK_ROLE_ONE_UNBOUND = 5
RANK_ROLE_TWO_UNBOUND_HEAD = 6
RANK_ROLE_TWO_UNBOUND = 7
RANK_OPEN_EASY_CONCEPT = 8
RANK_GROUND_GENERAL = 9
RANK_OPEN_GENERAL = 10
RANK_OPEN_INEQ = 11


def _bound(term: Term, bound_vars: set[Var]) -> bool:
    return isinstance(term, Const) or term in bound_vars


def rank_goal(
    goal: Literal,
    bound_vars: set[Var],
    head_vars: set[Var],
    cls: Classification,
    orphan_as_general: bool = False,
) -> int:
    """Priority of a goal given the currently bound variables (lower runs
    first)."""
    if isinstance(goal, Equality):
        if _bound(goal.arg1, bound_vars) and _bound(goal.arg2, bound_vars):
            return RANK_GROUND_INEQ
        return RANK_OPEN_INEQ
    if isinstance(goal, Binary):
        unbound = [t for t in (goal.arg1, goal.arg2) if not _bound(t, bound_vars)]
        if not unbound:
            return RANK_GROUND_ROLE
        if len(unbound) == 1:
            return RANK_ROLE_ONE_UNBOUND
        if any(t in head_vars for t in unbound):
            return RANK_ROLE_TWO_UNBOUND_HEAD
        return RANK_ROLE_TWO_UNBOUND
    category = cls.category(goal.pred)
    ground = _bound(goal.arg, bound_vars)
    if category == ORPHAN and not orphan_as_general:
        return RANK_ORPHAN
    if category in (ATOMIC, QUERY):
        return RANK_GROUND_EASY_CONCEPT if ground else RANK_OPEN_EASY_CONCEPT
    return RANK_GROUND_GENERAL if ground else RANK_OPEN_GENERAL


@dataclass(frozen=True)
class Component:
    """Independent body part, checked for one solution and then discarded."""

    items: tuple


OrderedItem = Union[Literal, Component]


def _partition(goals: Sequence[tuple[int, Literal]], bound_vars: set[Var]) -> list[list[tuple[int, Literal]]]:
    """Group goals connected through variables not yet bound."""
    parent = list(range(len(goals)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    free = [vars_of(g) - bound_vars for _, g in goals]
    for i in range(len(goals)):
        for j in range(i + 1, len(goals)):
            if free[i] & free[j]:
                parent[find(i)] = find(j)
    groups: dict[int, list[tuple[int, Literal]]] = {}
    for i, item in enumerate(goals):
        groups.setdefault(find(i), []).append(item)
    return sorted(groups.values(), key=lambda part: part[0][0])


def order_body(
    body: Sequence[Literal],
    bound_vars: set[Var],
    head_vars: set[Var],
    output_vars: set[Var],
    cls: Classification,
    orphan_as_general: bool = False,
    decompose: bool = False,
) -> list[OrderedItem]:
    """Greedy highest-priority-first body ordering, optionally splitting the
    rest into independent components after every selection.

    A component containing an output variable (head/query variable) is
    inlined rather than wrapped, since its bindings are part of the answer.
    Orphan goals do not count as binding their variable.
    """
    indexed = list(enumerate(body))
    return _order(indexed, set(bound_vars), head_vars, output_vars, cls, orphan_as_general, decompose)


def _order(
    goals: list[tuple[int, Literal]],
    bound_vars: set[Var],
    head_vars: set[Var],
    output_vars: set[Var],
    cls: Classification,
    orphan_as_general: bool,
    decompose: bool,
) -> list[OrderedItem]:
    out: list[OrderedItem] = []
    goals = list(goals)
    while goals:
        # split off independent components before picking the next goal, so
        # an expensive part never sits inside another part's choice loop
        if decompose and len(goals) > 1:
            parts = _partition(goals, bound_vars)
            if len(parts) > 1:
                for part in parts:
                    sub = _order(
                        part, set(bound_vars), head_vars, output_vars, cls,
                        orphan_as_general, decompose,
                    )
                    part_vars: set[Var] = set()
                    for _, g in part:
                        part_vars |= vars_of(g)
                    if len(part) == 1:
                        out.append(part[0][1])
                    elif (part_vars - bound_vars) & output_vars:
                        out.extend(sub)
                    else:
                        out.append(Component(tuple(sub)))
                return out
        best = min(
            range(len(goals)),
            key=lambda i: (
                rank_goal(goals[i][1], bound_vars, head_vars, cls, orphan_as_general),
                goals[i][0],
            ),
        )
        _, goal = goals.pop(best)
        out.append(goal)
        is_orphan = (
            isinstance(goal, Unary)
            and cls.category(goal.pred) == ORPHAN
        )
        if not is_orphan:
            bound_vars |= vars_of(goal)
    return out


# ---------------------------------------------------------------------------
# Projection: labels, miniset graph, supersets


@dataclass(frozen=True)
class Disjunct:
    """One branch of a superset: conjunctive goals over the head variable."""

    head_var: Var
    goals: tuple[Literal, ...]


@dataclass(frozen=True)
class ConstsLabel:
    names: tuple[str, ...]


@dataclass(frozen=True)
class FunctorLabel:
    pred: PredName


ALL_INDIVIDUALS = "all-individuals"

Label = Union[Disjunct, ConstsLabel, FunctorLabel, str]


@dataclass(frozen=True)
class SupersetExpr:
    """Union of disjuncts, or the whole universe."""

    disjuncts: tuple[Union[Disjunct, ConstsLabel], ...] = ()
    everything: bool = False


def is_dnr_invocation(caller: PredName, goal_pred: PredName, reach: _Reach) -> bool:
    """Can this invocation succeed by ancestor resolution?  Yes iff the
    caller is reachable from (or is) the goal's negation."""
    return reach.reaches_or_is(goal_pred.negate(), caller)


def projected_label(clause: HornClause, cls: Classification) -> Label:
    """A set expression or predicate functor covering the clause's answers."""
    head_arg = clause.head.arg
    if isinstance(head_arg, Const):
        return ConstsLabel((head_arg.name,))
    w: list[Literal] = []
    for goal in clause.body:
        if isinstance(goal, Binary):
            if head_arg in vars_of(goal):
                w.append(goal)
        elif isinstance(goal, Unary):
            if (
                goal.arg == head_arg
                and cls.category(goal.pred) in (ATOMIC, QUERY)
                and not cls.reach.reaches(goal.pred.negate(), goal.pred)
            ):
                w.append(goal)
    if w:
        return Disjunct(head_arg, tuple(w))
    candidates = [
        g
        for g in clause.body
        if isinstance(g, Unary)
        and g.arg == head_arg
        and cls.category(g.pred) == GENERAL
        and not is_dnr_invocation(clause.head.pred, g.pred, cls.reach)
    ]
    if candidates:
        chosen = min(candidates, key=lambda g: (g.pred.negated, g.pred.base))
        return FunctorLabel(chosen.pred)
    return ALL_INDIVIDUALS


def _subsumes(a: Disjunct, b: Disjunct) -> bool:
    """Does disjunct ``a`` cover everything ``b`` covers?  True when some
    substitution fixing the head variable maps a's goals into b's."""
    import itertools

    a_vars = sorted({v for g in a.goals for v in vars_of(g)} - {a.head_var}, key=lambda v: v.name)
    b_terms: list[Term] = [b.head_var]
    for g in b.goals:
        for t in vars_of(g):
            if t not in b_terms:
                b_terms.append(t)
    b_goal_set = set(b.goals)

    def rename(goal: Literal, env: dict) -> Literal:
        def conv(t: Term) -> Term:
            if t == a.head_var:
                return b.head_var
            return env.get(t, t)

        if isinstance(goal, Unary):
            return Unary(goal.pred, conv(goal.arg))
        assert isinstance(goal, Binary)
        return Binary(goal.pred, conv(goal.arg1), conv(goal.arg2))

    for assignment in itertools.product(b_terms, repeat=len(a_vars)):
        env = dict(zip(a_vars, assignment))
        if all(rename(g, env) in b_goal_set for g in a.goals):
            return True
    return False


def _reduce_disjuncts(
    disjuncts: list[Union[Disjunct, ConstsLabel]]
) -> tuple[Union[Disjunct, ConstsLabel], ...]:
    consts: list[str] = []
    conjs: list[Disjunct] = []
    for d in disjuncts:
        if isinstance(d, ConstsLabel):
            consts.extend(d.names)
        elif d not in conjs:
            conjs.append(d)
    kept: list[Disjunct] = []
    for d in conjs:
        if any(_subsumes(k, d) for k in kept):
            continue
        kept = [k for k in kept if not _subsumes(d, k)]
        kept.append(d)
    out: list[Union[Disjunct, ConstsLabel]] = []
    if consts:
        out.append(ConstsLabel(tuple(sorted(set(consts)))))
    out.extend(kept)
    return tuple(out)


def miniset(
    pred: PredName,
    rules_by_pred: dict[PredName, list[HornClause]],
    unary_abox: frozenset[PredName],
    cls: Classification,
) -> SupersetExpr:
    """Superset of a predicate: union of the set labels reachable in the
    miniset graph (predicates point to their clause labels; a functor label
    points onwards to that predicate)."""
    head_var = Var("X")
    seen: set[PredName] = set()
    stack = [pred]
    disjuncts: list[Union[Disjunct, ConstsLabel]] = []
    while stack:
        p = stack.pop()
        if p in seen:
            continue
        seen.add(p)
        if p in unary_abox:
            disjuncts.append(Disjunct(head_var, (Unary(p, head_var),)))
        for clause in rules_by_pred.get(p, ()):
            label = projected_label(clause, cls)
            if label == ALL_INDIVIDUALS:
                return SupersetExpr(everything=True)
            if isinstance(label, FunctorLabel):
                stack.append(label.pred)
            else:
                disjuncts.append(label)
    return SupersetExpr(_reduce_disjuncts(disjuncts))


# ---------------------------------------------------------------------------
# Role transformation


_RoleNode = tuple[str, bool]  # (role name, inverted?)


def _inv(node: _RoleNode) -> _RoleNode:
    return (node[0], not node[1])


def _tarjan_scc(nodes: Iterable[_RoleNode], edges: dict[_RoleNode, set[_RoleNode]]) -> list[set[_RoleNode]]:
    index: dict[_RoleNode, int] = {}
    low: dict[_RoleNode, int] = {}
    on_stack: set[_RoleNode] = set()
    stack: list[_RoleNode] = []
    sccs: list[set[_RoleNode]] = []
    counter = [0]

    def strongconnect(root: _RoleNode) -> None:
        work = [(root, iter(sorted(edges.get(root, ()))))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for succ in it:
                if succ not in index:
                    index[succ] = low[succ] = counter[0]
                    counter[0] += 1
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, iter(sorted(edges.get(succ, ())))))
                    advanced = True
                    break
                if succ in on_stack:
                    low[node] = min(low[node], index[succ])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp: set[_RoleNode] = set()
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    comp.add(member)
                    if member == node:
                        break
                sccs.append(comp)

    for node in sorted(nodes):
        if node not in index:
            strongconnect(node)
    return sccs


@dataclass
class RoleInfo:
    """Result of the role transformation.

    ``rewrite`` maps every role functor to its representative and whether
    invocation arguments must be swapped.  ``flattened`` gives, per role
    functor, the stored tables whose union (with orientation) is exactly
    the role's answer set.  ``symmetric`` marks representatives whose
    component equals its own inverse.  ``clauses`` holds the rewritten
    role rules in readable Horn form, for auditing.
    """

    rewrite: dict[PredName, tuple[PredName, bool]] = field(default_factory=dict)
    flattened: dict[PredName, tuple[tuple[PredName, bool], ...]] = field(default_factory=dict)
    symmetric: set[PredName] = field(default_factory=set)
    clauses: dict[PredName, list[HornClause]] = field(default_factory=dict)
    representatives: set[PredName] = field(default_factory=set)


def transform_roles(
    rules: Sequence[HornClause],
    binary_abox: frozenset[PredName],
) -> tuple[list[HornClause], RoleInfo]:
    """Condense the role hierarchy and rewrite all role invocations.

    Role-defining rules (binary head, single positive role body goal) are
    turned into a graph over roles and their inverses; equivalent roles
    (one strongly connected component together with its inverse component)
    share a representative, the lexicographically least role name
    involved.  Concept rules have their role goals rewritten to
    representatives, and every role functor gets a flattened execution
    plan: the stored tables reachable below it, each tagged with an
    orientation.  Symmetric components contribute both orientations of
    every table.
    """
    role_rules = [c for c in rules if isinstance(c.head, Binary)]
    unary_rules = [c for c in rules if isinstance(c.head, Unary)]

    edges: dict[_RoleNode, set[_RoleNode]] = {}
    nodes: set[_RoleNode] = set()

    def add_node(name: str) -> None:
        nodes.add((name, False))
        nodes.add((name, True))

    for pred in binary_abox:
        add_node(pred.base)
    for clause in unary_rules:
        for goal in clause.body:
            if isinstance(goal, Binary):
                add_node(goal.pred.base)

    for clause in role_rules:
        head = clause.head
        if (
            len(clause.body) != 1
            or not isinstance(clause.body[0], Binary)
            or clause.body[0].pred.negated
            or head.pred.negated
        ):
            raise TransformError(f"not a plain role inclusion: {clause!r}")
        body = clause.body[0]
        hv = (head.arg1, head.arg2)
        bv = (body.arg1, body.arg2)
        if len(set(hv)) != 2 or set(hv) != set(bv):
            raise TransformError(f"role inclusion must relate two distinct variables: {clause!r}")
        add_node(head.pred.base)
        add_node(body.pred.base)
        straight = hv == bv
        sub, sup = body.pred.base, head.pred.base
        if straight:
            edges.setdefault((sub, False), set()).add((sup, False))
            edges.setdefault((sub, True), set()).add((sup, True))
        else:
            edges.setdefault((sub, False), set()).add((sup, True))
            edges.setdefault((sub, True), set()).add((sup, False))

    sccs = _tarjan_scc(nodes, edges)
    comp_of: dict[_RoleNode, int] = {}
    for i, comp in enumerate(sccs):
        for node in comp:
            comp_of[node] = i

    info = RoleInfo()

    def representative(node: _RoleNode) -> tuple[PredName, bool]:
        comp = sccs[comp_of[node]]
        inv_comp = {_inv(n) for n in comp}
        names = {n for (n, _) in comp} | {n for (n, _) in inv_comp}
        rep = min(names)
        swap = (rep, False) not in comp
        return PredName(rep, False, 2), swap

    # reflexive-transitive reachability over role nodes
    node_reach: dict[_RoleNode, set[_RoleNode]] = {}
    for start in nodes:
        seen = {start}
        stack = [start]
        while stack:
            n = stack.pop()
            for succ in edges.get(n, ()):
                if succ not in seen:
                    seen.add(succ)
                    stack.append(succ)
        node_reach[start] = seen

    role_names = sorted({n for (n, _) in nodes})
    for name in role_names:
        pred = PredName(name, False, 2)
        rep, swap = representative((name, False))
        info.rewrite[pred] = (rep, swap)
        comp = sccs[comp_of[(name, False)]]
        if _inv((name, False)) in comp:
            info.symmetric.add(rep)
        plan: list[tuple[PredName, bool]] = []
        for source in role_names:
            stored = PredName(source, False, 2)
            if stored not in binary_abox:
                continue
            if (name, False) in node_reach[(source, False)]:
                plan.append((stored, False))
            if (name, True) in node_reach[(source, False)]:
                plan.append((stored, True))
        info.flattened[pred] = tuple(plan)
        info.representatives.add(rep)

    # readable rewritten rules, for the audit dump
    def rewrite_goal(goal: Binary) -> Binary:
        rep, swap = info.rewrite[PredName(goal.pred.base, False, 2)]
        args = (goal.arg2, goal.arg1) if swap else (goal.arg1, goal.arg2)
        return Binary(PredName(rep.base, goal.pred.negated, 2), *args)

    x, y = Var("X"), Var("Y")
    for clause in role_rules:
        head = rewrite_goal(clause.head)
        body = rewrite_goal(clause.body[0])
        if head.pred == body.pred and (head.arg1, head.arg2) == (body.arg1, body.arg2):
            continue  # intra-component inclusion became a tautology
        rep_pred = head.pred
        if rep_pred in info.symmetric:
            head = Binary(PredName("base_" + rep_pred.base, False, 2), head.arg1, head.arg2)
        rewritten = HornClause(head, (body,), origin=clause.origin)
        bucket = info.clauses.setdefault(rep_pred, [])
        if rewritten not in bucket:
            bucket.append(rewritten)
    for rep in sorted(info.symmetric, key=lambda p: p.base):
        base = Binary(PredName("base_" + rep.base, False, 2), x, y)
        bucket = info.clauses.setdefault(rep, [])
        bucket.append(HornClause(Binary(rep, x, y), (base,)))
        bucket.append(HornClause(Binary(rep, x, y), (Binary(base.pred, y, x),)))

    rewritten_unary: list[HornClause] = []
    for clause in unary_rules:
        body = tuple(
            rewrite_goal(g) if isinstance(g, Binary) else g for g in clause.body
        )
        rewritten_unary.append(HornClause(clause.head, body, origin=clause.origin))
    return rewritten_unary, info


# ---------------------------------------------------------------------------
# Audit dump


def dump_analysis(
    rules: Sequence[HornClause],
    cls: Classification,
    removed: Sequence[RemovedClause],
    role_info: RoleInfo,
) -> str:
    lines: list[str] = []
    lines.append("== predicates ==")
    for pred in sorted(cls.classes, key=lambda p: (p.base, p.negated)):
        c = cls.classes[pred]
        flags = "".join(
            tag
            for tag, on in (("R", c.recursive), ("D", c.dnr), ("A", c.anr))
            if on
        )
        lines.append(f"{pred.text}/1: {c.category}" + (f" [{flags}]" if flags else ""))
    if role_info.rewrite:
        lines.append("== roles ==")
        for pred in sorted(role_info.rewrite, key=lambda p: p.base):
            rep, swap = role_info.rewrite[pred]
            symmetric = " symmetric" if rep in role_info.symmetric else ""
            arrow = f"{pred.base} -> {rep.base}" + (" (inverted)" if swap else "")
            tables = ", ".join(
                ("inv " if sw else "") + p.base for p, sw in role_info.flattened[pred]
            )
            lines.append(f"{arrow}{symmetric}; tables: [{tables}]")
    if removed:
        lines.append("== filtered out ==")
        for r in removed:
            lines.append(f"{r.clause!r}  ({r.reason})")
    lines.append("== rules ==")
    for clause in rules:
        lines.append(repr(clause))
    return "\n".join(lines) + "\n"
