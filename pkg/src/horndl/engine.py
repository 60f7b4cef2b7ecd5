"""Plan execution: an iterative machine running compiled plans over a store.

Each plan clause is translated once into a static chain of instruction
nodes; argument positions are register indices into a per-activation
register list, or interned constant ids.  A clause activation therefore
allocates only a register list and a *frame* — the registers plus the
return continuation, the cut barrier and the context scope — and walks the
prebuilt chain.  The machine keeps a mutable binding trail and a stack of
choicepoints.  Each choicepoint is a Python generator producing the
remaining ``(node, frame)`` continuations for one nondeterministic point
(clause alternatives, fact scans, role-table scans, superset candidates);
backtracking rewinds the trail to the choicepoint's mark and advances its
generator.  Goal-stack depth is bounded by the frame links, not by Python
recursion, so deep derivation chains are fine.

The two ancestor structures — the loop context (identical-goal elimination
for recursive predicates) and the resolution context (complement-ancestor
matching) — are global, with dictionary or list representation depending on
the ``hashing`` option.  Context pushes are scoped to the clause activation
that made them: an explicit exit instruction pops them when the body
completes, and both push and pop are trailed so backtracking restores the
exact state.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass
from typing import Optional, Sequence

from .analysis import ATOMIC, ORPHAN, order_body
from .interpreter import STEP_LIMIT_ENV, StepLimitExceeded
from .model import (
    Binary,
    Const,
    Equality,
    Literal,
    PredName,
    Unary,
    Var,
    canonical_literal,
)
from .plan import (
    CompiledPredicate,
    CompiledProgram,
    ComponentItem,
    FactLookup,
    NonIdentity,
    OrphanCheck,
    PushContext,
    RoleCall,
    UnaryCall,
    _ClauseBuilder,
)
from .store import FactSource, MemoryStore


class EngineError(RuntimeError):
    pass


class QueryError(EngineError):
    pass


class EngineInvariantError(EngineError):
    """A run-time assumption of the compiled form was violated."""


@dataclass
class Stats:
    loop_elims: int = 0
    ancres: int = 0
    orphan_ancres: int = 0
    solutions: int = 0  # successes before deduplication
    steps: int = 0
    runtime_ms: float = 0.0

    def to_lines(self) -> list[str]:
        return [
            f"loop={self.loop_elims}",
            f"ancres={self.ancres}",
            f"orphancres={self.orphan_ancres}",
            f"runtime_ms={self.runtime_ms:.3f}",
        ]


@dataclass
class QueryResult:
    variables: tuple[str, ...]
    answers: list[tuple[str, ...]]
    stats: Stats

    def __iter__(self):
        return iter(self.answers)


# ---------------------------------------------------------------------------
# Runtime terms


class Cell:
    __slots__ = ("val",)

    def __init__(self) -> None:
        self.val = None


def _deref(t):
    while type(t) is Cell:
        v = t.val
        if v is None:
            return t
        t = v
    return t


# ---------------------------------------------------------------------------
# Ancestor contexts


class _Context:
    """A multiset of (predicate, argument) ancestor entries.

    Predicates are represented by their runtime numbers (small ints), so
    every lookup hashes or compares plain integers.  With hashing, bound
    entries live in a counted dictionary and unbound ones on a small side
    list; per-predicate lists serve complement matching and are maintained
    only when the context is queried by predicate (the resolution context).
    Without hashing everything is one list scanned linearly.  Pushes and
    pops are strictly bracketed (LIFO), so pops always remove the most
    recent entry of each structure.
    """

    __slots__ = ("hashing", "entries", "bound", "side", "by_pred")

    def __init__(self, hashing: bool, track_by_pred: bool = True):
        self.hashing = hashing
        if hashing:
            self.bound: dict = {}
            self.side: list = []
            self.by_pred: Optional[dict] = {} if track_by_pred else None
        else:
            self.entries: list = []

    def push_record(self, rec) -> None:
        pred, t = rec
        if self.hashing:
            if type(t) is Cell:
                self.side.append(rec)
            else:
                self.bound[rec] = self.bound.get(rec, 0) + 1
            if self.by_pred is not None:
                self.by_pred.setdefault(pred, []).append(t)
        else:
            self.entries.append(rec)

    def pop_record(self, rec) -> None:
        pred, t = rec
        if self.hashing:
            if type(t) is Cell:
                self.side.pop()
            else:
                n = self.bound[rec] - 1
                if n:
                    self.bound[rec] = n
                else:
                    del self.bound[rec]
            if self.by_pred is not None:
                self.by_pred[pred].pop()
        else:
            self.entries.pop()

    def contains_identical(self, pred: int, slot) -> bool:
        t = _deref(slot)
        t_is_cell = type(t) is Cell
        if self.hashing:
            if not t_is_cell and (pred, t) in self.bound:
                return True
            for p, e in self.side:
                if p != pred:
                    continue
                d = _deref(e)
                if d is t or (type(d) is not Cell and not t_is_cell and d == t):
                    return True
            return False
        for p, e in self.entries:
            if p != pred:
                continue
            d = _deref(e)
            if d is t or (type(d) is not Cell and not t_is_cell and d == t):
                return True
        return False

    def complement_candidates(self, pred: int):
        if self.hashing:
            return self.by_pred.get(pred, ())
        return [e for p, e in self.entries if p == pred]


# ---------------------------------------------------------------------------
# Runtime plan forms

# instruction node kinds; every node is a tuple beginning with one of these
# and ending with the next node (or None for "return to the frame's caller").
# _DONE closes a clause body in one step: it optionally pops the activation's
# context scope, optionally cuts to the frame's barrier, and returns.
_CALL, _ROLE, _FACT, _ORPHAN, _NEQ, _PUSH, _ONCE, _DONE = range(8)

_FAIL = object()


class _RtPred:
    """Per-predicate runtime record: everything a call needs, precomputed."""

    __slots__ = (
        "cpred",
        "pred",
        "num",
        "neg_num",
        "loop_guard",
        "ancres_guard",
        "abox_table",
        "entry_kind",
        "entry_table",
        "single_mode",
        "bound_clauses",
        "nondet_clauses",
        "solo_bound",
        "solo_nondet",
        "use_superset",
        "ss_call",
        "ss_call_once",
    )


class RuntimeProgram:
    """A compiled program bound to one fact store.

    Plan clauses are translated once into static instruction chains whose
    argument specs are register indices (plain ints) or interned constant
    ids (wrapped in a 1-tuple); role calls and fact lookups point straight
    at the store's tables.  Constants mentioned by rules or queries but
    absent from the store get negative ids.
    """

    def __init__(self, compiled: CompiledProgram, store: FactSource):
        self.compiled = compiled
        self.store = store
        self._extra_ids: dict[str, int] = {}
        self._extra_names: list[str] = []
        self._rt_preds: dict[PredName, _RtPred] = {}
        self._superset_cache: dict[PredName, tuple[int, ...]] = {}
        self._role_cache: dict[PredName, tuple] = {}
        # ancestor contexts key their dictionaries by small integers rather
        # than predicate names; the numbering is fixed at translation time
        self._pred_nums: dict[PredName, int] = {}
        self._nums: list[PredName] = []

    def pred_num(self, pred: PredName) -> int:
        n = self._pred_nums.get(pred)
        if n is None:
            n = len(self._nums)
            self._pred_nums[pred] = n
            self._nums.append(pred)
        return n

    # -- constants

    def const_id(self, name: str) -> int:
        cid = self.store.const_id(name)
        if cid is not None:
            return cid
        cid = self._extra_ids.get(name)
        if cid is None:
            cid = -(len(self._extra_names) + 1)
            self._extra_ids[name] = cid
            self._extra_names.append(name)
        return cid

    def const_name(self, cid: int) -> str:
        if cid < 0:
            return self._extra_names[-cid - 1]
        return self.store.const_name(cid)

    # -- roles

    def role_plan(self, pred: PredName):
        plan = self._role_cache.get(pred)
        if plan is None:
            entries = self.compiled.role_plans.get(pred)
            if entries is None:
                if pred in self.store.signature:
                    entries = ((pred, False),)
                else:
                    entries = ()
            plan = tuple(
                (self.store.binary_table(t), swap)
                for t, swap in entries
                if self.store.binary_table(t).pairs
            )
            self._role_cache[pred] = plan
        return plan

    # -- predicates and clause translation

    def rtpred(self, pred: PredName) -> _RtPred:
        rp = self._rt_preds.get(pred)
        if rp is not None:
            return rp
        cpred = self.compiled.preds[pred]
        rp = _RtPred()
        rp.cpred = cpred
        rp.pred = pred
        rp.num = self.pred_num(pred)
        rp.neg_num = self.pred_num(pred.negate())
        rp.loop_guard = cpred.loop_guard
        rp.ancres_guard = cpred.ancres_guard
        rp.abox_table = self.store.unary_table(pred) if cpred.abox_link else None
        rp.entry_kind = cpred.entry_kind
        rp.entry_table = (
            self.store.unary_table(pred)
            if cpred.entry_kind in ("atomic", "fact")
            else None
        )
        single = cpred.single is not None
        rp.single_mode = single
        rp.use_superset = cpred.superset is not None and not cpred.ancres_guard
        variant = "single" if single else "det"
        rp.ss_call = (_CALL, rp, 0, variant, None)
        rp.ss_call_once = (_CALL, rp, 0, variant, (_DONE, False, True))
        # register before compiling bodies: clause bodies may call back
        # into this predicate (directly or mutually)
        self._rt_preds[pred] = rp
        bound_source = cpred.single if single else cpred.det
        rp.bound_clauses = tuple(
            self.compile_clause(c, pred) for c in bound_source or ()
        )
        if single:
            rp.nondet_clauses = rp.bound_clauses
        else:
            rp.nondet_clauses = tuple(
                self.compile_clause(c, pred) for c in cpred.nondet or ()
            )
        # a call whose only alternative is one clause activation needs no
        # choicepoint; the main loop activates it in place after ruling out
        # the guard and stored-fact alternatives at run time
        rp.solo_bound = rp.bound_clauses[0] if len(rp.bound_clauses) == 1 else None
        rp.solo_nondet = (
            rp.nondet_clauses[0] if len(rp.nondet_clauses) == 1 else None
        )
        return rp

    def compile_clause(self, clause, pred: PredName) -> tuple:
        vmap: dict[Var, int] = {}

        def spec(t):
            if isinstance(t, Const):
                return (self.const_id(t.name),)
            idx = vmap.get(t)
            if idx is None:
                idx = len(vmap)
                vmap[t] = idx
            return idx

        head_spec = spec(clause.head_arg)
        has_push = any(isinstance(it, PushContext) for it in clause.items)
        tail = None
        if clause.det_cut or has_push:
            tail = (_DONE, has_push, clause.det_cut)
        first = self.chain(clause.items, spec, tail, self.pred_num(pred), head_spec)
        head_is_var = type(head_spec) is int
        return (
            len(vmap),
            head_is_var,
            head_spec if head_is_var else head_spec[0],
            first,
            has_push,
        )

    def chain(self, items, spec, nxt, pred_num=None, head_spec=None):
        """A static instruction chain for a sequence of plan items."""
        tail = nxt
        for item in reversed(items):
            if isinstance(item, RoleCall):
                tail = (
                    _ROLE,
                    self.role_plan(item.pred),
                    spec(item.arg1),
                    spec(item.arg2),
                    tail,
                )
            elif isinstance(item, UnaryCall):
                tail = (_CALL, self.rtpred(item.pred), spec(item.arg), item.variant, tail)
            elif isinstance(item, FactLookup):
                tail = (_FACT, self.store.unary_table(item.pred), spec(item.arg), tail)
            elif isinstance(item, OrphanCheck):
                tail = (_ORPHAN, self.pred_num(item.pred.negate()), spec(item.arg), tail)
            elif isinstance(item, NonIdentity):
                tail = (_NEQ, spec(item.arg1), spec(item.arg2), tail)
            elif isinstance(item, PushContext):
                tail = (_PUSH, pred_num, head_spec, item.loop, item.ancres, tail)
            elif isinstance(item, ComponentItem):
                sub = self.chain(
                    item.items, spec, (_DONE, False, True), pred_num, head_spec
                )
                tail = (_ONCE, sub, tail)
            else:
                raise TypeError(f"cannot execute plan item {item!r}")
        return tail

    # -- superset candidate sets (fixed per store, computed on first use)

    def superset_ids(self, rp: _RtPred, machine_factory) -> tuple[int, ...]:
        got = self._superset_cache.get(rp.pred)
        if got is None:
            sp = rp.cpred.superset
            found: set[int] = set()
            for name in sp.consts:
                found.add(self.const_id(name))
            for d in sp.disjuncts:
                vmap: dict[Var, int] = {}

                def spec(t, vmap=vmap):
                    if isinstance(t, Const):
                        return (self.const_id(t.name),)
                    idx = vmap.get(t)
                    if idx is None:
                        idx = len(vmap)
                        vmap[t] = idx
                    return idx

                head_idx = spec(sp.head_var)
                first = self.chain(d, spec, None)
                machine = machine_factory()
                regs = [Cell() for _ in range(len(vmap))]
                head = regs[head_idx]
                for _ in machine.solutions(first, (regs, None, None, 0, None)):
                    val = _deref(head)
                    if type(val) is Cell:
                        raise EngineInvariantError(
                            f"superset branch of {rp.pred.text} left its variable unbound"
                        )
                    found.add(val)
            got = tuple(sorted(found, key=self.const_name))
            self._superset_cache[rp.pred] = got
        return got


# ---------------------------------------------------------------------------
# The machine


class Machine:
    def __init__(self, rt: RuntimeProgram, step_limit: Optional[int], stats: Stats):
        self.rt = rt
        self.compiled = rt.compiled
        self.options = rt.compiled.options
        self.trail: list = []
        self.cps: list = []
        # the loop context is never queried by predicate, so it skips the
        # per-predicate complement lists
        self.loop_ctx = _Context(self.options.hashing, track_by_pred=False)
        self.ancres_ctx = _Context(self.options.hashing)
        self.step_limit = step_limit
        self.stats = stats

    # -- bindings

    def _unify(self, a, b) -> bool:
        a, b = _deref(a), _deref(b)
        if a is b:
            return True
        if type(a) is Cell:
            a.val = b
            self.trail.append(a)
            return True
        if type(b) is Cell:
            b.val = a
            self.trail.append(b)
            return True
        return a == b

    # -- ancestor matching

    def _complement_matches(self, neg_num: int, slot):
        ctx = self.ancres_ctx
        t = _deref(slot)
        t_is_cell = type(t) is Cell
        if ctx.hashing and not t_is_cell:
            # ground goal: count identical bound ancestors in O(1) and scan
            # only the (at most one live) unbound side entries
            n = ctx.bound.get((neg_num, t), 0)
            m = None
            for p, e in ctx.side:
                if p != neg_num:
                    continue
                d = _deref(e)
                if type(d) is Cell or d == t:
                    n += 1
                    m = e
            if n > 1:
                self._ambiguous_ancestor(neg_num, n)
            if n:
                return t if m is None else m
            return None
        cands = ctx.complement_candidates(neg_num)
        if not cands:
            return None
        matches = []
        for e in cands:
            d = _deref(e)
            if type(d) is Cell or t_is_cell or d == t:
                matches.append(e)
        if len(matches) > 1:
            self._ambiguous_ancestor(neg_num, len(matches))
        return matches[0] if matches else None

    def _ambiguous_ancestor(self, neg_num: int, count: int):
        pred = self.rt._nums[neg_num].negate()
        raise EngineInvariantError(
            f"{count} ancestors match a {pred.text} goal; "
            "ancestor resolution is expected to be deterministic"
        )

    # -- alternative generators
    #
    # A generator is resumed only after the trail has been rewound to its
    # choicepoint's mark, so bindings made between yields never need an
    # explicit undo inside the generator body.

    def _call_alternatives(self, rp, t, clauses, barrier, ret_node, ret_frame):
        trail = self.trail
        ret = (ret_node, ret_frame)
        if rp.ancres_guard:
            match = self._complement_matches(rp.neg_num, t)
            if match is not None and self._unify(match, t):
                self.stats.ancres += 1
                yield ret
        table = rp.abox_table
        if table is not None:
            if type(t) is Cell:
                for cid in table.ordered:
                    t.val = cid
                    trail.append(t)
                    yield ret
            elif t in table.members:
                yield ret
        for nvars, head_is_var, hv, first, has_push in clauses:
            regs = [Cell() for _ in range(nvars)]
            if head_is_var:
                regs[hv] = t
            elif type(t) is Cell:
                t.val = hv
                trail.append(t)
            elif t != hv:
                continue
            yield (first, (regs, ret_node, ret_frame, barrier, [] if has_push else None))

    def _superset_alternatives(self, rp, cell, ret_node, ret_frame):
        # each candidate makes the call ground, so one proof per candidate
        # suffices; the single variant has no clause cuts of its own, hence
        # the cut back to this choicepoint after the call completes
        node = rp.ss_call_once if rp.single_mode else rp.ss_call
        ids = self.rt.superset_ids(rp, self._fresh)
        trail = self.trail
        cps = self.cps
        for cid in ids:
            cell.val = cid
            trail.append(cell)
            yield (node, ([cell], ret_node, ret_frame, len(cps), None))

    def _role_alternatives(self, plan, da, db, ret):
        trail = self.trail
        for table, swap in plan:
            a, b = (db, da) if swap else (da, db)
            a_bound = type(a) is not Cell
            b_bound = type(b) is not Cell
            if a_bound and b_bound:
                if (a, b) in table.pair_set:
                    yield ret
            elif a_bound:
                for y in table.forward.get(a, ()):
                    b.val = y
                    trail.append(b)
                    yield ret
            elif b_bound:
                inv = table.inverted
                if inv is not None:
                    cands = inv.get(b, ())
                else:
                    cands = [x for (x, y) in table.pairs if y == b]
                for x in cands:
                    a.val = x
                    trail.append(a)
                    yield ret
            elif a is b:
                for x, y in table.pairs:
                    if x == y:
                        a.val = x
                        trail.append(a)
                        yield ret
            else:
                for x, y in table.pairs:
                    a.val = x
                    b.val = y
                    trail.append(a)
                    trail.append(b)
                    yield ret

    def _fresh(self) -> "Machine":
        """A machine over the same program/store with empty contexts, used
        to enumerate context-free superset branches."""
        return Machine(self.rt, self.step_limit, self.stats)

    # -- the main loop

    def solutions(self, node, frame):
        """Yield once per proof of the chain rooted at ``node``; the
        frame's registers hold the bindings during each yield.

        ``frame`` is ``(registers, return_node, return_frame, cut_barrier,
        context_scope)``.  A node of None returns to the frame's caller; a
        frame of None means the whole chain succeeded.
        """
        stats = self.stats
        limit = self.step_limit
        if limit is None:
            limit = float("inf")
        trail = self.trail
        cps = self.cps
        loop_ctx = self.loop_ctx
        ancres_ctx = self.ancres_ctx
        steps = 0
        orphans = 0
        try:
            while True:
                if node is None:
                    if frame is not None:
                        node = frame[1]
                        frame = frame[2]
                        continue
                    stats.steps += steps
                    stats.orphan_ancres += orphans
                    steps = orphans = 0
                    yield
                    # fall through: backtrack into the next proof
                else:
                    steps += 1
                    if stats.steps + steps > limit:
                        raise StepLimitExceeded(f"engine exceeded {limit} steps")
                    k = node[0]

                    if k == _ROLE:
                        s = node[2]
                        a = frame[0][s] if type(s) is int else s[0]
                        while type(a) is Cell:
                            v = a.val
                            if v is None:
                                break
                            a = v
                        s = node[3]
                        b = frame[0][s] if type(s) is int else s[0]
                        while type(b) is Cell:
                            v = b.val
                            if v is None:
                                break
                            b = v
                        if type(a) is not Cell and type(b) is not Cell:
                            ok = False
                            for table, swap in node[1]:
                                if ((b, a) if swap else (a, b)) in table.pair_set:
                                    ok = True
                                    break
                            if ok:
                                node = node[4]
                                continue
                        else:
                            plan = node[1]
                            # single-table scans with one unbound side use a
                            # lightweight iterator choicepoint
                            scan = None
                            if len(plan) == 1:
                                table, swap = plan[0]
                                aa, bb = (b, a) if swap else (a, b)
                                if type(aa) is not Cell:
                                    scan = (table.forward.get(aa), bb)
                                elif (
                                    type(bb) is not Cell
                                    and table.inverted is not None
                                ):
                                    scan = (table.inverted.get(bb), aa)
                            if scan is not None:
                                cands, cell = scan
                                if cands:
                                    if len(cands) == 1:
                                        # sole candidate: bind in place
                                        cell.val = cands[0]
                                        trail.append(cell)
                                        node = node[4]
                                        continue
                                    cps.append(
                                        (
                                            len(trail),
                                            iter(cands),
                                            cell,
                                            (node[4], frame),
                                        )
                                    )
                                # no candidates: plain failure, no choicepoint
                            else:
                                cps.append(
                                    (
                                        len(trail),
                                        self._role_alternatives(
                                            node[1], a, b, (node[4], frame)
                                        ),
                                    )
                                )

                    elif k == _DONE:
                        if node[1]:
                            scope = frame[4]
                            while scope:
                                ctx, rec = scope.pop()
                                if ctx.hashing:
                                    if type(rec[1]) is Cell:
                                        ctx.side.pop()
                                    else:
                                        bnd = ctx.bound
                                        c = bnd[rec] - 1
                                        if c:
                                            bnd[rec] = c
                                        else:
                                            del bnd[rec]
                                    if ctx.by_pred is not None:
                                        ctx.by_pred[rec[0]].pop()
                                else:
                                    ctx.entries.pop()
                                trail.append(("-", ctx, rec, scope))
                        if node[2]:
                            del cps[frame[3] :]
                        node = frame[1]
                        frame = frame[2]
                        continue

                    elif k == _CALL:
                        rp = node[1]
                        s = node[2]
                        t = frame[0][s] if type(s) is int else s[0]
                        while type(t) is Cell:
                            v = t.val
                            if v is None:
                                break
                            t = v
                        if not rp.loop_guard:
                            hit = False
                        elif loop_ctx.hashing and not loop_ctx.side:
                            hit = (
                                type(t) is not Cell
                                and (rp.num, t) in loop_ctx.bound
                            )
                        else:
                            hit = loop_ctx.contains_identical(rp.num, t)
                        if hit:
                            stats.loop_elims += 1
                        else:
                            variant = node[3]
                            if type(t) is not Cell or variant == "nondet":
                                nondet = variant == "nondet"
                                solo = rp.solo_nondet if nondet else rp.solo_bound
                                tbl = rp.abox_table
                                if (
                                    solo is not None
                                    and (
                                        tbl is None
                                        or (
                                            type(t) is not Cell
                                            and t not in tbl.members
                                        )
                                    )
                                    and (
                                        not rp.ancres_guard
                                        or self._complement_matches(rp.neg_num, t)
                                        is None
                                    )
                                ):
                                    # sole alternative: activate without a
                                    # choicepoint
                                    nvars, hiv, hv, first, has_push = solo
                                    if hiv:
                                        if nvars == 2:
                                            regs = (
                                                [t, Cell()]
                                                if hv == 0
                                                else [Cell(), t]
                                            )
                                        elif nvars == 1:
                                            regs = [t]
                                        elif nvars == 3:
                                            if hv == 0:
                                                regs = [t, Cell(), Cell()]
                                            elif hv == 1:
                                                regs = [Cell(), t, Cell()]
                                            else:
                                                regs = [Cell(), Cell(), t]
                                        else:
                                            regs = [
                                                Cell() for _ in range(nvars)
                                            ]
                                            regs[hv] = t
                                    else:
                                        regs = [Cell() for _ in range(nvars)]
                                        if type(t) is Cell:
                                            t.val = hv
                                            trail.append(t)
                                        elif t != hv:
                                            regs = None  # head mismatch: fail
                                    if regs is not None:
                                        frame = (
                                            regs,
                                            node[4],
                                            frame,
                                            len(cps),
                                            [] if has_push else None,
                                        )
                                        node = first
                                        continue
                                else:
                                    clauses = (
                                        rp.nondet_clauses
                                        if nondet
                                        else rp.bound_clauses
                                    )
                                    cps.append(
                                        (
                                            len(trail),
                                            self._call_alternatives(
                                                rp,
                                                t,
                                                clauses,
                                                len(cps),
                                                node[4],
                                                frame,
                                            ),
                                        )
                                    )
                            elif variant == "entry":
                                ek = rp.entry_kind
                                if ek == "atomic" or ek == "fact":
                                    ordered = rp.entry_table.ordered
                                    if ordered:
                                        cps.append(
                                            (
                                                len(trail),
                                                iter(ordered),
                                                t,
                                                (node[4], frame),
                                            )
                                        )
                                elif ek == "superset":
                                    cps.append(
                                        (
                                            len(trail),
                                            self._superset_alternatives(
                                                rp, t, node[4], frame
                                            ),
                                        )
                                    )
                                elif ek != "empty":  # nondet / single
                                    cps.append(
                                        (
                                            len(trail),
                                            self._call_alternatives(
                                                rp,
                                                t,
                                                rp.nondet_clauses,
                                                len(cps),
                                                node[4],
                                                frame,
                                            ),
                                        )
                                    )
                            # internal call with an unbound argument: the
                            # superset is only complete for predicates that
                            # cannot resolve against the caller's ancestor
                            # context (non-DNR); otherwise enumerate via the
                            # unbound-order clause bodies, whose alternatives
                            # include the guard
                            elif rp.use_superset:
                                cps.append(
                                    (
                                        len(trail),
                                        self._superset_alternatives(
                                            rp, t, node[4], frame
                                        ),
                                    )
                                )
                            elif (
                                rp.solo_nondet is not None
                                and rp.abox_table is None
                                and (
                                    not rp.ancres_guard
                                    or self._complement_matches(rp.neg_num, t)
                                    is None
                                )
                            ):
                                # sole alternative: activate without a
                                # choicepoint (head spec is a variable or a
                                # constant; either binds the unbound goal)
                                nvars, hiv, hv, first, has_push = rp.solo_nondet
                                if hiv:
                                    if nvars == 2:
                                        regs = (
                                            [t, Cell()] if hv == 0 else [Cell(), t]
                                        )
                                    elif nvars == 1:
                                        regs = [t]
                                    elif nvars == 3:
                                        if hv == 0:
                                            regs = [t, Cell(), Cell()]
                                        elif hv == 1:
                                            regs = [Cell(), t, Cell()]
                                        else:
                                            regs = [Cell(), Cell(), t]
                                    else:
                                        regs = [Cell() for _ in range(nvars)]
                                        regs[hv] = t
                                else:
                                    regs = [Cell() for _ in range(nvars)]
                                    t.val = hv
                                    trail.append(t)
                                frame = (
                                    regs,
                                    node[4],
                                    frame,
                                    len(cps),
                                    [] if has_push else None,
                                )
                                node = first
                                continue
                            else:
                                cps.append(
                                    (
                                        len(trail),
                                        self._call_alternatives(
                                            rp,
                                            t,
                                            rp.nondet_clauses,
                                            len(cps),
                                            node[4],
                                            frame,
                                        ),
                                    )
                                )

                    elif k == _ONCE:
                        frame = (frame[0], node[2], frame, len(cps), frame[4])
                        node = node[1]
                        continue

                    elif k == _PUSH:
                        s = node[2]
                        t = frame[0][s] if type(s) is int else s[0]
                        while type(t) is Cell:
                            v = t.val
                            if v is None:
                                break
                            t = v
                        pred = node[1]
                        scope = frame[4]
                        if node[3]:
                            rec = (pred, t)
                            if loop_ctx.hashing:
                                if type(t) is Cell:
                                    loop_ctx.side.append(rec)
                                else:
                                    bnd = loop_ctx.bound
                                    bnd[rec] = bnd.get(rec, 0) + 1
                            else:
                                loop_ctx.entries.append(rec)
                            trail.append(("+", loop_ctx, rec, scope))
                            scope.append((loop_ctx, rec))
                        if node[4]:
                            rec = (pred, t)
                            if ancres_ctx.hashing:
                                if type(t) is Cell:
                                    ancres_ctx.side.append(rec)
                                else:
                                    bnd = ancres_ctx.bound
                                    bnd[rec] = bnd.get(rec, 0) + 1
                                bp = ancres_ctx.by_pred
                                lst = bp.get(pred)
                                if lst is None:
                                    bp[pred] = lst = []
                                lst.append(t)
                            else:
                                ancres_ctx.entries.append(rec)
                            trail.append(("+", ancres_ctx, rec, scope))
                            scope.append((ancres_ctx, rec))
                        node = node[5]
                        continue

                    elif k == _ORPHAN:
                        s = node[2]
                        t = frame[0][s] if type(s) is int else s[0]
                        while type(t) is Cell:
                            v = t.val
                            if v is None:
                                break
                            t = v
                        negp = node[1]
                        if ancres_ctx.hashing and type(t) is not Cell:
                            # ground goal: O(1) count of identical bound
                            # ancestors plus the tiny unbound side list
                            nm = ancres_ctx.bound.get((negp, t), 0)
                            md = None
                            for p, e in ancres_ctx.side:
                                if p != negp:
                                    continue
                                d = e
                                while type(d) is Cell:
                                    v = d.val
                                    if v is None:
                                        break
                                    d = v
                                if type(d) is Cell or d == t:
                                    nm += 1
                                    md = d
                            if nm > 1:
                                self._ambiguous_ancestor(negp, nm)
                            if nm:
                                if md is not None and type(md) is Cell:
                                    md.val = t
                                    trail.append(md)
                                orphans += 1
                                node = node[3]
                                continue
                            # no match: fail into backtracking
                            cands = None
                        elif ancres_ctx.hashing:
                            cands = ancres_ctx.by_pred.get(negp)
                        else:
                            cands = [e for p, e in ancres_ctx.entries if p == negp]
                        match = _FAIL
                        md = None
                        if cands:
                            t_is_cell = type(t) is Cell
                            for e in cands:
                                d = e
                                while type(d) is Cell:
                                    v = d.val
                                    if v is None:
                                        break
                                    d = v
                                if type(d) is Cell or t_is_cell or d == t:
                                    if match is not _FAIL:
                                        pname = self.rt._nums[negp].negate().text
                                        raise EngineInvariantError(
                                            f"multiple ancestors match a {pname} "
                                            "goal; ancestor resolution is expected "
                                            "to be deterministic"
                                        )
                                    match = e
                                    md = d
                        if match is not _FAIL:
                            if md is not t:
                                if type(md) is Cell:
                                    md.val = t
                                    trail.append(md)
                                elif type(t) is Cell:
                                    t.val = md
                                    trail.append(t)
                            orphans += 1
                            node = node[3]
                            continue

                    elif k == _FACT:
                        s = node[2]
                        t = frame[0][s] if type(s) is int else s[0]
                        while type(t) is Cell:
                            v = t.val
                            if v is None:
                                break
                            t = v
                        if type(t) is Cell:
                            ordered = node[1].ordered
                            if ordered:
                                cps.append(
                                    (len(trail), iter(ordered), t, (node[3], frame))
                                )
                        elif t in node[1].members:
                            node = node[3]
                            continue

                    elif k == _NEQ:
                        s = node[1]
                        t1 = frame[0][s] if type(s) is int else s[0]
                        while type(t1) is Cell:
                            v = t1.val
                            if v is None:
                                break
                            t1 = v
                        s = node[2]
                        t2 = frame[0][s] if type(s) is int else s[0]
                        while type(t2) is Cell:
                            v = t2.val
                            if v is None:
                                break
                            t2 = v
                        if type(t1) is Cell or type(t2) is Cell:
                            raise EngineInvariantError(
                                "inequality evaluated over an unbound variable"
                            )
                        if t1 != t2:
                            node = node[3]
                            continue

                    else:
                        raise EngineInvariantError(
                            f"unknown instruction kind {k!r}"
                        )

                # shared backtrack: rewind to the newest choicepoint and
                # resume its generator; exhausted generators are popped
                while cps:
                    cp = cps[-1]
                    mark = cp[0]
                    n = len(trail)
                    while n > mark:
                        n -= 1
                        e = trail.pop()
                        if type(e) is Cell:
                            e.val = None
                        else:
                            ctx = e[1]
                            rec = e[2]
                            if e[0] == "+":
                                if ctx.hashing:
                                    if type(rec[1]) is Cell:
                                        ctx.side.pop()
                                    else:
                                        bnd = ctx.bound
                                        c = bnd[rec] - 1
                                        if c:
                                            bnd[rec] = c
                                        else:
                                            del bnd[rec]
                                    if ctx.by_pred is not None:
                                        ctx.by_pred[rec[0]].pop()
                                else:
                                    ctx.entries.pop()
                                e[3].pop()
                            else:
                                if ctx.hashing:
                                    tt = rec[1]
                                    if type(tt) is Cell:
                                        ctx.side.append(rec)
                                    else:
                                        bnd = ctx.bound
                                        bnd[rec] = bnd.get(rec, 0) + 1
                                    bp = ctx.by_pred
                                    if bp is not None:
                                        lst = bp.get(rec[0])
                                        if lst is None:
                                            bp[rec[0]] = lst = []
                                        lst.append(tt)
                                else:
                                    ctx.entries.append(rec)
                                e[3].append((ctx, rec))
                    if len(cp) == 4:
                        # iterator choicepoint: bind the next candidate
                        val = next(cp[1], _FAIL)
                        if val is _FAIL:
                            cps.pop()
                            continue
                        cell = cp[2]
                        cell.val = val
                        trail.append(cell)
                        node, frame = cp[3]
                        break
                    nxt = next(cp[1], _FAIL)
                    if nxt is not _FAIL:
                        node, frame = nxt
                        break
                    cps.pop()
                else:
                    return
        finally:
            stats.steps += steps
            stats.orphan_ancres += orphans


# ---------------------------------------------------------------------------
# Query front end


class Engine:
    """Bind a compiled program to a fact store and answer queries."""

    def __init__(
        self,
        compiled: CompiledProgram,
        store: Optional[FactSource] = None,
        step_limit: Optional[int] = None,
    ):
        if store is None:
            store = MemoryStore.build(compiled.abox_facts, compiled.needed_inverted)
        self.compiled = compiled
        self.store = store
        self.rt = RuntimeProgram(compiled, store)
        if step_limit is None:
            raw = os.environ.get(STEP_LIMIT_ENV)
            step_limit = int(raw) if raw else None
        self.step_limit = step_limit

    def query(self, goals: Sequence[Literal]) -> QueryResult:
        goals = [canonical_literal(g) for g in goals]
        self._check_known(goals)
        variables: list[Var] = []
        for g in goals:
            if isinstance(g, Unary):
                terms = (g.arg,)
            elif isinstance(g, Binary):
                terms = (g.arg1, g.arg2)
            else:
                terms = (g.arg1, g.arg2)
            for t in terms:
                if isinstance(t, Var) and t not in variables:
                    variables.append(t)

        options = self.compiled.options
        cls = self.compiled.classification
        qvars = set(variables)
        raw = not options.classification
        if raw:
            ordered: list = list(goals)
        else:
            ordered = order_body(
                goals,
                set(),
                qvars,
                qvars,
                cls,
                orphan_as_general=(options.orphan == "general"),
                decompose=options.decompose,
            )
        builder = _ClauseBuilder(cls, options, raw)
        items, _ = builder._convert(ordered, set())
        plan_items = tuple(_entry_variants(items))

        vmap: dict[Var, int] = {}

        def spec(t):
            if isinstance(t, Const):
                return (self.rt.const_id(t.name),)
            idx = vmap.get(t)
            if idx is None:
                idx = len(vmap)
                vmap[t] = idx
            return idx

        first = self.rt.chain(plan_items, spec, None)
        for v in variables:
            spec(v)  # ensure every answer variable has a register
        stats = Stats()
        machine = Machine(self.rt, self.step_limit, stats)
        regs = [Cell() for _ in range(len(vmap))]

        started = time.perf_counter()
        answers: set[tuple[str, ...]] = set()
        var_cells = [regs[vmap[v]] for v in variables]
        universe: Optional[list[str]] = None
        for _ in machine.solutions(first, (regs, None, None, 0, None)):
            stats.solutions += 1
            # an unbound variable means the proof holds for every individual
            rows = [[]]
            for cell in var_cells:
                val = _deref(cell)
                if type(val) is Cell:
                    if universe is None:
                        universe = self._universe_names()
                    rows = [r + [name] for r in rows for name in universe]
                else:
                    name = self.rt.const_name(val)
                    rows = [r + [name] for r in rows]
            answers.update(tuple(r) for r in rows)
        stats.runtime_ms = (time.perf_counter() - started) * 1000.0
        return QueryResult(
            tuple(v.name for v in variables), sorted(answers), stats
        )

    def _universe_names(self) -> list[str]:
        """Every named individual: store constants plus the constants the
        rules mentioned before any clause filtering."""
        names = {self.store.const_name(cid) for cid in self.store.universe()}
        names.update(self.compiled.universe)
        return sorted(names)

    def retrieve(self, pred: PredName) -> QueryResult:
        """All certain instances of a concept."""
        return self.query([Unary(pred, Var("X"))])

    def _check_known(self, goals: Sequence[Literal]) -> None:
        for g in goals:
            if isinstance(g, Equality):
                if g.positive:
                    raise QueryError(
                        "positive equality goals are not supported in queries"
                    )
                continue
            if isinstance(g, Binary):
                if g.pred.negated:
                    raise QueryError(
                        f"negated role goal {g.pred.text} cannot be queried"
                    )
                if (
                    g.pred not in self.compiled.role_plans
                    and g.pred not in self.store.signature
                ):
                    raise QueryError(f"unknown role {g.pred.base}/2")
                continue
            pred = g.pred
            if (
                pred not in self.compiled.unary_signature
                and pred.negate() not in self.compiled.unary_signature
                and pred not in self.store.signature
            ):
                raise QueryError(f"unknown predicate {pred.text}/1")


def _entry_variants(items):
    """Top-level goals run with an empty context: unbound dispatch goes
    through the entry form of each predicate."""
    out = []
    for item in items:
        if isinstance(item, UnaryCall) and item.variant == "dispatch":
            out.append(UnaryCall(item.pred, item.arg, "entry"))
        elif isinstance(item, UnaryCall) and item.variant == "single":
            out.append(UnaryCall(item.pred, item.arg, "entry"))
        elif isinstance(item, ComponentItem):
            out.append(ComponentItem(tuple(_entry_variants(item.items))))
        else:
            out.append(item)
    return out


def run_query(
    compiled: CompiledProgram,
    goals: Sequence[Literal],
    store: Optional[FactSource] = None,
    step_limit: Optional[int] = None,
) -> QueryResult:
    return Engine(compiled, store, step_limit).query(goals)
