"""Fact storage, separate from rule compilation.

Plans are compiled from rules plus the *signature* of the facts; the facts
themselves live behind the :class:`FactSource` contract and are only bound
to a plan at query time.  :class:`MemoryStore` is the in-memory
implementation: constants are interned to dense integer ids, unary
predicates become sets, binary predicates become pair lists with a forward
index and an optional inverted index (built only for predicates the plan
accesses by second argument).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .model import Binary, Const, Literal, PredName, Unary, canonical_literal


@dataclass(frozen=True)
class UnaryTable:
    members: frozenset[int]
    ordered: tuple[int, ...]


@dataclass
class BinaryTable:
    pairs: list[tuple[int, int]]
    pair_set: set[tuple[int, int]]
    forward: dict[int, list[int]]
    inverted: Optional[dict[int, list[int]]]
    firsts: tuple[int, ...] = ()
    seconds: tuple[int, ...] = ()


_EMPTY_UNARY = UnaryTable(frozenset(), ())
_EMPTY_BINARY = BinaryTable([], set(), {}, {})


class FactSource:
    """What a plan needs from a fact store.

    Constants are spoken of by integer id; ``const_name``/``const_id``
    translate.  ``binary_scan`` modes name which arguments are bound:
    ``bb`` membership test, ``bf`` forward image, ``fb`` inverse image,
    ``ff`` all pairs.
    """

    def const_id(self, name: str) -> Optional[int]:
        raise NotImplementedError

    def const_name(self, cid: int) -> str:
        raise NotImplementedError

    def universe(self) -> Sequence[int]:
        """All constant ids, in a deterministic order."""
        raise NotImplementedError

    def unary_contains(self, pred: PredName, cid: int) -> bool:
        return cid in self.unary_table(pred).members

    def unary_scan(self, pred: PredName) -> Sequence[int]:
        return self.unary_table(pred).ordered

    def binary_scan(self, pred: PredName, mode: str, key: Optional[int] = None):
        table = self.binary_table(pred)
        if mode == "bf":
            return table.forward.get(key, ())
        if mode == "fb":
            if table.inverted is not None:
                return table.inverted.get(key, ())
            return [a for (a, b) in table.pairs if b == key]
        if mode == "ff":
            return table.pairs
        raise ValueError(f"unknown scan mode {mode!r} (bb goes via binary_contains)")

    def binary_contains(self, pred: PredName, cid1: int, cid2: int) -> bool:
        return (cid1, cid2) in self.binary_table(pred).pair_set

    def project(self, pred: PredName, position: int = 1) -> Sequence[int]:
        """Distinct constants in one argument position, sorted by name."""
        if pred.arity == 1:
            return self.unary_table(pred).ordered
        table = self.binary_table(pred)
        return table.firsts if position == 1 else table.seconds

    # table accessors let the engine bind plans to raw structures once
    def unary_table(self, pred: PredName) -> UnaryTable:
        raise NotImplementedError

    def binary_table(self, pred: PredName) -> BinaryTable:
        raise NotImplementedError

    @property
    def signature(self) -> frozenset[PredName]:
        raise NotImplementedError


class MemoryStore(FactSource):
    def __init__(self) -> None:
        self._ids: dict[str, int] = {}
        self._names: list[str] = []
        self._unary: dict[PredName, UnaryTable] = {}
        self._binary: dict[PredName, BinaryTable] = {}
        self._signature: frozenset[PredName] = frozenset()
        self.unknown_projects: set[PredName] = set()

    def project(self, pred: PredName, position: int = 1) -> Sequence[int]:
        if pred not in self._signature:
            self.unknown_projects.add(pred)
            return ()
        return super().project(pred, position)

    @staticmethod
    def build(
        facts: Iterable[Literal],
        needs_inverted: frozenset[PredName] = frozenset(),
    ) -> "MemoryStore":
        store = MemoryStore()
        intern = store._intern
        unary: dict[PredName, set[int]] = {}
        binary: dict[PredName, list[tuple[int, int]]] = {}
        for fact in facts:
            fact = canonical_literal(fact)
            if isinstance(fact, Unary):
                unary.setdefault(fact.pred, set()).add(intern(fact.arg.name))
            elif isinstance(fact, Binary):
                if fact.pred.negated:
                    raise ValueError(f"negated role fact {fact!r} is not storable")
                binary.setdefault(fact.pred, []).append(
                    (intern(fact.arg1.name), intern(fact.arg2.name))
                )
            else:
                raise TypeError(f"not a storable fact: {fact!r}")
        name = store.const_name
        for pred, members in unary.items():
            ordered = tuple(sorted(members, key=name))
            store._unary[pred] = UnaryTable(frozenset(members), ordered)
        for pred, raw_pairs in binary.items():
            pairs = sorted(set(raw_pairs))
            forward: dict[int, list[int]] = {}
            for a, b in pairs:
                forward.setdefault(a, []).append(b)
            inverted: Optional[dict[int, list[int]]] = None
            if pred in needs_inverted:
                inverted = {}
                for a, b in pairs:
                    inverted.setdefault(b, []).append(a)
            firsts = tuple(sorted({a for a, _ in pairs}, key=name))
            seconds = tuple(sorted({b for _, b in pairs}, key=name))
            store._binary[pred] = BinaryTable(
                pairs, set(pairs), forward, inverted, firsts, seconds
            )
        store._signature = frozenset(unary) | frozenset(binary)
        return store

    def _intern(self, name: str) -> int:
        cid = self._ids.get(name)
        if cid is None:
            cid = len(self._names)
            self._ids[name] = cid
            self._names.append(name)
        return cid

    def const_id(self, name: str) -> Optional[int]:
        return self._ids.get(name)

    def const_name(self, cid: int) -> str:
        return self._names[cid]

    def universe(self) -> Sequence[int]:
        return sorted(range(len(self._names)), key=self._names.__getitem__)

    def unary_table(self, pred: PredName) -> UnaryTable:
        return self._unary.get(pred, _EMPTY_UNARY)

    def binary_table(self, pred: PredName) -> BinaryTable:
        return self._binary.get(pred, _EMPTY_BINARY)

    @property
    def signature(self) -> frozenset[PredName]:
        return self._signature
