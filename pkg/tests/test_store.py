import pytest

from horndl.generators import iocaste_clean
from horndl.model import Binary, Const, PredName, Unary
from horndl.store import MemoryStore

HAS_CHILD = PredName("hasChild", False, 2)
PATRICIDE = PredName("patricide", False, 1)
NOT_PATRICIDE = PredName("patricide", True, 1)


def names(store, ids):
    return [store.const_name(i) for i in ids]


def build_iocaste(needs_inverted=frozenset()):
    return MemoryStore.build(iocaste_clean(2).abox, needs_inverted)


class TestBuild:
    def test_signature(self):
        store = build_iocaste()
        assert store.signature == {HAS_CHILD, PATRICIDE, NOT_PATRICIDE}

    def test_constants_interned_and_translated(self):
        store = build_iocaste()
        cid = store.const_id("e1")
        assert cid is not None and store.const_name(cid) == "e1"
        assert store.const_id("missing") is None

    def test_universe_sorted_by_name(self):
        store = build_iocaste()
        assert names(store, store.universe()) == ["e1", "e2", "i", "t"]

    def test_duplicate_facts_deduplicated(self):
        facts = [Binary(HAS_CHILD, Const("a"), Const("b"))] * 3
        store = MemoryStore.build(facts)
        assert store.binary_scan(HAS_CHILD, "ff") == [
            (store.const_id("a"), store.const_id("b"))
        ]

    def test_negated_role_fact_rejected(self):
        with pytest.raises(ValueError):
            MemoryStore.build([Binary(PredName("r", True, 2), Const("a"), Const("b"))])


class TestUnaryAccess:
    def test_contains_and_scan(self):
        store = build_iocaste()
        e1 = store.const_id("e1")
        assert store.unary_contains(PATRICIDE, e1)
        assert not store.unary_contains(NOT_PATRICIDE, e1)
        assert names(store, store.unary_scan(NOT_PATRICIDE)) == ["t"]

    def test_unknown_predicate_is_empty(self):
        store = build_iocaste()
        assert list(store.unary_scan(PredName("ghost"))) == []
        assert not store.unary_contains(PredName("ghost"), 0)


class TestBinaryAccess:
    def test_forward_image(self):
        store = build_iocaste()
        i = store.const_id("i")
        assert names(store, store.binary_scan(HAS_CHILD, "bf", i)) == ["e1", "e2"]
        e2 = store.const_id("e2")
        assert names(store, store.binary_scan(HAS_CHILD, "bf", e2)) == ["t"]

    def test_inverse_image_without_index_falls_back(self):
        store = build_iocaste()
        e2 = store.const_id("e2")
        got = sorted(names(store, store.binary_scan(HAS_CHILD, "fb", e2)))
        assert got == ["e1", "i"]

    def test_inverse_image_with_index_agrees(self):
        plain = build_iocaste()
        indexed = build_iocaste(needs_inverted=frozenset({HAS_CHILD}))
        assert indexed.binary_table(HAS_CHILD).inverted is not None
        assert plain.binary_table(HAS_CHILD).inverted is None
        for name in ("e1", "e2", "t", "i"):
            key = plain.const_id(name)
            a = sorted(names(plain, plain.binary_scan(HAS_CHILD, "fb", key)))
            b = sorted(names(indexed, indexed.binary_scan(HAS_CHILD, "fb", key)))
            assert a == b

    def test_membership(self):
        store = build_iocaste()
        i, e1, t = (store.const_id(n) for n in ("i", "e1", "t"))
        assert store.binary_contains(HAS_CHILD, i, e1)
        assert not store.binary_contains(HAS_CHILD, i, t)

    def test_all_pairs_scan(self):
        store = build_iocaste()
        pairs = store.binary_scan(HAS_CHILD, "ff")
        assert len(pairs) == 4
        assert all(p in store.binary_table(HAS_CHILD).pair_set for p in pairs)

    def test_unknown_scan_mode_rejected(self):
        store = build_iocaste()
        with pytest.raises(ValueError):
            store.binary_scan(HAS_CHILD, "bb", 0)


class TestProjection:
    def test_binary_positions(self):
        store = build_iocaste()
        assert names(store, store.project(HAS_CHILD, 1)) == ["e1", "e2", "i"]
        assert names(store, store.project(HAS_CHILD, 2)) == ["e1", "e2", "t"]

    def test_unary_projection_is_scan(self):
        store = build_iocaste()
        assert store.project(PATRICIDE) == store.unary_scan(PATRICIDE)

    def test_unknown_predicate_recorded(self):
        store = build_iocaste()
        ghost = PredName("ghost")
        assert store.project(ghost) == ()
        assert ghost in store.unknown_projects
