"""Benchmark knowledge-base families.

Every generator is deterministic given its parameters (and seed) and
returns a :class:`~horndl.parser.KnowledgeBase`; :func:`generate` renders
one to KB text from a compact spec string such as ``iocaste_clean(100)``.

Families:

* ``iocaste_clean(n)`` — one individual ``i`` with edges to every member of
  a chain ``e1 -> ... -> en -> t``, ``patricide(e1)`` and
  ``~patricide(t)``.  Querying ``ans(X)`` always yields exactly ``{i}``:
  somewhere along the chain the patricide status must flip, so ``i`` has a
  patricide child with a non-patricide child.  ``n = 2`` is the classic
  four-edge family tree.
* ``iocaste_noisy(seed, nodes, extra_edges, extra_concepts)`` — the clean
  pattern plus irrelevant noise that provably never changes the answer
  set: a three-node motif whose middle node is a patricide (known not to
  entail anything), random edges over a pool of fresh constants that carry
  no patricide information, and random patricide polarities over a second
  pool of fresh constants that carry no edges.
* ``happy`` — the fixed four-fact KB where ``happy(X)`` yields ``{kate}``.
* ``happy_large(n)`` — ``bob`` is ``kate``'s child and has ``n`` clever
  children, nobody is pretty; ``happy(X)`` has no solutions, and naive
  orderings waste time enumerating the clever children.
* ``alcoholic(n)`` — two ``hasParent`` chains of length ``n`` joined by a
  ``hasFriend`` edge; concluding ``~alcoholic(i1)`` needs an ancestor
  list as long as the chain, which exercises context-lookup cost.
"""

from __future__ import annotations

import random
import re

from .model import Binary, Const, PredName, Unary
from .parser import KnowledgeBase, parse_kb, render_kb

_HAS_CHILD = PredName("hasChild", False, 2)
_PATRICIDE = PredName("patricide", False, 1)
_NOT_PATRICIDE = PredName("patricide", True, 1)


def _edge(a: str, b: str) -> Binary:
    return Binary(_HAS_CHILD, Const(a), Const(b))


def iocaste_clean(n: int) -> KnowledgeBase:
    """The n-th clean family-tree pattern; ``ans(X)`` yields exactly ``i``."""
    if n < 1:
        raise ValueError(f"pattern size must be >= 1, got {n}")
    kb = parse_kb(
        "some(hasChild, patricide & some(hasChild, ~patricide)) => ans.\n"
        "?- ans(X).\n"
    )
    chain = [f"e{j}" for j in range(1, n + 1)] + ["t"]
    for node in chain[:-1]:
        kb.abox.append(_edge("i", node))
    for a, b in zip(chain, chain[1:]):
        kb.abox.append(_edge(a, b))
    kb.abox.append(Unary(_PATRICIDE, Const("e1")))
    kb.abox.append(Unary(_NOT_PATRICIDE, Const("t")))
    return kb


def iocaste_noisy(
    seed: int, nodes: int, extra_edges: int, extra_concepts: int
) -> KnowledgeBase:
    """A clean pattern drowned in noise that cannot change the answers.

    Noise edges connect only fresh constants that never get a patricide
    polarity, and noise polarities go only on fresh constants that never
    get an edge, so no new pattern can arise; the three-node motif with a
    patricide middle node entails nothing on its own.
    """
    if extra_edges < 0 or extra_concepts < 0:
        raise ValueError("noise counts must be >= 0")
    rng = random.Random(seed)
    kb = iocaste_clean(nodes)
    kb.abox.append(_edge("m1", "m2"))
    kb.abox.append(_edge("m2", "m3"))
    kb.abox.append(Unary(_PATRICIDE, Const("m2")))
    pool = max(2, extra_edges)
    edges: set[tuple[str, str]] = set()
    while len(edges) < extra_edges:
        a = f"f{rng.randrange(pool)}"
        b = f"f{rng.randrange(pool)}"
        edges.add((a, b))
    for a, b in sorted(edges):
        kb.abox.append(_edge(a, b))
    for k in range(extra_concepts):
        pred = _PATRICIDE if rng.random() < 0.5 else _NOT_PATRICIDE
        kb.abox.append(Unary(pred, Const(f"g{k}")))
    return kb


def happy() -> KnowledgeBase:
    """Fixed KB: ``kate`` is happy because ``bob`` has a clever, pretty child."""
    return parse_kb(
        "some(hasChild, some(hasChild, clever) & some(hasChild, pretty)) => happy.\n"
        "clever(lisa).\n"
        "pretty(lisa).\n"
        "hasChild(kate, bob).\n"
        "hasChild(bob, lisa).\n"
        "?- happy(X).\n"
    )


def happy_large(n: int) -> KnowledgeBase:
    """``bob`` has ``n`` clever children and no pretty ones; no one is happy."""
    if n < 1:
        raise ValueError(f"child count must be >= 1, got {n}")
    kb = parse_kb(
        "some(hasChild, some(hasChild, clever) & some(hasChild, pretty)) => happy.\n"
        "hasChild(kate, bob).\n"
        "?- happy(X).\n"
    )
    for j in range(1, n + 1):
        kb.abox.append(_edge("bob", f"lisa{j}"))
    for j in range(1, n + 1):
        kb.abox.append(Unary(PredName("clever", False, 1), Const(f"lisa{j}")))
    return kb


def alcoholic(n: int) -> KnowledgeBase:
    """Two parent chains joined by a friendship; ``~alcoholic(i1)`` holds.

    One of two friends must be non-alcoholic, and non-alcoholism propagates
    down a parent chain.  The friend ``i_{n+2}`` is also recorded as a
    parent of ``i_{n+1}`` (closing fact), so whichever friend is the
    non-alcoholic one, ``i_{n+1}`` and hence the whole first chain down to
    ``i1`` is non-alcoholic.  2n+2 role facts in total.
    """
    if n < 1:
        raise ValueError(f"chain length must be >= 1, got {n}")
    kb = parse_kb(
        "some(hasFriend, alcoholic) => ~alcoholic.\n"
        "some(hasParent, ~alcoholic) => ~alcoholic.\n"
        "?- ~alcoholic(i1).\n"
    )
    parent = PredName("hasParent", False, 2)
    friend = PredName("hasFriend", False, 2)
    for k in range(1, n + 1):
        kb.abox.append(Binary(parent, Const(f"i{k}"), Const(f"i{k + 1}")))
    kb.abox.append(Binary(friend, Const(f"i{n + 1}"), Const(f"i{n + 2}")))
    kb.abox.append(Binary(parent, Const(f"i{n + 1}"), Const(f"i{n + 2}")))
    for t in range(1, n + 1):
        kb.abox.append(Binary(parent, Const(f"i{n + 2 + t}"), Const(f"i{n + 1 + t}")))
    return kb


FAMILIES = {
    "iocaste_clean": (iocaste_clean, 1),
    "iocaste_noisy": (iocaste_noisy, 4),
    "happy": (happy, 0),
    "happy_large": (happy_large, 1),
    "alcoholic": (alcoholic, 1),
}

_SPEC_RE = re.compile(r"\s*([a-z_]+)\s*(?:\(\s*([-0-9,\s]*)\))?\s*\Z")


def parse_spec(text: str) -> tuple[str, tuple[int, ...]]:
    """Split ``family(arg, ...)`` into a family name and integer arguments."""
    m = _SPEC_RE.match(text)
    if not m:
        raise ValueError(f"bad generator spec {text!r}; expected family(n, ...)")
    name, raw_args = m.group(1), m.group(2)
    if name not in FAMILIES:
        raise ValueError(
            f"unknown family {name!r}; known: {', '.join(sorted(FAMILIES))}"
        )
    args = tuple(int(a) for a in raw_args.split(",") if a.strip()) if raw_args else ()
    _, arity = FAMILIES[name]
    if len(args) != arity:
        raise ValueError(f"family {name!r} takes {arity} argument(s), got {len(args)}")
    return name, args


def build(spec: str) -> KnowledgeBase:
    """Knowledge base for a spec string like ``alcoholic(100)``."""
    name, args = parse_spec(spec)
    fn, _ = FAMILIES[name]
    return fn(*args)


def generate(spec: str) -> str:
    """KB text for a spec string, with the parameters logged in a header."""
    name, args = parse_spec(spec)
    fn, _ = FAMILIES[name]
    header = f"% generated: {name}({', '.join(str(a) for a in args)})\n"
    return header + render_kb(fn(*args))
