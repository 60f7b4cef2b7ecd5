"""Shared helpers: a small random knowledge-base generator and the
standard nine-entry options menu used by the benchmark tables."""

import random

from horndl.model import Binary, Const, DLClause, PredName, Unary, Var, validate_dl_clause
from horndl.parser import KnowledgeBase
from horndl.plan import Options

UNARIES = [PredName(n, False, 1) for n in "abcd"]
BINARIES = [PredName(n, False, 2) for n in ("r", "s")]
INDIVIDUALS = [Const(f"i{k}") for k in range(6)]

OPTIONS_MENU = {
    "base": Options(),
    "g": Options(ground_optim=False),
    "p": Options(projection=False),
    "f": Options(filtering=False),
    "i": Options(indexing=False),
    "o": Options(orphan="general"),
    "d": Options(decompose=False),
    "pd": Options(projection=False, decompose=False),
    "od": Options(orphan="general", decompose=False),
}


def random_clause(rng: random.Random):
    """One random well-formed clause, or None when the draw is ill-formed."""
    shape = rng.choice(["ground", "onevar", "role"])
    lits = []
    if shape == "ground":
        for _ in range(rng.randint(1, 3)):
            p = rng.choice(UNARIES)
            lits.append(Unary(PredName(p.base, rng.random() < 0.4, 1), rng.choice(INDIVIDUALS)))
    elif shape == "onevar":
        x = Var("X")
        for _ in range(rng.randint(2, 3)):
            p = rng.choice(UNARIES)
            lits.append(Unary(PredName(p.base, rng.random() < 0.4, 1), x))
    else:
        x, y = Var("X"), Var("Y")
        r = rng.choice(BINARIES)
        lits.append(Binary(PredName(r.base, True, 2), x, y))
        for v in (x, y):
            if rng.random() < 0.8:
                p = rng.choice(UNARIES)
                lits.append(Unary(PredName(p.base, rng.random() < 0.5, 1), v))
        if len(lits) == 1:
            lits.append(Unary(rng.choice(UNARIES), x))
    clause = DLClause(lits)
    return clause if not validate_dl_clause(clause) else None


def random_kb(rng: random.Random, max_clauses: int = 5, max_facts: int = 6) -> KnowledgeBase:
    tbox = []
    for _ in range(rng.randint(1, max_clauses)):
        clause = random_clause(rng)
        if clause:
            tbox.append(clause)
    abox = []
    for _ in range(rng.randint(0, max_facts)):
        if rng.random() < 0.6:
            abox.append(
                Unary(PredName(rng.choice(UNARIES).base, rng.random() < 0.3, 1), rng.choice(INDIVIDUALS))
            )
        else:
            abox.append(Binary(rng.choice(BINARIES), rng.choice(INDIVIDUALS), rng.choice(INDIVIDUALS)))
    return KnowledgeBase(tbox=tbox, abox=abox, role_axioms=[], queries=[])
