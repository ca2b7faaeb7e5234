"""Seeded random instances: theories, clauses, structures and grammars.

All generators take a ``random.Random`` so that families are reproducible.
"""

from __future__ import annotations

import random
from typing import Sequence

from .core import (
    BOTTOM,
    Atom,
    FinStructure,
    GeneralClause,
    HornClause,
    Signature,
    UniversalSentence,
    atoms_variables,
)

VARS = ("x", "y", "z", "w")


def random_signature(rng: random.Random, max_symbols: int = 3, max_arity: int = 2) -> Signature:
    n = rng.randint(1, max_symbols)
    names = ["P", "Q", "R", "S", "T"][:n]
    return Signature({name: rng.randint(1, max_arity) for name in names})


def random_atom(rng: random.Random, sig: Signature, variables: Sequence[str]) -> Atom:
    name = rng.choice(sorted(sig.symbols))
    return Atom(name, tuple(rng.choice(variables) for _ in range(sig.arity(name))))


def random_premise(rng, sig, variables, max_atoms: int = 3) -> set[Atom]:
    k = rng.randint(1, max_atoms)
    return {random_atom(rng, sig, variables) for _ in range(k)}


def random_horn_clause(
    rng: random.Random,
    sig: Signature,
    max_vars: int = 3,
    max_atoms: int = 3,
    p_bottom: float = 0.3,
    range_restricted: bool = True,
) -> HornClause:
    vs = VARS[: rng.randint(1, max_vars)] if max_vars <= len(VARS) else [f"x{i}" for i in range(max_vars)]
    prem = random_premise(rng, sig, vs, max_atoms)
    if rng.random() < p_bottom:
        return HornClause(prem, BOTTOM)
    pool = sorted(atoms_variables(prem)) if range_restricted else list(vs)
    concl = random_atom(rng, sig, pool)
    if concl in prem:
        return HornClause(prem, BOTTOM)
    return HornClause(prem, concl)


def random_horn_theory(
    rng: random.Random,
    sig: Signature | None = None,
    max_clauses: int = 3,
    max_vars: int = 3,
    max_atoms: int = 3,
    p_bottom: float = 0.3,
) -> UniversalSentence:
    sig = sig or random_signature(rng)
    clauses = [
        random_horn_clause(rng, sig, max_vars, max_atoms, p_bottom)
        for _ in range(rng.randint(1, max_clauses))
    ]
    return UniversalSentence(sig, clauses)


def random_query(rng: random.Random, sig: Signature, max_vars: int = 4, max_atoms: int = 4) -> HornClause:
    """A candidate clause for entailment checks; its conclusion may use any of its variables."""
    vs = [f"v{i}" for i in range(rng.randint(1, max_vars))]
    prem = random_premise(rng, sig, vs, max_atoms)
    if rng.random() < 0.2:
        return HornClause(prem, BOTTOM)
    return HornClause(prem, random_atom(rng, sig, sorted(atoms_variables(prem))))


def random_universal_sentence(
    rng: random.Random,
    sig: Signature | None = None,
    max_clauses: int = 2,
    max_vars: int = 3,
    max_negatives: int = 2,
    max_positives: int = 3,
) -> UniversalSentence:
    """Clauses with up to ``max_positives`` disjuncts (possibly Horn)."""
    sig = sig or Signature({"P": 1, "Q": 1, "R": 2})
    clauses = []
    for _ in range(rng.randint(1, max_clauses)):
        vs = VARS[: rng.randint(1, max_vars)]
        neg = {random_atom(rng, sig, vs) for _ in range(rng.randint(0, max_negatives))}
        pos = {random_atom(rng, sig, vs) for _ in range(rng.randint(1, max_positives))}
        pos -= neg
        if not pos:
            clauses.append(HornClause(neg, BOTTOM))
        elif len(pos) == 1:
            clauses.append(HornClause(neg, next(iter(pos))))
        else:
            clauses.append(GeneralClause(neg, pos))
    return UniversalSentence(sig, clauses)


def random_structure(rng: random.Random, sig: Signature, size: int, density: float = 0.3) -> FinStructure:
    import itertools

    domain = [f"e{i}" for i in range(size)]
    rels = {}
    for name, k in sig.items():
        rels[name] = {t for t in itertools.product(domain, repeat=k) if rng.random() < density}
    return FinStructure(sig, domain, rels)


def random_connected_theory(rng: random.Random, sig: Signature | None = None, max_clauses: int = 3) -> UniversalSentence:
    """Horn theory whose every clause has a connected premise graph."""
    from .jep import is_connected_clause

    sig = sig or Signature({"P": 1, "R": 2})
    clauses: list[HornClause] = []
    target = rng.randint(1, max_clauses)
    while len(clauses) < target:
        c = random_horn_clause(rng, sig, max_vars=3, max_atoms=3, p_bottom=0.4)
        # single-variable clauses are connected trivially; keep them rare
        if len(c.variables) < 2 and rng.random() < 0.8:
            continue
        if is_connected_clause(c) and c not in clauses:
            clauses.append(c)
    return UniversalSentence(sig, clauses)


def random_jep_theory(rng: random.Random) -> UniversalSentence:
    """Small theories over ``P/1, R/2`` with three-variable clauses; about one
    in ten fails the JEP."""
    sig = Signature({"P": 1, "R": 2})
    clauses = []
    for _ in range(rng.randint(1, 3)):
        prem: set[Atom] = set()
        k = rng.randint(1, 3)
        while len(prem) < k:
            if rng.random() < 0.4:
                prem.add(Atom("P", (rng.choice(VARS[:3]),)))
            else:
                prem.add(Atom("R", (rng.choice(VARS[:3]), rng.choice(VARS[:3]))))
        pv = sorted(atoms_variables(prem))
        r = rng.random()
        if r < 0.5:
            concl = BOTTOM
        elif r < 0.7:
            concl = Atom("P", (rng.choice(pv),))
        else:
            concl = Atom("R", (rng.choice(pv), rng.choice(pv)))
        if concl in prem:
            concl = BOTTOM
        clauses.append(HornClause(prem, concl))
    return UniversalSentence(sig, clauses)


def random_grammar(rng: random.Random, max_nonterminals: int = 2, max_rules: int = 4):
    from .cfg import Grammar

    terms = ["a", "b", "c"][: rng.randint(1, 2)]
    nts = ["S", "A", "B"][: rng.randint(1, max_nonterminals)]
    syms = terms + nts
    prods = set()
    for nt in nts:
        prods.add((nt, (rng.choice(terms),)))
    for _ in range(rng.randint(0, max_rules)):
        rhs = tuple(rng.choice(syms) for _ in range(rng.randint(1, 3)))
        prods.add((rng.choice(nts), rhs))
    return Grammar(nts, terms, prods, "S")


__all__ = [
    "random_signature",
    "random_atom",
    "random_horn_clause",
    "random_horn_theory",
    "random_query",
    "random_universal_sentence",
    "random_structure",
    "random_connected_theory",
    "random_jep_theory",
    "random_grammar",
]
