"""Context-free grammars and their translation into universal Horn sentences.

``compile`` turns a grammar into ``Phi1 & Phi2``.  ``Phi1`` reads words as
chains of binary atoms and derives ``R_A(x, z)`` whenever the chain from
``x`` to ``z`` spells a sentential form derivable from ``A``; a chain marked
``I`` ... ``T`` that derives the start symbol is inconsistent.  ``Phi2`` only
looks at terminals: a point marked ``U`` walks along any ``I`` ... ``T``
chain and derives false at the end.  The JEP of the combined class fails
exactly when some nonempty word is missing from the language.
"""

from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .chase import entails_horn, saturate
from .core import (
    BOTTOM,
    Atom,
    HornClause,
    Signature,
    UniversalSentence,
    atoms_variables,
    canonical_structure,
    find_homomorphisms,
)

RESERVED = frozenset({"I", "T", "U", "Q"})
ESCAPE = "g_"


@dataclass(frozen=True)
class Grammar:
    nonterminals: frozenset[str]
    terminals: frozenset[str]
    productions: tuple[tuple[str, tuple[str, ...]], ...]
    start: str

    def __init__(self, nonterminals, terminals, productions, start):
        object.__setattr__(self, "nonterminals", frozenset(nonterminals))
        object.__setattr__(self, "terminals", frozenset(terminals))
        object.__setattr__(
            self, "productions", tuple(sorted({(l, tuple(r)) for l, r in productions}))
        )
        object.__setattr__(self, "start", start)
        if self.nonterminals & self.terminals:
            raise ValueError("nonterminals and terminals overlap")
        if start not in self.nonterminals:
            raise ValueError("start symbol is not a nonterminal")
        syms = self.symbols
        for lhs, rhs in self.productions:
            if lhs not in self.nonterminals:
                raise ValueError(f"left-hand side {lhs!r} is not a nonterminal")
            if not rhs:
                raise ValueError(f"empty right-hand side for {lhs!r}")
            for s in rhs:
                if s not in syms:
                    raise ValueError(f"unknown symbol {s!r}")

    @property
    def symbols(self) -> frozenset[str]:
        return self.nonterminals | self.terminals

    def rules_for(self, lhs: str) -> list[tuple[str, ...]]:
        return [r for l, r in self.productions if l == lhs]

    @property
    def is_normalized(self) -> bool:
        return all((a, (a,)) in self.productions for a in self.nonterminals)


def normalize_self_rules(g: Grammar) -> Grammar:
    """Add ``A -> A`` for every nonterminal; the language does not change."""
    extra = [(a, (a,)) for a in g.nonterminals]
    return Grammar(g.nonterminals, g.terminals, list(g.productions) + extra, g.start)


def _successors(g: Grammar, form: tuple[str, ...], limit: int):
    for i, s in enumerate(form):
        if s not in g.nonterminals:
            continue
        for rhs in g.rules_for(s):
            new = form[:i] + rhs + form[i + 1 :]
            if len(new) <= limit:
                yield new


def derivation(g: Grammar, a: str, w: Sequence[str]) -> list[tuple[str, ...]] | None:
    """A shortest derivation ``a -> ... -> w`` (at least one step), or None.

    Rules never shrink a form, so forms longer than ``w`` can be dropped.
    """
    target = tuple(w)
    if not target:
        return None
    start = (a,)
    limit = len(target)
    root = None  # parent of the one-step forms
    parent: dict[tuple, tuple | None] = {}
    queue = deque()
    for nxt in _successors(g, start, limit):
        if nxt not in parent:
            parent[nxt] = root
            queue.append(nxt)
    while queue:
        form = queue.popleft()
        if form == target:
            path = [form]
            while parent[path[-1]] is not root:
                path.append(parent[path[-1]])
            path.append(start)
            return path[::-1]
        for nxt in _successors(g, form, limit):
            if nxt not in parent:
                parent[nxt] = form
                queue.append(nxt)
    return None


def derives(g: Grammar, a: str, w: Sequence[str]) -> bool:
    return derivation(g, a, w) is not None


def member(g: Grammar, word: Sequence[str]) -> bool:
    if not word:
        raise ValueError("the empty word is never in the language")
    for s in word:
        if s not in g.terminals:
            raise ValueError(f"{s!r} is not a terminal")
    return derives(g, g.start, word)


# ---------------------------------------------------------------------------
# the compiler


def rel_name(sym: str) -> str:
    """``R_<sym>``, escaping the reserved unary names (and the escape itself)."""
    if sym in RESERVED or sym.startswith(ESCAPE):
        sym = ESCAPE + sym
    return f"R_{sym}"


def _xs(n: int) -> list[str]:
    return [f"x{i}" for i in range(1, n + 1)]


def chain_atoms(word: Sequence[str], start: int = 1) -> list[Atom]:
    """``R_{a1}(x1,x2), ..., R_{an}(xn,x(n+1))``."""
    return [
        Atom(rel_name(s), (f"x{start + i}", f"x{start + i + 1}")) for i, s in enumerate(word)
    ]


def signatures(g: Grammar) -> tuple[Signature, Signature]:
    tau1 = {"I": 1, "T": 1}
    tau1.update({rel_name(s): 2 for s in sorted(g.symbols)})
    tau2 = {"I": 1, "T": 1}
    tau2.update({rel_name(s): 2 for s in sorted(g.terminals)})
    tau2.update({"U": 1, "Q": 2})
    return Signature(tau1), Signature(tau2)


@dataclass(frozen=True)
class Compiled:
    phi1: UniversalSentence
    phi2: UniversalSentence
    phi: UniversalSentence
    grammar: Grammar = field(compare=False)


def compile_grammar(g: Grammar) -> Compiled:
    if not g.is_normalized:
        g = normalize_self_rules(g)
    tau1, tau2 = signatures(g)
    c1 = []
    for lhs, rhs in g.productions:
        n = len(rhs)
        c1.append(HornClause(chain_atoms(rhs), Atom(rel_name(lhs), ("x1", f"x{n + 1}"))))
    c1.append(
        HornClause(
            [Atom("I", ("x1",)), Atom("T", ("x2",)), Atom(rel_name(g.start), ("x1", "x2"))],
            BOTTOM,
        )
    )
    u, q = Atom("U", ("y",)), "Q"
    c2 = []
    for a in sorted(g.terminals):
        ra = Atom(rel_name(a), ("x1", "x2"))
        c2.append(HornClause([u, Atom("I", ("x1",))], Atom(q, ("y", "x1"))))
        c2.append(HornClause([u, Atom(q, ("y", "x1")), ra], Atom(q, ("y", "x2"))))
        c2.append(HornClause([u, Atom(q, ("y", "x1")), ra, Atom("T", ("x2",))], BOTTOM))
    phi1 = UniversalSentence(tau1, c1)
    phi2 = UniversalSentence(tau2, c2)
    phi = UniversalSentence(tau1.union(tau2), c1 + c2)
    return Compiled(phi1, phi2, phi, g)


# ---------------------------------------------------------------------------
# executable claims


@dataclass(frozen=True)
class Claim1Report:
    checked: int
    discrepancies: tuple[tuple[str, tuple[str, ...], bool, bool], ...]

    @property
    def ok(self) -> bool:
        return not self.discrepancies


def sentential_forms(symbols: Iterable[str], max_len: int):
    syms = sorted(symbols)
    for n in range(1, max_len + 1):
        yield from itertools.product(syms, repeat=n)


def chain_clause(a: str, w: Sequence[str]) -> HornClause:
    return HornClause(chain_atoms(w), Atom(rel_name(a), ("x1", f"x{len(w) + 1}")))


def check_claim1(g: Grammar, max_len: int) -> Claim1Report:
    """Derivability agrees with entailment of the chain clause, for every
    nonterminal and every sentential form up to ``max_len`` symbols."""
    if not g.is_normalized:
        g = normalize_self_rules(g)
    phi1 = compile_grammar(g).phi1
    bad = []
    n = 0
    for a in sorted(g.nonterminals):
        for w in sentential_forms(g.symbols, max_len):
            n += 1
            d = derives(g, a, w)
            e = entails_horn(phi1, chain_clause(a, w)).entailed
            if d != e:
                bad.append((a, w, d, e))
    return Claim1Report(n, tuple(bad))


def _tau2_minus_q(g: Grammar) -> Signature:
    _, tau2 = signatures(g)
    return Signature({k: v for k, v in tau2.items() if k != "Q"})


def pattern_word(g: Grammar, atoms: Iterable[Atom]) -> tuple[str, ...] | None:
    """Shortest (then least) nonempty word whose false-pattern maps into the atoms.

    The pattern is ``U(y), I(x1), R_a1(x1,x2), ..., R_an(xn,x(n+1)), T(x(n+1))``
    and the map need not be injective, so this is a walk search from the
    ``I`` points to the ``T`` points.
    """
    atoms = list(atoms)
    if not any(a.symbol == "U" for a in atoms):
        return None
    by_name = {rel_name(t): t for t in g.terminals}
    edges: dict[str, list[tuple[str, str]]] = {}
    for a in atoms:
        if a.symbol in by_name:
            edges.setdefault(a.args[0], []).append((by_name[a.symbol], a.args[1]))
    for v in edges.values():
        v.sort()
    starts = sorted({a.args[0] for a in atoms if a.symbol == "I"})
    ends = {a.args[0] for a in atoms if a.symbol == "T"}
    # layered BFS keeping, per node, the least word among the shortest ones
    seen: set[str] = set()
    layer = {s: () for s in starts}
    while layer:
        nxt: dict[str, tuple[str, ...]] = {}
        for node, word in layer.items():
            for t, dst in edges.get(node, ()):
                if dst not in seen and (dst not in nxt or word + (t,) < nxt[dst]):
                    nxt[dst] = word + (t,)
        seen.update(nxt)
        hits = sorted(w for n, w in nxt.items() if n in ends)
        if hits:
            return hits[0]
        layer = nxt
    return None


def pattern_atoms(word: Sequence[str]) -> list[Atom]:
    n = len(word)
    return [Atom("U", ("y",)), Atom("I", ("x1",)), Atom("T", (f"x{n + 1}",))] + chain_atoms(word)


def check_claim2(g: Grammar, atoms: Iterable[Atom]) -> tuple[bool, tuple[str, ...] | None]:
    """(chase says false, shortest matching pattern word) for a conjunction."""
    atoms = list(atoms)
    sig = _tau2_minus_q(g)
    for a in atoms:
        if a.symbol not in sig:
            raise ValueError(f"{a.symbol} is not allowed here (Q and nonterminal relations are excluded)")
        sig.check_atom(a)
    phi2 = compile_grammar(g).phi2
    s, _ = canonical_structure(atoms, phi2.signature)
    chase_false = not saturate(s, phi2).consistent
    word = pattern_word(g, atoms)
    if word is not None:
        # the walk search and a direct homomorphism search must agree
        pat, _ = canonical_structure(pattern_atoms(word), phi2.signature)
        if not find_homomorphisms(pat, s, limit=1):
            raise RuntimeError("internal error: pattern word has no homomorphism")
    return chase_false, word


def random_conjunction(
    g: Grammar, rng: random.Random, max_atoms: int = 8, max_vars: int = 6
) -> list[Atom]:
    """Random atoms over ``I, T, U`` and the terminal relations.

    Half of the draws start from the false-pattern of a random short word
    squeezed onto the variables, so both verdicts are common.
    """
    vs = [f"v{i}" for i in range(rng.randint(1, max_vars))]
    names = ["I", "T", "U"] + [rel_name(t) for t in sorted(g.terminals)]
    out = set()
    if rng.random() < 0.5 and max_atoms >= 4:
        word = [rng.choice(sorted(g.terminals)) for _ in range(rng.randint(1, max_atoms - 3))]
        squeeze = {v: rng.choice(vs) for v in sorted(atoms_variables(pattern_atoms(word)))}
        out.update(a.rename(squeeze) for a in pattern_atoms(word))
    while len(out) < max_atoms and rng.random() < 0.7:
        n = rng.choice(names)
        if n in ("I", "T", "U"):
            out.add(Atom(n, (rng.choice(vs),)))
        else:
            out.add(Atom(n, (rng.choice(vs), rng.choice(vs))))
    return sorted(out)


def word_witness(g: Grammar, word: Sequence[str]):
    """The witness for a word outside the language: ``U(y)`` against the word's chain."""
    from .jep import JepWitness

    n = len(word)
    phi2 = [Atom("I", ("x1",)), Atom("T", (f"x{n + 1}",))] + chain_atoms(word)
    return JepWitness([Atom("U", ("y",))], phi2, BOTTOM)


def words(terminals: Iterable[str], max_len: int):
    yield from sentential_forms(terminals, max_len)


__all__ = [
    "Grammar",
    "Compiled",
    "Claim1Report",
    "normalize_self_rules",
    "derivation",
    "derives",
    "member",
    "rel_name",
    "compile_grammar",
    "check_claim1",
    "check_claim2",
    "pattern_word",
    "random_conjunction",
    "word_witness",
    "words",
]
