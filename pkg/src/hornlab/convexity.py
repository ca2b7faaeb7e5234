"""Deciding Horn-definability of universal sentences via binary products.

A universal sentence is equivalent to a Horn one exactly when its class of
finite models is closed under binary products.  A product A x B fails a clause
``premise -> P1 | ... | Pk`` at a pair of assignments when the premise holds
on both sides and every ``Pi`` fails on at least one side.  So the search is
per clause: split the positives into ``S`` and its complement and ask for one
pointed model where the premise holds and ``S`` fails, and one where the
complement fails.

Pointed models only need the elements named by the clause variables
(substructures of models are models), and without equality any
identification of variables can be undone by duplicating an element into
twins, so one injective assignment on a domain of size = number of clause
variables suffices.  Quotient search is kept as an option for cross-checking.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

from .core import (
    Atom,
    Clause,
    FinStructure,
    GeneralClause,
    HornClause,
    Signature,
    UniversalSentence,
    canonical_form,
    pair_name,
    product,
    relabel,
    satisfies,
)
from .finder import BudgetExceeded, find_model, iter_models


@dataclass(frozen=True)
class Convex:
    horn_rewrite: UniversalSentence

    convex = True


@dataclass(frozen=True)
class NotConvex:
    a: FinStructure
    b: FinStructure
    clause_index: int
    assignment: tuple[tuple[str, str], ...]

    convex = False

    def product(self) -> FinStructure:
        return product(self.a, self.b)


ConvexityVerdict = Convex | NotConvex


@dataclass(frozen=True)
class ToHornFailure:
    clause_index: int
    clause: Clause


class _Budget:
    def __init__(self, limit: int | None):
        self.limit = limit
        self.used = 0

    def tick(self, what: str):
        self.used += 1
        if self.limit is not None and self.used > self.limit:
            raise BudgetExceeded(f"{what}: more than {self.limit} model searches", {"searches": self.used})


def _partitions(items: Sequence[str]) -> Iterator[list[list[str]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for p in _partitions(rest):
        yield [[first]] + p
        for i in range(len(p)):
            yield p[:i] + [[first] + p[i]] + p[i + 1 :]


def _assignments(variables, max_size: int | None, quotients: bool):
    """Maps from clause variables onto small domains, identity first."""
    vs = sorted(variables)
    if not vs:
        yield {}
        return
    if not quotients and (max_size is None or max_size >= len(vs)):
        yield {v: v for v in vs}
        return
    parts = sorted(_partitions(vs), key=len, reverse=True)
    for p in parts:
        if max_size is not None and len(p) > max_size:
            continue
        env = {}
        for block in p:
            rep = min(block)
            for v in block:
                env[v] = rep
        yield env


def _pointed_model(
    sentence: UniversalSentence,
    premise,
    failing,
    env,
    budget: _Budget,
) -> FinStructure | None:
    domain = sorted(set(env.values())) or ["_"]
    budget.tick("pointed model search")
    return find_model(
        sentence.clauses,
        sentence.signature,
        domain,
        true=[a.rename(env) for a in premise],
        false=[a.rename(env) for a in failing],
    )


class _PointedCache:
    """Pointed models for one premise under varying sets of failing atoms.

    A model failing a set also fails every subset, and a set with no model
    has supersets with no model, so most searches are answered from earlier ones.
    """

    def __init__(self, sentence, premise, budget: _Budget):
        self.sentence = sentence
        self.premise = premise
        self.budget = budget
        self.found: dict[tuple, list[FinStructure]] = {}
        self.empty: dict[tuple, list[frozenset]] = {}

    def __call__(self, failing, env) -> FinStructure | None:
        key = tuple(sorted(env.items()))
        ground = {a.rename(env) for a in failing}
        if any(u <= ground for u in self.empty.get(key, ())):
            return None
        for m in self.found.get(key, ()):
            if not any(m.holds(a) for a in ground):
                return m
        m = _pointed_model(self.sentence, self.premise, failing, env, self.budget)
        if m is None:
            self.empty.setdefault(key, []).append(frozenset(ground))
        else:
            self.found.setdefault(key, []).append(m)
        return m


def entails_general(
    sentence: UniversalSentence,
    clause: Clause,
    quotients: bool = False,
    budget: int | None = None,
) -> bool:
    """``sentence |= clause`` by countermodel search on the clause's variables."""
    b = _Budget(budget)
    for env in _assignments(clause.variables, None, quotients):
        if _pointed_model(sentence, clause.negatives, clause.positives, env, b) is not None:
            return False
    return True


def countermodel(sentence: UniversalSentence, clause: Clause) -> FinStructure | None:
    env = {v: v for v in clause.variables}
    return _pointed_model(sentence, clause.negatives, clause.positives, env, _Budget(None))


def to_horn(sentence: UniversalSentence, budget: int | None = None) -> UniversalSentence | ToHornFailure:
    """Replace each disjunctive clause by its least entailed disjunct."""
    return _to_horn(sentence, _Budget(budget), {})


def _to_horn(sentence, b: _Budget, caches: dict) -> UniversalSentence | ToHornFailure:
    out = []
    for i, c in enumerate(sentence.clauses):
        if isinstance(c, HornClause):
            out.append(c)
            continue
        pointed = caches.get(i) or _PointedCache(sentence, c.negatives, b)
        identity = {v: v for v in c.variables}
        for p in sorted(c.positives):
            # entailed exactly when no model has the premise and p false
            if pointed([p], identity) is None:
                out.append(HornClause(c.negatives, p))
                break
        else:
            return ToHornFailure(i, c)
    return UniversalSentence(sentence.signature, out)


def check_convex(
    sentence: UniversalSentence,
    max_size: int | None = None,
    budget: int | None = None,
    quotients: bool = False,
) -> ConvexityVerdict:
    """Convex with a Horn rewrite, or two models whose product is not a model.

    ``max_size`` caps the witness domain size; below a clause's variable count
    the search falls back to identifying variables and is then only a bounded
    check.
    """
    b = _Budget(budget)
    caches: dict[int, _PointedCache] = {}
    for ci, c in enumerate(sentence.clauses):
        pos = sorted(c.positives)
        if len(pos) < 2:
            continue
        pointed = caches[ci] = _PointedCache(sentence, c.negatives, b)
        first, rest = pos[0], pos[1:]
        for r in range(len(rest) + 1):
            for extra in itertools.combinations(rest, r):
                s = [first, *extra]
                comp = [p for p in pos if p not in s]
                if not comp:
                    continue
                for env_a in _assignments(c.variables, max_size, quotients):
                    a = pointed(s, env_a)
                    if a is None:
                        continue
                    for env_b in _assignments(c.variables, max_size, quotients):
                        bm = pointed(comp, env_b)
                        if bm is None:
                            continue
                        t = tuple(
                            (v, pair_name(env_a[v], env_b[v])) for v in sorted(c.variables)
                        )
                        w = NotConvex(a, bm, ci, t)
                        if not verify_not_convex(sentence, w):
                            raise RuntimeError("internal error: product witness does not verify")
                        return w
    rewrite = _to_horn(sentence, b, caches)
    if isinstance(rewrite, ToHornFailure):
        # cannot happen when the product search was exhaustive
        raise RuntimeError(f"no product witness but clause {rewrite.clause_index} has no Horn disjunct")
    return Convex(rewrite)


def verify_not_convex(sentence: UniversalSentence, w: NotConvex) -> bool:
    """Both structures are models and their product fails the clause at the assignment."""
    try:
        if not (satisfies(w.a, sentence) and satisfies(w.b, sentence)):
            return False
        prod = w.product()
        env = dict(w.assignment)
        c = sentence.clauses[w.clause_index]
        if set(env) != set(c.variables) or any(e not in prod.domain for e in env.values()):
            return False
        return all(prod.holds(a.rename(env)) for a in c.negatives) and not any(
            prod.holds(a.rename(env)) for a in c.positives
        )
    except (KeyError, IndexError, ValueError):
        return False


# ---------------------------------------------------------------------------
# model enumeration


def enumerate_models(
    sentence: UniversalSentence,
    max_size: int,
    prune_iso: bool = True,
    budget: int | None = None,
) -> Iterator[FinStructure]:
    """Models with at most ``max_size`` elements, by size then canonical encoding."""
    count = 0
    for n in range(max_size + 1):
        domain = [f"e{i}" for i in range(n)]
        batch = {}
        for m in iter_models(sentence.clauses, sentence.signature, domain):
            count += 1
            if budget is not None and count > budget:
                raise BudgetExceeded(
                    f"more than {budget} labelled models", {"size": n, "models": count}
                )
            if prune_iso:
                cf = canonical_form(m)
                if cf not in batch:
                    batch[cf] = relabel(m)
            else:
                batch[m.key()] = m
        for k in sorted(batch, key=_sort_key):
            yield batch[k]


def _sort_key(k):
    # canonical_form starts with the (unorderable) signature
    return repr(k[1:]) if isinstance(k[0], Signature) else repr(k)


def models_agree(s1: UniversalSentence, s2: UniversalSentence, max_size: int) -> bool:
    """Same labelled models on every domain of size at most ``max_size``."""
    for n in range(max_size + 1):
        domain = [f"e{i}" for i in range(n)]
        m1 = set(iter_models(s1.clauses, s1.signature, domain))
        m2 = set(iter_models(s2.clauses, s2.signature, domain))
        if m1 != m2:
            return False
    return True


# ---------------------------------------------------------------------------
# the exists-forall SAT gadget


@dataclass(frozen=True)
class EaSatInstance:
    """``exists X1..Xk forall X(k+1)..Xl`` of a CNF over literals ``+-i``."""

    k: int
    l: int
    matrix: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "matrix", tuple(tuple(c) for c in self.matrix))
        if not 0 <= self.k <= self.l:
            raise ValueError("need 0 <= k <= l")
        if self.l == 0:
            raise ValueError("an instance needs at least one variable")
        for c in self.matrix:
            for lit in c:
                if lit == 0 or abs(lit) > self.l:
                    raise ValueError(f"literal {lit} out of range")

    def evaluate(self, values: Sequence[bool]) -> bool:
        return all(any(values[abs(l) - 1] == (l > 0) for l in c) for c in self.matrix)

    def is_true(self) -> bool:
        """Direct evaluation of the quantified formula."""
        for ex in itertools.product((False, True), repeat=self.k):
            if all(
                self.evaluate(ex + un)
                for un in itertools.product((False, True), repeat=self.l - self.k)
            ):
                return True
        return False


def easat_signature(k: int) -> Signature:
    return Signature({**{f"C{i}": 1 for i in range(1, k + 1)}, "C": 1, "L": 1, "R": 1})


def encode_easat(inst: EaSatInstance) -> UniversalSentence:
    """Universal sentence that is Horn-definable exactly when the instance is false."""
    sig = easat_signature(inst.k)

    def lit_atom(i: int) -> Atom:
        return Atom(f"C{i}", ("x",)) if i <= inst.k else Atom("C", (f"x{i}",))

    guard = Atom("C", ("y",))
    cx = Atom("C", ("x",))
    # the L/R clause goes first so product witnesses are reported against it
    clauses: list[Clause] = [GeneralClause({guard}, {cx, Atom("L", ("x",)), Atom("R", ("x",))})]
    for d in inst.matrix:
        neg = {lit_atom(-l) for l in d if l < 0}
        pos = {lit_atom(l) for l in d if l > 0}
        clauses.append(GeneralClause({guard} | neg, {cx} | pos))
    return UniversalSentence(sig, clauses)


def format_verdict(v: ConvexityVerdict) -> str:
    from .parse import print_structure, print_theory

    if isinstance(v, Convex):
        return "convex\n" + print_theory(v.horn_rewrite)
    asg = ",".join(f"{x}={e}" for x, e in v.assignment)
    return (
        f"not-convex clause {v.clause_index} at {asg}\n"
        f"model A\n{print_structure(v.a)}model B\n{print_structure(v.b)}"
    )


__all__ = [
    "Convex",
    "NotConvex",
    "ToHornFailure",
    "EaSatInstance",
    "check_convex",
    "entails_general",
    "to_horn",
    "encode_easat",
    "enumerate_models",
    "models_agree",
    "verify_not_convex",
    "format_verdict",
]
