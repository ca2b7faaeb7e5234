"""Signatures, atoms, clauses, sentences and finite structures.

Everything here is immutable once built.  Variables and domain elements are
plain strings; an :class:`Atom` uses the same representation for both, so a
conjunction of atoms doubles as the positive diagram of a structure.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence


class SignatureError(ValueError):
    """Unknown symbol, wrong arity, or mismatched signatures."""


class NotHornError(ValueError):
    pass


class _Bottom:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "BOTTOM"

    def __str__(self):
        return "false"

    def __reduce__(self):
        return (_Bottom, ())


#: The empty disjunction; conclusion of a goal / denial clause.
BOTTOM = _Bottom()


class Signature:
    """Finite relational vocabulary: symbol name -> arity."""

    __slots__ = ("_arity", "_key")

    def __init__(self, symbols: Mapping[str, int] | Iterable[tuple[str, int]] = ()):
        items = dict(symbols.items() if isinstance(symbols, Mapping) else symbols)
        for name, arity in items.items():
            if name == "=":
                raise SignatureError("equality is not a relation symbol")
            if not isinstance(arity, int) or arity < 1:
                raise SignatureError(f"arity of {name!r} must be a positive integer")
        self._arity = items
        self._key = tuple(sorted(items.items()))

    def arity(self, name: str) -> int:
        try:
            return self._arity[name]
        except KeyError:
            raise SignatureError(f"unknown relation symbol {name!r}") from None

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self._key)

    def items(self):
        return self._key

    def __contains__(self, name):
        return name in self._arity

    def __iter__(self):
        return iter(self.symbols)

    def __len__(self):
        return len(self._key)

    def __eq__(self, other):
        return isinstance(other, Signature) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        body = ", ".join(f"{n}/{a}" for n, a in self._key)
        return f"Signature({{{body}}})"

    def union(self, other: Signature) -> Signature:
        merged = dict(self._key)
        for name, arity in other.items():
            if merged.get(name, arity) != arity:
                raise SignatureError(f"symbol {name!r} has conflicting arities")
            merged[name] = arity
        return Signature(merged)

    def check_atom(self, atom: Atom) -> None:
        arity = self.arity(atom.symbol)
        if len(atom.args) != arity:
            raise SignatureError(
                f"{atom.symbol} has arity {arity}, got {len(atom.args)} arguments"
            )


class Atom(NamedTuple):
    symbol: str
    args: tuple[str, ...]

    def __str__(self):
        return f"{self.symbol}({','.join(self.args)})"

    @property
    def variables(self) -> frozenset[str]:
        return frozenset(self.args)

    def rename(self, mapping: Mapping[str, str]) -> Atom:
        return Atom(self.symbol, tuple(mapping.get(a, a) for a in self.args))


def atom(symbol: str, *args: str) -> Atom:
    return Atom(symbol, tuple(args))


def atoms_variables(atoms: Iterable[Atom]) -> frozenset[str]:
    return frozenset(v for a in atoms for v in a.args)


@dataclass(frozen=True)
class HornClause:
    """``premise => conclusion`` where the conclusion is an atom or BOTTOM."""

    premise: frozenset[Atom]
    conclusion: Atom | _Bottom = BOTTOM

    def __init__(self, premise: Iterable[Atom] = (), conclusion=BOTTOM):
        object.__setattr__(self, "premise", frozenset(premise))
        object.__setattr__(self, "conclusion", conclusion)

    @property
    def is_goal(self) -> bool:
        return self.conclusion is BOTTOM

    @property
    def negatives(self) -> frozenset[Atom]:
        return self.premise

    @property
    def positives(self) -> frozenset[Atom]:
        return frozenset() if self.is_goal else frozenset([self.conclusion])

    @property
    def variables(self) -> frozenset[str]:
        vs = atoms_variables(self.premise)
        if not self.is_goal:
            vs |= self.conclusion.variables
        return vs

    def sorted_premise(self) -> list[Atom]:
        return sorted(self.premise)

    def rename(self, mapping: Mapping[str, str]) -> HornClause:
        concl = self.conclusion if self.is_goal else self.conclusion.rename(mapping)
        return HornClause((a.rename(mapping) for a in self.premise), concl)

    def __str__(self):
        body = ", ".join(map(str, self.sorted_premise()))
        return f"{body} -> {self.conclusion}".lstrip()


@dataclass(frozen=True)
class GeneralClause:
    """Disjunction of negated atoms (``negatives``) and atoms (``positives``)."""

    negatives: frozenset[Atom]
    positives: frozenset[Atom]

    def __init__(self, negatives: Iterable[Atom] = (), positives: Iterable[Atom] = ()):
        object.__setattr__(self, "negatives", frozenset(negatives))
        object.__setattr__(self, "positives", frozenset(positives))

    @property
    def is_horn(self) -> bool:
        return len(self.positives) <= 1

    @property
    def premise(self) -> frozenset[Atom]:
        return self.negatives

    @property
    def variables(self) -> frozenset[str]:
        return atoms_variables(self.negatives) | atoms_variables(self.positives)

    def as_horn(self) -> HornClause:
        if not self.is_horn:
            raise NotHornError(f"clause has {len(self.positives)} positive literals")
        (concl,) = self.positives or (BOTTOM,)
        return HornClause(self.negatives, concl)

    def rename(self, mapping: Mapping[str, str]) -> GeneralClause:
        return GeneralClause(
            (a.rename(mapping) for a in self.negatives),
            (a.rename(mapping) for a in self.positives),
        )

    def __str__(self):
        body = ", ".join(map(str, sorted(self.negatives)))
        head = " | ".join(map(str, sorted(self.positives))) or "false"
        return f"{body} -> {head}".lstrip()


Clause = HornClause | GeneralClause


def normalize_clause(c: Clause) -> Clause:
    """Clauses with at most one positive literal are represented as HornClause."""
    if isinstance(c, GeneralClause) and c.is_horn:
        return c.as_horn()
    return c


@dataclass(frozen=True)
class UniversalSentence:
    signature: Signature
    clauses: tuple[Clause, ...] = field(default=())

    def __init__(self, signature: Signature, clauses: Iterable[Clause] = ()):
        clauses = tuple(normalize_clause(c) for c in clauses)
        for c in clauses:
            for a in itertools.chain(c.negatives, c.positives):
                signature.check_atom(a)
        object.__setattr__(self, "signature", signature)
        object.__setattr__(self, "clauses", clauses)

    @property
    def is_horn(self) -> bool:
        return all(isinstance(c, HornClause) for c in self.clauses)

    def horn_clauses(self) -> tuple[HornClause, ...]:
        if not self.is_horn:
            raise NotHornError("sentence contains a clause with several positive literals")
        return self.clauses  # type: ignore[return-value]

    def conjoin(self, other: UniversalSentence) -> UniversalSentence:
        return UniversalSentence(
            self.signature.union(other.signature), self.clauses + other.clauses
        )

    def max_clause_variables(self) -> int:
        return max((len(c.variables) for c in self.clauses), default=0)

    def __len__(self):
        return len(self.clauses)


class FinStructure:
    """A finite relational structure.

    ``relations`` maps every symbol of the signature to a frozenset of tuples;
    symbols missing from the input mapping are empty.
    """

    __slots__ = ("signature", "domain", "relations", "_key")

    def __init__(
        self,
        signature: Signature,
        domain: Iterable[str],
        relations: Mapping[str, Iterable[Sequence[str]]] | None = None,
    ):
        dom = tuple(sorted(set(domain)))
        dom_set = set(dom)
        rels = {name: frozenset() for name in signature}
        for name, tuples in (relations or {}).items():
            arity = signature.arity(name)
            ts = frozenset(tuple(t) for t in tuples)
            for t in ts:
                if len(t) != arity:
                    raise SignatureError(f"{name} tuple {t} does not have arity {arity}")
                for e in t:
                    if e not in dom_set:
                        raise ValueError(f"element {e!r} of {name}{t} is not in the domain")
            rels[name] = ts
        self.signature = signature
        self.domain = dom
        self.relations = rels
        self._key = None

    @classmethod
    def from_atoms(cls, signature: Signature, atoms: Iterable[Atom], domain=()):
        atoms = list(atoms)
        for a in atoms:
            signature.check_atom(a)
        rels: dict[str, set] = {}
        for a in atoms:
            rels.setdefault(a.symbol, set()).add(a.args)
        return cls(signature, set(domain) | atoms_variables(atoms), rels)

    def holds(self, a: Atom) -> bool:
        return a.args in self.relations[a.symbol]

    def atoms(self) -> list[Atom]:
        """The positive diagram, sorted by symbol then tuple."""
        return sorted(
            Atom(name, t) for name, ts in self.relations.items() for t in ts
        )

    def size(self) -> int:
        return len(self.domain)

    def tuple_count(self) -> int:
        return sum(len(ts) for ts in self.relations.values())

    def with_atoms(self, atoms: Iterable[Atom]) -> FinStructure:
        rels = {k: set(v) for k, v in self.relations.items()}
        for a in atoms:
            self.signature.check_atom(a)
            rels[a.symbol].add(a.args)
        return FinStructure(self.signature, self.domain, rels)

    def rename(self, mapping: Mapping[str, str]) -> FinStructure:
        return FinStructure(
            self.signature,
            (mapping.get(e, e) for e in self.domain),
            {
                name: {tuple(mapping.get(e, e) for e in t) for t in ts}
                for name, ts in self.relations.items()
            },
        )

    def key(self):
        if self._key is None:
            self._key = (
                self.signature,
                self.domain,
                tuple(sorted((n, tuple(sorted(ts))) for n, ts in self.relations.items())),
            )
        return self._key

    def __eq__(self, other):
        return isinstance(other, FinStructure) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        facts = " ".join(map(str, self.atoms()))
        return f"FinStructure({{{', '.join(self.domain)}}} {facts})"


# ---------------------------------------------------------------------------
# matching


def _order_atoms(atoms: Sequence[Atom], bound: set[str]) -> list[Atom]:
    """Greedy join order: prefer atoms sharing the most already-bound variables."""
    remaining = list(atoms)
    bound = set(bound)
    ordered = []
    while remaining:
        best = max(
            remaining,
            key=lambda a: (sum(v in bound for v in a.args), -len(set(a.args))),
        )
        remaining.remove(best)
        ordered.append(best)
        bound.update(best.args)
    return ordered


def iter_matches(
    atoms: Iterable[Atom],
    relations: Mapping[str, Iterable[tuple]],
    assignment: Mapping[str, str] | None = None,
) -> Iterator[dict[str, str]]:
    """Yield every extension of ``assignment`` making all ``atoms`` true.

    Only variables occurring in ``atoms`` (plus those already assigned) are
    bound.  Order of the results is unspecified.
    """
    start = dict(assignment or {})
    ordered = _order_atoms(sorted(set(atoms)), set(start))
    # per atom: positions already bound when it is reached, and a lookup
    # from the bound values to candidate tuples (built once per call)
    plan = []
    bound = set(start)
    for a in ordered:
        bpos = tuple(i for i, v in enumerate(a.args) if v in bound)
        index: dict[tuple, list] = {}
        for t in relations[a.symbol]:
            index.setdefault(tuple(t[i] for i in bpos), []).append(t)
        plan.append((a.args, bpos, index))
        bound.update(a.args)

    def rec(i, env):
        if i == len(plan):
            yield dict(env)
            return
        args, bpos, index = plan[i]
        for t in index.get(tuple(env[args[j]] for j in bpos), ()):
            newly = []
            ok = True
            for var, val in zip(args, t):
                cur = env.get(var)
                if cur is None:
                    env[var] = val
                    newly.append(var)
                elif cur != val:
                    ok = False
                    break
            if ok:
                yield from rec(i + 1, env)
            for var in newly:
                del env[var]

    yield from rec(0, start)


def iter_assignments(
    clause: Clause, structure: FinStructure
) -> Iterator[dict[str, str]]:
    """Assignments of all clause variables under which the premise holds."""
    extra = sorted(clause.variables - atoms_variables(clause.negatives))
    for env in iter_matches(clause.negatives, structure.relations):
        for values in itertools.product(structure.domain, repeat=len(extra)):
            full = dict(env)
            full.update(zip(extra, values))
            yield full


def _check_sig(a: FinStructure, sig: Signature):
    if a.signature != sig:
        raise SignatureError("signature mismatch")


def _check_clause(sig: Signature, c: Clause):
    for a in itertools.chain(c.negatives, c.positives):
        sig.check_atom(a)


@functools.lru_cache(maxsize=4096)
def _violation_plan(clause: Clause):
    """Ground positives plus, per independent group of conclusion-only
    variables, the positives that become ground after each member."""
    bound = atoms_variables(clause.negatives)
    extra = sorted(clause.variables - bound)
    # union-find over the extra variables, joined by shared positives
    parent = {v: v for v in extra}

    def find(v):
        while parent[v] != v:
            v = parent[v]
        return v

    ground = []
    by_atom = []
    for p in sorted(clause.positives):
        free = sorted({v for v in p.args if v not in bound})
        if not free:
            ground.append((p.symbol, p.args))
            continue
        for v in free[1:]:
            parent[find(v)] = find(free[0])
        by_atom.append((free, p.symbol, p.args))
    groups: dict[str, list[str]] = {}
    for v in extra:
        groups.setdefault(find(v), []).append(v)
    plans = []
    for members in groups.values():
        checks: list[list] = [[] for _ in range(len(members) + 1)]
        for free, symbol, args in by_atom:
            if free[0] in members:
                checks[max(members.index(v) + 1 for v in free)].append((symbol, args))
        plans.append((tuple(members), tuple(map(tuple, checks))))
    return tuple(ground), tuple(plans), tuple(sorted(clause.negatives))


def violations(structure: FinStructure, clause: Clause) -> Iterator[dict[str, str]]:
    """Assignments (premise matched, every positive false).

    Variables that occur only among the positives are split into groups that
    no positive atom links; each group is solved on its own and the results
    are combined, so independent disjuncts do not multiply the search.
    """
    rels = structure.relations
    domain = structure.domain
    ground, plans, negatives = _violation_plan(clause)

    def fails(env, checks):
        for symbol, args in checks:
            if tuple([env[v] for v in args]) in rels[symbol]:
                return False
        return True

    def solve(env, members, checks):
        out = []

        def rec(i):
            if i == len(members):
                out.append(tuple([env[v] for v in members]))
                return
            for e in domain:
                env[members[i]] = e
                if fails(env, checks[i + 1]):
                    rec(i + 1)
            env.pop(members[i], None)

        rec(0)
        return out

    for env in iter_matches(negatives, rels):
        if not fails(env, ground):
            continue
        parts = []
        for members, checks in plans:
            found = solve(env, members, checks)
            if not found:
                break
            parts.append((members, found))
        else:
            for combo in itertools.product(*(found for _, found in parts)):
                full = dict(env)
                for (members, _), values in zip(parts, combo):
                    full.update(zip(members, values))
                yield full


def satisfies_clause(structure: FinStructure, clause: Clause) -> bool:
    _check_clause(structure.signature, clause)
    return next(violations(structure, clause), None) is None


def satisfies(structure: FinStructure, sentence: UniversalSentence) -> bool:
    _check_sig(structure, sentence.signature)
    return all(satisfies_clause(structure, c) for c in sentence.clauses)


def first_violation(structure: FinStructure, sentence: UniversalSentence):
    """``(clause_index, assignment)`` of the first violated clause, or None.

    The assignment is the lexicographically least violating one.
    """
    _check_sig(structure, sentence.signature)
    for i, c in enumerate(sentence.clauses):
        found = sorted(
            (tuple(sorted(env.items())) for env in violations(structure, c)),
        )
        if found:
            return i, dict(found[0])
    return None


# ---------------------------------------------------------------------------
# constructions


def pair_name(a: str, b: str) -> str:
    return f"({a},{b})"


def product(a: FinStructure, b: FinStructure) -> FinStructure:
    _check_sig(b, a.signature)
    dom = [pair_name(x, y) for x in a.domain for y in b.domain]
    rels = {}
    for name in a.signature:
        rels[name] = {
            tuple(pair_name(x, y) for x, y in zip(s, t))
            for s in a.relations[name]
            for t in b.relations[name]
        }
    return FinStructure(a.signature, dom, rels)


def disjoint_union(a: FinStructure, b: FinStructure):
    """Tagged union; returns ``(C, embedding_of_a, embedding_of_b)``."""
    _check_sig(b, a.signature)
    e1 = {x: f"{x}#1" for x in a.domain}
    e2 = {y: f"{y}#2" for y in b.domain}
    rels = {
        name: {tuple(e1[x] for x in t) for t in a.relations[name]}
        | {tuple(e2[y] for y in t) for t in b.relations[name]}
        for name in a.signature
    }
    return FinStructure(a.signature, list(e1.values()) + list(e2.values()), rels), e1, e2


def substructure(a: FinStructure, subset: Iterable[str]) -> FinStructure:
    keep = set(subset)
    missing = keep - set(a.domain)
    if missing:
        raise ValueError(f"elements not in domain: {sorted(missing)}")
    rels = {
        name: {t for t in ts if all(e in keep for e in t)}
        for name, ts in a.relations.items()
    }
    return FinStructure(a.signature, keep, rels)


def canonical_structure(atoms: Iterable[Atom], signature: Signature):
    """Structure on the variables of ``atoms`` with exactly those tuples."""
    s = FinStructure.from_atoms(signature, atoms)
    return s, {v: v for v in s.domain}


def is_homomorphism(h: Mapping[str, str], a: FinStructure, b: FinStructure) -> bool:
    return all(
        tuple(h[e] for e in t) in b.relations[name]
        for name, ts in a.relations.items()
        for t in ts
    )


def is_embedding(h: Mapping[str, str], a: FinStructure, b: FinStructure) -> bool:
    if len(set(h.values())) != len(h) or set(h) != set(a.domain):
        return False
    inverse = {v: k for k, v in h.items()}
    for name, ts in b.relations.items():
        for t in ts:
            if all(e in inverse for e in t):
                if tuple(inverse[e] for e in t) not in a.relations[name]:
                    return False
    return is_homomorphism(h, a, b)


def find_homomorphisms(
    a: FinStructure,
    b: FinStructure,
    mode: str = "hom",
    limit: int | None = None,
) -> list[dict[str, str]]:
    """Maps ``a -> b`` preserving relations; ``mode='embedding'`` also requires
    injectivity and reflection of every relation."""
    if mode not in ("hom", "embedding"):
        raise ValueError(f"unknown mode {mode!r}")
    _check_sig(b, a.signature)
    injective = mode == "embedding"
    # element -> list of (symbol, tuple) mentioning it, for early checks
    touching: dict[str, list] = {x: [] for x in a.domain}
    for name, ts in a.relations.items():
        for t in ts:
            for x in set(t):
                touching[x].append((name, t, True))
    order = sorted(a.domain, key=lambda x: -len(touching[x]))
    pos = {x: i for i, x in enumerate(order)}
    results: list[dict[str, str]] = []
    h: dict[str, str] = {}
    used: set[str] = set()

    def consistent(x):
        for name, t, _ in touching[x]:
            if all(e in h for e in t):
                if tuple(h[e] for e in t) not in b.relations[name]:
                    return False
        if injective:
            # reflection: tuples over placed elements, checked when x is placed
            placed = order[: pos[x] + 1]
            for name in a.signature:
                arity = a.signature.arity(name)
                bt = b.relations[name]
                at = a.relations[name]
                for t in itertools.product(placed, repeat=arity):
                    if x not in t:
                        continue
                    if (tuple(h[e] for e in t) in bt) != (t in at):
                        return False
        return True

    def rec(i):
        if limit is not None and len(results) >= limit:
            return
        if i == len(order):
            results.append(dict(h))
            return
        x = order[i]
        for y in b.domain:
            if injective and y in used:
                continue
            h[x] = y
            used.add(y)
            if consistent(x):
                rec(i + 1)
            used.discard(y)
            del h[x]

    rec(0)
    results.sort(key=lambda m: tuple(m[x] for x in a.domain))
    return results


# ---------------------------------------------------------------------------
# isomorphism-invariant canonical form


def _refine(struct_tuples, colors: dict[str, int]) -> dict[str, int]:
    while True:
        sigs = {}
        for x in colors:
            sigs[x] = [colors[x]]
        for name, ts in struct_tuples:
            for t in ts:
                ct = tuple(colors[e] for e in t)
                for i, x in enumerate(t):
                    sigs[x].append((name, i, ct))
        keyed = {x: (s[0], tuple(sorted(s[1:]))) for x, s in sigs.items()}
        palette = {k: i for i, k in enumerate(sorted(set(keyed.values())))}
        new = {x: palette[keyed[x]] for x in colors}
        if len(set(new.values())) == len(set(colors.values())):
            return new
        colors = new


def canonical_form(s: FinStructure):
    """Hashable invariant that is equal exactly for isomorphic structures."""
    labels = canonical_labeling(s)
    code = tuple(
        (n, tuple(sorted(tuple(labels[e] for e in t) for t in ts)))
        for n, ts in sorted(s.relations.items())
    )
    return (s.signature, len(s.domain), code)


def relabel(s: FinStructure, prefix: str = "e") -> FinStructure:
    """Isomorphic copy on elements ``e0, e1, ...`` in canonical order."""
    mapping = canonical_labeling(s)
    return s.rename({x: f"{prefix}{i}" for x, i in mapping.items()})


def canonical_labeling(s: FinStructure) -> dict[str, int]:
    struct_tuples = sorted((n, sorted(ts)) for n, ts in s.relations.items())
    best = None
    best_colors = None

    def rec(colors):
        nonlocal best, best_colors
        colors = _refine(struct_tuples, colors)
        cells: dict[int, list[str]] = {}
        for x, c in colors.items():
            cells.setdefault(c, []).append(x)
        target = next((c for c in sorted(cells) if len(cells[c]) > 1), None)
        if target is None:
            code = tuple(
                (n, tuple(sorted(tuple(colors[e] for e in t) for t in ts)))
                for n, ts in struct_tuples
            )
            if best is None or code < best:
                best, best_colors = code, colors
            return
        for x in sorted(cells[target]):
            rec({y: 2 * c + (1 if c == target and y != x else 0) for y, c in colors.items()})

    if not s.domain:
        return {}
    rec({x: 0 for x in s.domain})
    order = sorted(best_colors, key=best_colors.get)
    return {x: i for i, x in enumerate(order)}
