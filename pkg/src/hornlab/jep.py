"""The joint embedding property for classes of models of universal Horn sentences.

JEP fails exactly when there are conjunctions ``phi1(x1)`` and ``phi2(x2)``
over disjoint variables, each consistent with the theory, and ``chi`` (false,
or an atom over ``x1``) that follows from ``phi1 & phi2`` but not from
``phi1`` alone.  ``jep_refute`` searches for such witnesses, ``joint_embed``
builds the joint structure or extracts a witness from two models, and
``jep_bruteforce`` is an independent semantic check over small models.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .chase import (
    consistent_with,
    entailed_atoms,
    entails_horn,
    saturate,
)
from .core import (
    BOTTOM,
    Atom,
    FinStructure,
    HornClause,
    NotHornError,
    Signature,
    UniversalSentence,
    atoms_variables,
    canonical_form,
    canonical_labeling,
    disjoint_union,
    is_embedding,
    iter_matches,
    satisfies,
)
from .convexity import enumerate_models
from .finder import BudgetExceeded, find_model

DEFAULT_MAX_ATOMS = 6
DEFAULT_MAX_VARS = 5


# ---------------------------------------------------------------------------
# connectedness


def variable_graph(clause: HornClause) -> tuple[frozenset[str], frozenset[frozenset[str]]]:
    """Vertices are the clause variables; edges join variables sharing a premise atom."""
    edges = set()
    for a in clause.premise:
        for u, v in itertools.combinations(sorted(set(a.args)), 2):
            edges.add(frozenset((u, v)))
    return frozenset(clause.variables), frozenset(edges)


def is_connected_clause(clause: HornClause) -> bool:
    vertices, edges = variable_graph(clause)
    if len(vertices) <= 1:
        return True
    start = min(vertices)
    seen = {start}
    todo = [start]
    adj: dict[str, set[str]] = {v: set() for v in vertices}
    for e in edges:
        u, v = tuple(e)
        adj[u].add(v)
        adj[v].add(u)
    while todo:
        for w in adj[todo.pop()]:
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return seen == vertices


def _horn(sentence: UniversalSentence) -> tuple[HornClause, ...]:
    if not sentence.is_horn:
        raise NotHornError("expected a Horn sentence")
    return sentence.horn_clauses()


def all_connected(sentence: UniversalSentence) -> bool:
    return all(is_connected_clause(c) for c in _horn(sentence))


# ---------------------------------------------------------------------------
# domination


def dominates(sentence: UniversalSentence, psi: Iterable[Atom], phi: Iterable[Atom]) -> bool:
    """``psi <= phi``: every false-or-atom over vars(phi) that psi yields, phi yields."""
    psi, phi = list(psi), list(phi)
    xs = atoms_variables(phi)
    if not consistent_with(sentence, phi):
        return True
    if not consistent_with(sentence, psi):
        return False
    return entailed_atoms(sentence, psi, xs) <= entailed_atoms(sentence, phi, xs)


# ---------------------------------------------------------------------------
# witnesses


@dataclass(frozen=True)
class JepWitness:
    phi1: frozenset[Atom]
    phi2: frozenset[Atom]
    chi: object  # Atom or BOTTOM

    def __init__(self, phi1, phi2, chi):
        object.__setattr__(self, "phi1", frozenset(phi1))
        object.__setattr__(self, "phi2", frozenset(phi2))
        object.__setattr__(self, "chi", chi)

    @property
    def size(self) -> int:
        return len(self.phi1) + len(self.phi2)

    @property
    def variable_count(self) -> int:
        return len(atoms_variables(self.phi1 | self.phi2))


def witness_problems(sentence: UniversalSentence, w: JepWitness) -> list[str]:
    """Reasons why ``w`` is not a witness (empty when it is one)."""
    out = []
    x1, x2 = atoms_variables(w.phi1), atoms_variables(w.phi2)
    if x1 & x2:
        out.append("phi1 and phi2 share variables")
    if w.chi is not BOTTOM and not set(w.chi.args) <= x1:
        out.append("chi is not over the variables of phi1")
    for i, phi in ((1, w.phi1), (2, w.phi2)):
        if not consistent_with(sentence, phi):
            out.append(f"phi{i} is inconsistent with the theory")
    if not entails_horn(sentence, HornClause(w.phi1 | w.phi2, w.chi)).entailed:
        out.append("phi1 & phi2 does not entail chi")
    if entails_horn(sentence, HornClause(w.phi1, w.chi)).entailed:
        out.append("phi1 alone already entails chi")
    return out


def verify_witness(sentence: UniversalSentence, w: JepWitness) -> bool:
    return not witness_problems(sentence, w)


@dataclass(frozen=True)
class Found:
    witness: JepWitness
    stats: dict = field(default_factory=dict, compare=False)

    found = True


@dataclass(frozen=True)
class NoneWithin:
    max_atoms: int
    max_vars: int
    side_vars: int | None = None
    stats: dict = field(default_factory=dict, compare=False)

    found = False


def _ext_structure(sig: Signature, side1, side2, chi) -> FinStructure:
    ext = dict(sig.items())
    ext["__side1"] = 1
    ext["__side2"] = 1
    if chi is not BOTTOM:
        ext["__chi"] = len(chi.args)
    extra = [Atom("__side1", (v,)) for v in atoms_variables(side1)]
    extra += [Atom("__side2", (v,)) for v in atoms_variables(side2)]
    if chi is not BOTTOM:
        extra.append(Atom("__chi", chi.args))
    return FinStructure.from_atoms(Signature(ext), list(side1) + list(side2) + extra)


def canonical_witness(sig: Signature, w: JepWitness) -> JepWitness:
    """Rename to ``x1, x2, ...`` (phi1) and ``y1, y2, ...`` (phi2) in canonical order."""
    s = _ext_structure(sig, w.phi1, w.phi2, w.chi)
    order = sorted(canonical_labeling(s).items(), key=lambda kv: kv[1])
    x1 = atoms_variables(w.phi1)
    names = {}
    for v, _ in order:
        if v in x1:
            names[v] = f"x{sum(1 for n in names.values() if n[0] == 'x') + 1}"
        else:
            names[v] = f"y{sum(1 for n in names.values() if n[0] == 'y') + 1}"
    chi = w.chi if w.chi is BOTTOM else w.chi.rename(names)
    return JepWitness((a.rename(names) for a in w.phi1), (a.rename(names) for a in w.phi2), chi)


def _witness_key(sig, side1, side2, chi):
    return canonical_form(_ext_structure(sig, side1, side2, chi))[1:]


# ---------------------------------------------------------------------------
# bounded witness search


class _Supports:
    """Subset-minimal sets of pool atoms that yield each atom (and false).

    Every pool atom is a potential premise; a support is the set of leaves
    of some derivation.  Supports larger than ``cap`` are discarded.
    """

    def __init__(
        self,
        clauses,
        signature: Signature,
        pool: Sequence[str],
        cap: int,
        budget,
        comp_atoms: int | None = None,
        comp_vars: int | None = None,
    ):
        self.cap = cap
        # every component of a witness support lies on one side, and the
        # components of its sub-supports lie inside those, so both caps prune
        self.comp_atoms = comp_atoms
        self.comp_vars = comp_vars
        self.budget = budget
        self.work = 0
        self._fit_memo: dict[frozenset, bool] = {}
        self.fam: dict[object, list[frozenset]] = {}
        atoms = [
            Atom(n, t) for n, k in signature.items() for t in itertools.product(pool, repeat=k)
        ]
        for a in atoms:
            self.fam[a] = [frozenset((a,))]
        self.fam[BOTTOM] = []
        ground = set()
        for c in clauses:
            vs = sorted(c.variables)
            for vals in itertools.product(pool, repeat=len(vs)):
                env = dict(zip(vs, vals))
                prem = tuple(sorted({a.rename(env) for a in c.premise}))
                concl = BOTTOM if c.conclusion is BOTTOM else c.conclusion.rename(env)
                if concl is not BOTTOM and concl in prem:
                    continue
                ground.add((prem, concl))
        self.ground = sorted(ground, key=repr)
        self._run()

    def _fits(self, u: frozenset) -> bool:
        r = self._fit_memo.get(u)
        if r is None:
            r = self._fit_memo[u] = self._fits_raw(u)
        return r

    def _fits_raw(self, u: frozenset) -> bool:
        if self.comp_vars is not None and len(atoms_variables(u)) > self.comp_vars:
            for comp in _components(sorted(u)):
                if len(atoms_variables(comp)) > self.comp_vars:
                    return False
        if self.comp_atoms is not None and len(u) > self.comp_atoms:
            for comp in _components(sorted(u)):
                if len(comp) > self.comp_atoms:
                    return False
        return True

    def _add(self, target, u, delta) -> None:
        fam = self.fam[target]
        for s in fam:
            if s <= u:
                return
        fam[:] = [s for s in fam if not u <= s]
        fam.append(u)
        delta.setdefault(target, []).append(u)

    def _tick(self, n=1):
        self.work += n
        if self.budget is not None and self.work > self.budget:
            raise BudgetExceeded("witness search exceeded its work budget", {"work": self.work})

    def _run(self):
        for prem, concl in self.ground:
            if not prem:
                self._add(concl, frozenset(), {})
        delta = {a: list(f) for a, f in self.fam.items() if f}
        while delta:
            new: dict = {}
            live = {k: set(v) for k, v in delta.items()}
            for prem, concl in self.ground:
                if not any(p in live for p in prem):
                    continue
                # every combination that uses at least one new support
                for i, p in enumerate(prem):
                    if p not in live:
                        continue
                    choices = []
                    for j, q in enumerate(prem):
                        if j == i:
                            choices.append([s for s in self.fam[q] if s in live[q]])
                        elif j < i and q in live:
                            choices.append([s for s in self.fam[q] if s not in live[q]])
                        else:
                            choices.append(self.fam[q])
                    self._combine(choices, concl, new)
            delta = new

    def _combine(self, choices, concl, new):
        def rec(i, acc):
            if i == len(choices):
                self._tick()
                self._add(concl, acc, new)
                return
            for s in choices[i]:
                u = acc | s
                if len(u) <= self.cap and self._fits(u):
                    rec(i + 1, u)

        rec(0, frozenset())


def _components(atoms: Sequence[Atom]) -> list[list[Atom]]:
    parent: dict[str, str] = {}

    def find(v):
        while parent.setdefault(v, v) != v:
            v = parent[v]
        return v

    for a in atoms:
        for v in a.args[1:]:
            parent[find(v)] = find(a.args[0])
    groups: dict[str, list[Atom]] = {}
    for a in atoms:
        groups.setdefault(find(a.args[0]), []).append(a)
    return sorted((sorted(g) for g in groups.values()), key=lambda g: g[0])


def _splits(support: frozenset, chi, max_atoms, side_vars):
    comps = _components(sorted(support))
    chi_vars = set() if chi is BOTTOM else set(chi.args)
    forced = [c for c in comps if chi_vars & atoms_variables(c)]
    if not chi_vars <= atoms_variables(support):
        return
    free = [c for c in comps if c not in forced]
    for mask in itertools.product((1, 2), repeat=len(free)):
        side1 = [a for c in forced for a in c]
        side2 = []
        for c, m in zip(free, mask):
            (side1 if m == 1 else side2).extend(c)
        if not side1 or not side2:
            continue
        if len(side1) > max_atoms or len(side2) > max_atoms:
            continue
        if side_vars is not None and (
            len(atoms_variables(side1)) > side_vars or len(atoms_variables(side2)) > side_vars
        ):
            continue
        yield frozenset(side1), frozenset(side2)


def jep_refute(
    sentence: UniversalSentence,
    max_atoms: int = DEFAULT_MAX_ATOMS,
    max_vars: int = DEFAULT_MAX_VARS,
    side_vars: int | None = None,
    budget: int | None = None,
) -> Found | NoneWithin:
    """Search for a JEP-failure witness.

    Bounds: at most ``max_atoms`` atoms in each of phi1 and phi2, at most
    ``max_vars`` variables in total, and (optionally) at most ``side_vars``
    variables on each side.  The reported witness has the fewest atoms, then
    the fewest variables.  Complete within the bounds when every clause is
    range-restricted (conclusion variables occur in the premise).
    """
    clauses = _horn(sentence)
    sig = sentence.signature
    pool = [f"v{i}" for i in range(max_vars)]
    stats = {"checked": 0, "levels": []}
    cap_max = 2 * max_atoms
    caps = []
    c = 2
    while c < cap_max:
        caps.append(c)
        c *= 2
    caps.append(cap_max)
    for cap in caps:
        sup = _Supports(
            clauses,
            sig,
            pool,
            cap,
            budget,
            comp_atoms=max_atoms,
            comp_vars=min(side_vars or max_vars, max_vars - 1),
        )
        stats["levels"].append({"cap": cap, "work": sup.work})
        cands = {}
        for chi, fam in sup.fam.items():
            for s in fam:
                if chi is not BOTTOM and chi in s:
                    continue
                for side1, side2 in _splits(s, chi, max_atoms, side_vars):
                    key = _witness_key(sig, side1, side2, chi)
                    if key not in cands:
                        cands[key] = (side1, side2, chi)
        order = sorted(
            cands.values(),
            key=lambda t: (
                len(t[0]) + len(t[1]),
                len(atoms_variables(t[0] | t[1])),
                _text(canonical_witness(sig, JepWitness(*t))),
            ),
        )
        for side1, side2, chi in order:
            stats["checked"] += 1
            if not consistent_with(sentence, side1) or not consistent_with(sentence, side2):
                continue
            if chi is not BOTTOM and chi in entailed_atoms(sentence, side1):
                continue
            w = canonical_witness(sig, JepWitness(side1, side2, chi))
            problems = witness_problems(sentence, w)
            if problems:
                raise RuntimeError(f"internal error: candidate witness fails: {problems}")
            return Found(w, stats)
    return NoneWithin(max_atoms, max_vars, side_vars, stats)


def _text(w: JepWitness) -> str:
    return f"{sorted(map(str, w.phi1))}|{sorted(map(str, w.phi2))}|{w.chi}"


# ---------------------------------------------------------------------------
# joint embedding of two models


@dataclass(frozen=True)
class Joined:
    c: FinStructure
    e1: dict
    e2: dict

    joined = True


@dataclass(frozen=True)
class Refused:
    witness: JepWitness

    joined = False


def joint_embed(sentence: UniversalSentence, b1: FinStructure, b2: FinStructure) -> Joined | Refused:
    """Saturate the disjoint union; join, or read off a witness."""
    for i, b in ((1, b1), (2, b2)):
        if not satisfies(b, sentence):
            raise ValueError(f"B{i} is not a model of the sentence")
    d, e1, e2 = disjoint_union(b1, b2)
    res = saturate(d, sentence)
    phi1 = [a.rename(e1) for a in b1.atoms()]
    phi2 = [a.rename(e2) for a in b2.atoms()]
    if not res.consistent:
        return Refused(JepWitness(phi1, phi2, BOTTOM))
    c = res.structure
    img1, img2 = set(e1.values()), set(e2.values())
    for a in c.atoms():
        if set(a.args) <= img1 and not d.holds(a):
            return Refused(JepWitness(phi1, phi2, a))
        if set(a.args) <= img2 and not d.holds(a):
            return Refused(JepWitness(phi2, phi1, a))
    if not (is_embedding(e1, b1, c) and is_embedding(e2, b2, c)):
        raise RuntimeError("internal error: saturated union does not embed the models")
    return Joined(c, e1, e2)


# ---------------------------------------------------------------------------
# brute-force oracle


@dataclass(frozen=True)
class Holds:
    max_model_size: int
    stats: dict = field(default_factory=dict, compare=False)

    holds = True


@dataclass(frozen=True)
class Fails:
    b1: FinStructure
    b2: FinStructure

    holds = False


class _CrossCheck:
    """Decides whether the disjoint union of two models is a model.

    For range-restricted clauses a violation in the union must spread the
    premise components over both sides, so it is enough to know, per model,
    which groups of components match and which match with the conclusion
    false.  ``None`` from ``for_theory`` means some clause is not
    range-restricted and the caller should check the union directly.
    """

    def __init__(self, clauses):
        self.clauses = list(clauses)
        self.splits = []
        self.disconnected = []
        for ci, c in enumerate(clauses):
            comps = _components(sorted(c.premise))
            if len(comps) < 2:
                continue
            self.disconnected.append((ci, comps))
            concl = c.conclusion
            for mask in range(1, 2 ** len(comps) - 1):
                k1 = [a for i, g in enumerate(comps) if mask >> i & 1 for a in g]
                k2 = [a for i, g in enumerate(comps) if not mask >> i & 1 for a in g]
                own = None
                if concl is not BOTTOM:
                    cv = set(concl.args)
                    if cv <= atoms_variables(k1):
                        own = 1
                    elif cv <= atoms_variables(k2):
                        own = 2
                self.splits.append((k1, k2, concl if own else None, own))

    @classmethod
    def for_theory(cls, clauses):
        for c in clauses:
            if not c.variables <= atoms_variables(c.premise):
                return None
        return cls(clauses)

    def profile(self, m: FinStructure):
        """Per split: (side-1 part matches, side-1 part matches with the
        conclusion false, and the same for side 2)."""
        out = []
        for k1, k2, concl, own in self.splits:
            row = []
            for part, mine in ((k1, own == 1), (k2, own == 2)):
                hit = miss = False
                for env in iter_matches(part, m.relations):
                    hit = True
                    if not mine or not m.holds(concl.rename(env)):
                        miss = True
                        break
                row.append((hit, miss))
            out.append(row)
        return out

    @staticmethod
    def union_is_model(p1, p2) -> bool:
        for (a1, a2), (b1, b2) in zip(p1, p2):
            # a part that does not hold the conclusion has miss == hit
            if (a1[1] and b2[1]) or (b1[1] and a2[1]):
                return False
        return True

    def tables(self, m: FinStructure, side: int):
        """Relations with elements tagged by side, and every match of every
        component of every disconnected clause."""
        rels = {k: {tuple((side, e) for e in t) for t in v} for k, v in m.relations.items()}
        comp_matches = {}
        for ci, comps in self.disconnected:
            comp_matches[ci] = [
                [{v: (side, e) for v, e in env.items()} for env in iter_matches(comp, m.relations)]
                for comp in comps
            ]
        return rels, comp_matches

    def joins(self, t1, t2) -> bool:
        """Whether saturating the disjoint union adds neither false nor a
        tuple inside one side.

        The first cross firings come from the disconnected clauses, with each
        component matched inside one model; after that only instances that
        use a newly added mixed tuple can fire.
        """
        rels1, cm1 = t1
        rels2, cm2 = t2
        rels = {k: rels1[k] | rels2[k] for k in rels1}
        own = (None, rels1, rels2)
        delta: list[Atom] = []

        def emit(concl, env) -> bool:
            if concl is BOTTOM:
                return False
            a = concl.rename(env)
            sides = {e[0] for e in a.args}
            if len(sides) == 1:
                return a.args in own[sides.pop()][a.symbol]
            if a.args not in rels[a.symbol]:
                rels[a.symbol].add(a.args)
                delta.append(a)
            return True

        for ci, comps in self.disconnected:
            concl = self.clauses[ci].conclusion
            m = len(comps)
            for mask in range(1, 2**m - 1):
                parts = [(cm1 if mask >> i & 1 else cm2)[ci][i] for i in range(m)]
                for combo in itertools.product(*parts):
                    env = {}
                    for e in combo:
                        env.update(e)
                    if not emit(concl, env):
                        return False
        while delta:
            # semi-naive round: one premise atom must match a tuple added last round
            view = dict(rels)
            for a in delta:
                view.setdefault("\0" + a.symbol, set()).add(a.args)
            delta.clear()
            for c in self.clauses:
                prem = sorted(c.premise)
                for p, pat in enumerate(prem):
                    key = "\0" + pat.symbol
                    if key not in view:
                        continue
                    pinned = prem[:p] + [Atom(key, pat.args)] + prem[p + 1 :]
                    for env in list(iter_matches(pinned, view)):
                        if not emit(c.conclusion, env):
                            return False
        return True


def _overlaps(n1: Sequence[str], n2: Sequence[str]):
    """Partial injections from n1 into n2, the empty one first."""
    for k in range(min(len(n1), len(n2)) + 1):
        for left in itertools.combinations(n1, k):
            for right in itertools.permutations(n2, k):
                yield dict(zip(left, right))


def find_joint(
    sentence: UniversalSentence,
    b1: FinStructure,
    b2: FinStructure,
    union_known_bad: bool = False,
) -> tuple[FinStructure, dict, dict] | None:
    """A model C with embeddings of b1 and b2, with |C| <= |b1| + |b2|, or None.

    Exhaustive over all ways the two images may overlap; cross tuples are
    left to the model search.
    """
    sig = sentence.signature
    d, e1, e2 = disjoint_union(b1, b2)
    if not union_known_bad and satisfies(d, sentence):
        return d, e1, e2
    # the saturated union is closed by construction; it joins the two models
    # when both still embed
    res = saturate(d, sentence)
    if res.consistent:
        c = res.structure
        if is_embedding(e1, b1, c) and is_embedding(e2, b2, c):
            return c, e1, e2
    for pi in _overlaps(b1.domain, b2.domain):
        f1 = {x: f"{x}#1" for x in b1.domain}
        inv = {v: k for k, v in pi.items()}
        f2 = {y: (f1[inv[y]] if y in inv else f"{y}#2") for y in b2.domain}
        domain = sorted(set(f1.values()) | set(f2.values()))
        true, false = set(), set()
        for b, f in ((b1, f1), (b2, f2)):
            for name, k in sig.items():
                for t in itertools.product(b.domain, repeat=k):
                    a = Atom(name, tuple(f[e] for e in t))
                    (true if t in b.relations[name] else false).add(a)
        if true & false:
            continue
        m = find_model(sentence.clauses, sig, domain, true=sorted(true), false=sorted(false))
        if m is not None:
            if not (is_embedding(f1, b1, m) and is_embedding(f2, b2, m) and satisfies(m, sentence)):
                raise RuntimeError("internal error: joint structure does not verify")
            return m, f1, f2
    return None


def jep_bruteforce(
    sentence: UniversalSentence,
    max_model_size: int,
    budget: int | None = None,
) -> Holds | Fails:
    """Check every pair of models with at most ``max_model_size`` elements.

    Pairs of models of exactly the maximal size decide the verdict: without
    equality every model embeds into a larger one obtained by duplicating an
    element, and joint embeddings restrict to substructures.  On failure the
    reported pair is a smallest failing one.
    """
    _horn(sentence)
    n = max_model_size
    by_size: dict[int, list[FinStructure]] = {}
    for m in enumerate_models(sentence, n, prune_iso=True, budget=budget):
        by_size.setdefault(m.size(), []).append(m)
    top = by_size.get(n, [])
    pairs = 0
    cross = _CrossCheck.for_theory(_horn(sentence))
    profiles: dict[int, list] = {}
    tables: dict[tuple[int, int], tuple] = {}

    def table(b, side):
        key = (id(b), side)
        if key not in tables:
            tables[key] = cross.tables(b, side)
        return tables[key]

    def joint(b1, b2):
        if cross is None:
            return find_joint(sentence, b1, b2) is not None
        for b in (b1, b2):
            if id(b) not in profiles:
                profiles[id(b)] = cross.profile(b)
        if cross.union_is_model(profiles[id(b1)], profiles[id(b2)]):
            return True
        if cross.joins(table(b1, 1), table(b2, 2)):
            return True
        # a refusal is only reported after the exhaustive search agrees
        if find_joint(sentence, b1, b2, union_known_bad=True) is not None:
            raise RuntimeError("internal error: cross saturation refused a joinable pair")
        return False

    def tick():
        nonlocal pairs
        pairs += 1
        if budget is not None and pairs > budget:
            raise BudgetExceeded(f"more than {budget} model pairs", {"pairs": pairs})

    failing = None
    for i, b1 in enumerate(top):
        for b2 in top[i:]:
            tick()
            if not joint(b1, b2):
                failing = (b1, b2)
                break
        if failing:
            break
    if failing is None:
        return Holds(n, {"models": sum(map(len, by_size.values())), "pairs": pairs})
    sizes = sorted(by_size)
    for total in range(2, 2 * n + 1):
        for s1 in sizes:
            s2 = total - s1
            if s2 < s1 or s2 not in by_size:
                continue
            for i, b1 in enumerate(by_size[s1]):
                start = i if s1 == s2 else 0
                for b2 in by_size[s2][start:]:
                    tick()
                    if not joint(b1, b2):
                        return Fails(b1, b2)
    return Fails(*failing)


# ---------------------------------------------------------------------------
# witness files


def format_witness(sentence: UniversalSentence, w: JepWitness) -> str:
    """Witness text with the saturation traces behind each of its three conditions."""
    from .chase import _free_structure

    def atoms(xs):
        return ", ".join(map(str, sorted(xs)))

    lines = [
        "witness",
        f"phi1 {atoms(w.phi1)}",
        f"phi2 {atoms(w.phi2)}",
        f"chi {w.chi}",
    ]
    for name, xs in (("joint", w.phi1 | w.phi2), ("phi1", w.phi1), ("phi2", w.phi2)):
        res = saturate(_free_structure(sentence, xs), sentence)
        lines.append(f"trace {name} {'consistent' if res.consistent else 'inconsistent'}")
        lines.extend(str(f) for f in res.trace)
        lines.append("end")
    return "\n".join(lines) + "\n"


def parse_witness(text: str, signature: Signature) -> JepWitness:
    from .parse import parse_atoms

    fields = {}
    for line in text.replace("\r\n", "\n").splitlines():
        head, _, rest = line.strip().partition(" ")
        if head in ("phi1", "phi2", "chi") and head not in fields:
            fields[head] = rest.strip()
        if head == "trace":
            break
    if set(fields) != {"phi1", "phi2", "chi"}:
        raise ValueError("witness needs phi1, phi2 and chi lines")
    chi_text = fields["chi"]
    if chi_text == "false":
        chi = BOTTOM
    else:
        got = parse_atoms(chi_text, signature)
        if len(got) != 1:
            raise ValueError("chi must be one atom or false")
        chi = got[0]
    return JepWitness(parse_atoms(fields["phi1"], signature), parse_atoms(fields["phi2"], signature), chi)
