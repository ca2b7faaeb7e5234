"""SLD resolution for universal Horn clauses.

A deduction of ``psi`` from ``phi`` is either a tautology, or a derivation
(start from a clause of the theory, repeatedly resolve a premise atom against
the conclusion of a renamed-apart clause) whose final clause becomes a
weakening of ``psi`` after a substitution.  A false-concluding clause weakens
to any conclusion.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from .core import (
    BOTTOM,
    Atom,
    HornClause,
    NotHornError,
    Signature,
    UniversalSentence,
    iter_matches,
)

Subst = dict[str, str]


class UnificationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# basic predicates


def is_tautology(clause: HornClause) -> bool:
    return clause.conclusion is not BOTTOM and clause.conclusion in clause.premise


def is_weakening(phi: HornClause, psi: HornClause) -> bool:
    """True when ``phi`` is a weakening of ``psi``.

    Every disjunct of ``psi`` must be a disjunct of ``phi``: the premise of
    ``psi`` is contained in that of ``phi`` and either the conclusions agree or
    ``psi`` concludes false (false contributes no disjunct).
    """
    if not psi.premise <= phi.premise:
        return False
    return psi.conclusion is BOTTOM or psi.conclusion == phi.conclusion


def _apply(a: Atom, s: Mapping[str, str]) -> Atom:
    return a.rename(s)


def _apply_clause(c: HornClause, s: Mapping[str, str]) -> HornClause:
    return c.rename(s)


def mgu(goal: Atom, head: Atom) -> Subst:
    """Most general unifier of two function-free atoms.

    Each class of unified variables is represented by a variable of ``goal``
    when it has one, otherwise by its least name; the result is idempotent.
    """
    if goal.symbol != head.symbol or len(goal.args) != len(head.args):
        raise UnificationError(f"{goal} and {head} do not unify")
    parent: dict[str, str] = {}

    def find(v):
        while parent.get(v, v) != v:
            v = parent[v]
        return v

    goal_vars = set(goal.args)
    for s, t in zip(goal.args, head.args):
        rs, rt = find(s), find(t)
        if rs == rt:
            continue
        # prefer goal-side names, then lexicographic order
        keep, drop = sorted((rs, rt), key=lambda v: (v not in goal_vars, v))
        parent[drop] = keep
    out = {}
    for v in itertools.chain(goal.args, head.args):
        r = find(v)
        if r != v:
            out[v] = r
    return out


def fresh_renaming(clause: HornClause, avoid: set[str], prefix: str = "_") -> Subst:
    out = {}
    n = 0
    for v in sorted(clause.variables):
        while f"{prefix}{n}" in avoid:
            n += 1
        out[v] = f"{prefix}{n}"
        n += 1
    return out


def resolve(
    psi: HornClause, j: int, phi: HornClause, renaming: Mapping[str, str]
) -> tuple[HornClause, Subst]:
    """Resolvent of ``psi`` on its j-th sorted premise atom with ``phi`` renamed by ``renaming``."""
    if phi.conclusion is BOTTOM:
        raise ValueError("side clause concludes false")
    prem = psi.sorted_premise()
    if not 0 <= j < len(prem):
        raise IndexError(f"premise atom index {j} out of range")
    if set(renaming) != set(phi.variables):
        raise ValueError("renaming must cover exactly the side clause variables")
    image = list(renaming.values())
    if len(set(image)) != len(image) or set(image) & psi.variables:
        raise ValueError("side clause is not renamed apart")
    side = phi.rename(renaming)
    sel = prem[j]
    s = mgu(sel, side.conclusion)
    premise = [a for a in prem if a != sel] + list(side.premise)
    concl = psi.conclusion if psi.conclusion is BOTTOM else _apply(psi.conclusion, s)
    return HornClause((_apply(a, s) for a in premise), concl), s


def resolvent(psi: HornClause, j: int, phi: HornClause) -> HornClause:
    return resolve(psi, j, phi, fresh_renaming(phi, set(psi.variables)))[0]


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class SldStep:
    atom: int
    side: int
    renaming: tuple[tuple[str, str], ...]
    unifier: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class Derivation:
    start: int
    steps: tuple[SldStep, ...]
    final: HornClause

    def __len__(self):
        return len(self.steps)


@dataclass(frozen=True)
class Deduction:
    """``kind`` is ``"tautology"`` or ``"weakening"``.

    For a weakening, ``substitution`` maps the final clause of ``derivation``
    onto a clause that ``psi`` weakens.
    """

    kind: str
    derivation: Derivation | None = None
    substitution: tuple[tuple[str, str], ...] = ()

    @property
    def depth(self) -> int:
        return 0 if self.derivation is None else len(self.derivation)


@dataclass(frozen=True)
class Proven:
    deduction: Deduction

    found = True


@dataclass(frozen=True)
class NotFoundWithin:
    max_depth: int
    stats: dict = field(default_factory=dict, compare=False)

    found = False


def _pairs(s: Mapping[str, str]) -> tuple[tuple[str, str], ...]:
    return tuple(sorted(s.items()))


def _horn(sentence: UniversalSentence) -> tuple[HornClause, ...]:
    if not sentence.is_horn:
        raise NotHornError("SLD resolution needs a Horn sentence")
    return sentence.horn_clauses()


def _subsumes(final: HornClause, psi: HornClause, theta: Mapping[str, str]) -> bool:
    if final.variables - set(theta):
        return False
    if not is_weakening(psi, _apply_clause(final, theta)):
        return False
    return True


def verify_deduction(sentence: UniversalSentence, psi: HornClause, d: Deduction) -> bool:
    """Independent replay of a certificate."""
    try:
        clauses = _horn(sentence)
        if d.kind == "tautology":
            return d.derivation is None and is_tautology(psi)
        if d.kind != "weakening" or d.derivation is None:
            return False
        der = d.derivation
        if not 0 <= der.start < len(clauses):
            return False
        cur = clauses[der.start]
        for st in der.steps:
            if not 0 <= st.side < len(clauses):
                return False
            side = clauses[st.side]
            expected, _ = resolve(cur, st.atom, side, dict(st.renaming))
            # the supplied unifier must unify and give the same resolvent
            sel = cur.sorted_premise()[st.atom]
            u = dict(st.unifier)
            head = side.conclusion.rename(dict(st.renaming))
            if _apply(sel, u) != _apply(head, u):
                return False
            prem = [a for a in cur.sorted_premise() if a != sel]
            prem += list(side.rename(dict(st.renaming)).premise)
            concl = cur.conclusion if cur.conclusion is BOTTOM else _apply(cur.conclusion, u)
            got = HornClause((_apply(a, u) for a in prem), concl)
            if not _variant(got, expected):
                return False
            cur = got
        if cur != der.final:
            return False
        return _subsumes(cur, psi, dict(d.substitution))
    except (ValueError, IndexError, KeyError):
        return False


def _variant(a: HornClause, b: HornClause) -> bool:
    if len(a.premise) != len(b.premise) or (a.conclusion is BOTTOM) != (b.conclusion is BOTTOM):
        return False
    return _canonical(a) == _canonical(b)


def _canonical(c: HornClause):
    """Exact renaming-invariant key (tries all orders of equal-looking atoms)."""
    best = None
    atoms = sorted(c.premise, key=lambda a: (a.symbol, _shape(a.args)))
    groups = [list(g) for _, g in itertools.groupby(atoms, key=lambda a: (a.symbol, _shape(a.args)))]
    head = [] if c.conclusion is BOTTOM else [c.conclusion]
    for perm in itertools.product(*(itertools.permutations(g) for g in groups)):
        order = head + [a for g in perm for a in g]
        names: dict[str, str] = {}
        for a in order:
            for v in a.args:
                names.setdefault(v, f"v{len(names)}")
        key = (
            None if c.conclusion is BOTTOM else c.conclusion.rename(names),
            tuple(sorted(a.rename(names) for a in c.premise)),
        )
        if best is None or key < best:
            best = key
    return best


def _shape(args: Sequence[str]) -> tuple[int, ...]:
    seen: dict[str, int] = {}
    return tuple(seen.setdefault(v, len(seen)) for v in args)


# ---------------------------------------------------------------------------
# search


class _Search:
    def __init__(self, clauses: Sequence[HornClause], psi: HornClause):
        self.clauses = clauses
        self.psi = psi
        self.facts: dict[str, set] = {}
        for a in psi.premise:
            self.facts.setdefault(a.symbol, set()).add(a.args)
        self.counter = 0
        self.failed: dict = {}
        self.nodes = 0

    def fresh(self, phi: HornClause) -> Subst:
        out = {}
        for v in sorted(phi.variables):
            self.counter += 1
            out[v] = f"_{self.counter}"
        return out

    def thetas(self, leaves: Sequence[Atom], concl) -> Iterator[Subst]:
        start: Subst = {}
        if self.psi.conclusion is not BOTTOM and concl is not BOTTOM:
            for v, t in zip(concl.args, self.psi.conclusion.args):
                if start.setdefault(v, t) != t:
                    return
        yield from iter_matches(leaves, _Facts(self.facts), start)

    def concl_ok(self, concl) -> bool:
        if concl is BOTTOM:
            return True
        if self.psi.conclusion is BOTTOM or concl.symbol != self.psi.conclusion.symbol:
            return False
        return next(self.thetas([], concl), None) is not None

    def key(self, cur: HornClause, leaves: frozenset[Atom]):
        # leaves are tagged so the key separates decided from pending atoms
        tagged = HornClause(
            [Atom(("L:" if a in leaves else "P:") + a.symbol, a.args) for a in cur.premise],
            cur.conclusion,
        )
        return _canonical(tagged) if len(cur.premise) <= 7 else None

    def run(self, cur: HornClause, leaves: frozenset[Atom], steps: list, budget: int):
        self.nodes += 1
        pending = sorted(cur.premise - leaves)
        if not pending:
            concl = cur.conclusion
            for th in self.thetas(sorted(cur.premise), concl):
                return list(steps), th
            return None
        k = self.key(cur, leaves)
        if k is not None and self.failed.get(k, -1) >= budget:
            return None
        sel = pending[0]
        # keep the atom as a leaf
        new_leaves = leaves | {sel}
        if next(self.thetas(sorted(new_leaves), cur.conclusion), None) is not None:
            got = self.run(cur, new_leaves, steps, budget)
            if got:
                return got
        if budget > 0:
            j = cur.sorted_premise().index(sel)
            for i, side in enumerate(self.clauses):
                if side.conclusion is BOTTOM or side.conclusion.symbol != sel.symbol:
                    continue
                ren = self.fresh(side)
                nxt, s = resolve(cur, j, side, ren)
                if not self.concl_ok(nxt.conclusion):
                    continue
                nl = frozenset(_apply(a, s) for a in leaves)
                if nl and next(self.thetas(sorted(nl), nxt.conclusion), None) is None:
                    continue
                steps.append(SldStep(j, i, _pairs(ren), _pairs(s)))
                got = self.run(nxt, nl, steps, budget - 1)
                steps.pop()
                if got:
                    return got
        if k is not None:
            self.failed[k] = max(self.failed.get(k, -1), budget)
        return None


class _Facts(dict):
    """Relation lookup that treats unknown symbols as empty."""

    def __missing__(self, key):
        return ()


def sld_deduce(
    sentence: UniversalSentence,
    psi: HornClause,
    max_depth: int = 16,
    node_budget: int | None = None,
) -> Proven | NotFoundWithin:
    """Search for a deduction by iterative deepening on the number of resolution steps."""
    clauses = _horn(sentence)
    if is_tautology(psi):
        return Proven(Deduction("tautology"))
    search = _Search(clauses, psi)
    for depth in range(max_depth + 1):
        search.failed.clear()
        for i, c in enumerate(clauses):
            if not search.concl_ok(c.conclusion):
                continue
            got = search.run(c, frozenset(), [], depth)
            if got:
                steps, theta = got
                cur = c
                for st in steps:
                    cur, _ = resolve(cur, st.atom, clauses[st.side], dict(st.renaming))
                d = Deduction("weakening", Derivation(i, tuple(steps), cur), _pairs(theta))
                if not verify_deduction(sentence, psi, d):
                    raise RuntimeError("internal error: found deduction does not verify")
                return Proven(d)
            if node_budget is not None and search.nodes > node_budget:
                return NotFoundWithin(depth, {"nodes": search.nodes, "budget_hit": True})
    return NotFoundWithin(max_depth, {"nodes": search.nodes})


# ---------------------------------------------------------------------------
# text format


def _fmt_map(pairs) -> str:
    return ",".join(f"{a}={b}" for a, b in pairs) or "-"


def _read_map(text: str) -> tuple[tuple[str, str], ...]:
    if text == "-":
        return ()
    out = []
    for part in text.split(","):
        a, sep, b = part.partition("=")
        if not sep or not a or not b:
            raise ValueError(f"bad mapping {text!r}")
        out.append((a, b))
    return tuple(out)


def format_deduction(d: Deduction) -> str:
    if d.kind == "tautology":
        return "deduction tautology\n"
    der = d.derivation
    lines = ["deduction weakening", f"start {der.start}"]
    for st in der.steps:
        lines.append(
            f"step atom {st.atom} side {st.side} rename {_fmt_map(st.renaming)} unify {_fmt_map(st.unifier)}"
        )
    lines.append(f"final clause {der.final};")
    lines.append(f"theta {_fmt_map(d.substitution)}")
    return "\n".join(lines) + "\n"


def parse_deduction(text: str, signature: Signature) -> Deduction:
    from .parse import parse_theory

    lines = [l.strip() for l in text.replace("\r\n", "\n").splitlines() if l.strip()]
    if not lines or not lines[0].startswith("deduction "):
        raise ValueError("expected 'deduction' header")
    kind = lines[0].split()[1]
    if kind == "tautology":
        if len(lines) != 1:
            raise ValueError("tautology certificates have no body")
        return Deduction("tautology")
    if kind != "weakening":
        raise ValueError(f"unknown deduction kind {kind!r}")
    start = None
    steps = []
    final = None
    theta = ()
    for line in lines[1:]:
        f = line.split()
        if f[0] == "start" and len(f) == 2:
            start = int(f[1])
        elif f[0] == "step" and len(f) == 9 and f[1::2] == ["atom", "side", "rename", "unify"]:
            steps.append(SldStep(int(f[2]), int(f[4]), _read_map(f[6]), _read_map(f[8])))
        elif f[0] == "final":
            cs = parse_theory(line[len("final"):], signature).clauses
            if len(cs) != 1 or not isinstance(cs[0], HornClause):
                raise ValueError("final must be one Horn clause")
            final = cs[0]
        elif f[0] == "theta" and len(f) == 2:
            theta = _read_map(f[1])
        else:
            raise ValueError(f"cannot read certificate line {line!r}")
    if start is None or final is None:
        raise ValueError("certificate needs 'start' and 'final'")
    return Deduction("weakening", Derivation(start, tuple(steps), final), theta)
