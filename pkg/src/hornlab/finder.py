"""Finite model search by grounding over a fixed domain and a small DPLL.

Used wherever a module needs "is there a structure on these elements that
satisfies the sentence and these fixed facts" without going through the
Horn-specific chase, e.g. countermodel search for general clauses and the
brute-force joint-embedding oracle.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Iterator, Sequence

from .core import Atom, Clause, FinStructure, Signature, violations


class BudgetExceeded(RuntimeError):
    """A search hit its configured work cap before reaching a verdict."""

    def __init__(self, message: str, progress: dict | None = None):
        super().__init__(message)
        self.progress = progress or {}


class Grounding:
    """Propositional variables for every tuple over ``domain``."""

    def __init__(self, signature: Signature, domain: Sequence[str]):
        self.signature = signature
        self.domain = tuple(domain)
        self.atoms: list[Atom] = []
        self.index: dict[Atom, int] = {}
        for name, arity in signature.items():
            for t in itertools.product(self.domain, repeat=arity):
                a = Atom(name, t)
                self.index[a] = len(self.atoms) + 1
                self.atoms.append(a)

    @property
    def nvars(self) -> int:
        return len(self.atoms)

    def clause_instances(self, clause: Clause) -> Iterator[tuple[int, ...]]:
        vs = sorted(clause.variables)
        neg = list(clause.negatives)
        pos = list(clause.positives)
        for values in itertools.product(self.domain, repeat=len(vs)):
            env = dict(zip(vs, values))
            lits = {-self.index[a.rename(env)] for a in neg}
            lits |= {self.index[a.rename(env)] for a in pos}
            if any(-l in lits for l in lits):
                continue
            yield tuple(sorted(lits))

    def ground(self, clauses: Iterable[Clause]) -> list[tuple[int, ...]]:
        out = set()
        for c in clauses:
            out.update(self.clause_instances(c))
        return sorted(out)

    def structure(self, model: dict[int, bool]) -> FinStructure:
        return FinStructure.from_atoms(
            self.signature,
            (a for a in self.atoms if model.get(self.index[a], False)),
            domain=self.domain,
        )


class _Solver:
    def __init__(self, nvars: int, clauses: list[tuple[int, ...]]):
        self.nvars = nvars
        self.clauses = clauses
        self.occurs: dict[int, list[int]] = {}
        for ci, c in enumerate(clauses):
            for l in c:
                self.occurs.setdefault(l, []).append(ci)
        self.value: dict[int, bool] = {}
        self.trail: list[int] = []
        self.steps = 0

    def lit_true(self, l):
        v = self.value.get(abs(l))
        return None if v is None else (v if l > 0 else not v)

    def assign(self, l) -> bool:
        """Assign literal and propagate; False on conflict."""
        queue = [l]
        while queue:
            l = queue.pop()
            cur = self.lit_true(l)
            if cur is True:
                continue
            if cur is False:
                return False
            self.value[abs(l)] = l > 0
            self.trail.append(abs(l))
            self.steps += 1
            for ci in self.occurs.get(-l, ()):
                unassigned = None
                count = 0
                sat = False
                for m in self.clauses[ci]:
                    t = self.lit_true(m)
                    if t is True:
                        sat = True
                        break
                    if t is None:
                        count += 1
                        unassigned = m
                        if count > 1:
                            break
                if sat:
                    continue
                if count == 0:
                    return False
                if count == 1:
                    queue.append(unassigned)
        return True

    def undo(self, mark):
        while len(self.trail) > mark:
            del self.value[self.trail.pop()]

    def solutions(self, branch_all: bool, budget: int | None) -> Iterator[dict[int, bool]]:
        for c in self.clauses:
            if not c:
                return
        mark = len(self.trail)
        for c in self.clauses:
            if len(c) == 1 and not self.assign(c[0]):
                self.undo(mark)
                return
        yield from self._search(branch_all, budget)
        self.undo(mark)

    def _pick(self, branch_all):
        # prefer a variable from the shortest open clause
        best = None
        for c in self.clauses:
            open_lits = []
            for m in c:
                t = self.lit_true(m)
                if t is True:
                    open_lits = None
                    break
                if t is None:
                    open_lits.append(m)
            if open_lits:
                if best is None or len(open_lits) < len(best):
                    best = open_lits
                    if len(best) <= 2:
                        break
        if best is not None:
            return best[0]
        if branch_all:
            for v in range(1, self.nvars + 1):
                if v not in self.value:
                    return -v
        return None

    def _search(self, branch_all, budget):
        if budget is not None and self.steps > budget:
            raise BudgetExceeded("model search exceeded its step budget", {"steps": self.steps})
        lit = self._pick(branch_all)
        if lit is None:
            yield dict(self.value)
            return
        for choice in (lit, -lit):
            mark = len(self.trail)
            if self.assign(choice):
                yield from self._search(branch_all, budget)
            self.undo(mark)


def iter_models(
    clauses: Sequence[Clause],
    signature: Signature,
    domain: Sequence[str],
    true: Iterable[Atom] = (),
    false: Iterable[Atom] = (),
    budget: int | None = None,
) -> Iterator[FinStructure]:
    """Every structure on ``domain`` satisfying ``clauses`` and the fixed facts."""
    g = Grounding(signature, domain)
    cnf = g.ground(clauses)
    cnf += [(g.index[a],) for a in true]
    cnf += [(-g.index[a],) for a in false]
    solver = _Solver(g.nvars, cnf)
    for m in solver.solutions(branch_all=True, budget=budget):
        yield g.structure(m)


def find_model(
    clauses: Sequence[Clause],
    signature: Signature,
    domain: Sequence[str],
    true: Iterable[Atom] = (),
    false: Iterable[Atom] = (),
    budget: int | None = None,
) -> FinStructure | None:
    """Some model with the fixed facts, or None.

    Ground instances are added lazily: solve, look for a violated instance in
    the candidate, add it, repeat.  Unconstrained tuples default to false, so
    the result is sparse (though not necessarily minimal).
    """
    g = Grounding(signature, domain)
    cnf = {(g.index[a],) for a in true}
    cnf |= {(-g.index[a],) for a in false}
    shapes = [
        (c, [(a.symbol, a.args) for a in c.negatives], [(a.symbol, a.args) for a in c.positives])
        for c in clauses
    ]
    # Atom is a NamedTuple, so plain (symbol, args) pairs hash and compare alike
    index = g.index
    steps = 0
    while True:
        solver = _Solver(g.nvars, sorted(cnf))
        if budget is not None:
            solver.steps = steps
        model = next(iter(solver.solutions(branch_all=False, budget=budget)), None)
        steps = solver.steps
        if model is None:
            return None
        cand = g.structure(model)
        added = False
        for c, neg, pos in shapes:
            for n, env in enumerate(violations(cand, c)):
                if n >= 64:
                    break
                lits = {-index[(s, tuple([env[v] for v in args]))] for s, args in neg}
                lits |= {index[(s, tuple([env[v] for v in args]))] for s, args in pos}
                cnf.add(tuple(sorted(lits)))
                added = True
        if not added:
            return cand
