"""Forward chaining of universal Horn clauses over a fixed finite domain."""

from __future__ import annotations

import itertools
import json
import random
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .core import (
    BOTTOM,
    Atom,
    FinStructure,
    HornClause,
    NotHornError,
    SignatureError,
    UniversalSentence,
    atoms_variables,
    iter_assignments,
    iter_matches,
)
from .parse import format_element

# placeholder element when a query mentions no variables at all; structures
# have non-empty domains
_POINT = "_"


class InconsistentInput(ValueError):
    """The atoms together with the theory derive false."""


@dataclass(frozen=True)
class Firing:
    """One step of a saturation: a clause fired under an assignment.

    ``added`` is the new tuple, or None for a false-concluding clause.
    """

    clause: int
    assignment: tuple[tuple[str, str], ...]
    added: Atom | None

    @property
    def is_bottom(self) -> bool:
        return self.added is None

    def env(self) -> dict[str, str]:
        return dict(self.assignment)

    def __str__(self):
        asg = ",".join(f"{v}={format_element(e)}" for v, e in self.assignment) or "-"
        if self.added is None:
            return f"bottom {self.clause} {asg}"
        return f"fire {self.clause} {asg} add {_format_ground(self.added)}"


@dataclass(frozen=True)
class SaturationResult:
    consistent: bool
    structure: FinStructure
    trace: tuple[Firing, ...] = field(default=())

    @property
    def saturated(self) -> FinStructure | None:
        return self.structure if self.consistent else None

    @property
    def bottom(self) -> Firing | None:
        if not self.consistent and self.trace:
            return self.trace[-1]
        return None

    def trace_text(self) -> str:
        return "".join(f"{f}\n" for f in self.trace)


def _format_ground(a: Atom) -> str:
    return f"{a.symbol}({','.join(format_element(e) for e in a.args)})"


def _key(env: dict[str, str]) -> tuple[tuple[str, str], ...]:
    return tuple(sorted(env.items()))


def _horn(sentence: UniversalSentence) -> tuple[HornClause, ...]:
    if not sentence.is_horn:
        raise NotHornError("saturation needs a Horn sentence")
    return sentence.horn_clauses()


def apply_clause(a: FinStructure, clause: HornClause) -> list[tuple[FinStructure, dict]]:
    """Every single-step application of ``clause`` to ``a`` that adds a tuple."""
    if clause.conclusion is BOTTOM:
        raise ValueError("apply_clause needs an atom conclusion; use saturate for false")
    for x in clause.premise | {clause.conclusion}:
        a.signature.check_atom(x)
    out = []
    seen = set()
    for env in sorted(iter_assignments(clause, a), key=_key):
        k = _key(env)
        if k in seen:
            continue
        seen.add(k)
        new = clause.conclusion.rename(env)
        if not a.holds(new):
            out.append((a.with_atoms([new]), env))
    return out


def saturate(
    a: FinStructure,
    sentence: UniversalSentence,
    rng: random.Random | None = None,
) -> SaturationResult:
    """Least closure of ``a`` under the clauses, or the first false derivation.

    Deterministic unless ``rng`` is given, in which case clause and
    assignment order within each round are shuffled (the fixpoint is the same).
    """
    if a.signature != sentence.signature:
        raise SignatureError("signature mismatch")
    clauses = _horn(sentence)
    rels = {k: set(v) for k, v in a.relations.items()}
    domain = a.domain
    trace: list[Firing] = []

    version = {k: 0 for k in rels}
    clock = 0
    last_seen = [-1] * len(clauses)
    goals = [i for i, c in enumerate(clauses) if c.conclusion is BOTTOM]
    rules = [i for i, c in enumerate(clauses) if c.conclusion is not BOTTOM]
    syms = [{x.symbol for x in c.premise} for c in clauses]

    def stale(i):
        if last_seen[i] < 0:
            return True
        return any(version[s] > last_seen[i] for s in syms[i])

    def matches(c: HornClause):
        extra = sorted(c.variables - atoms_variables(c.premise))
        for env in iter_matches(c.premise, rels):
            if not extra:
                yield env
                continue
            # conclusion-only variables range over the whole domain
            for values in itertools.product(domain, repeat=len(extra)):
                full = dict(env)
                full.update(zip(extra, values))
                yield full

    def result(consistent):
        return SaturationResult(consistent, FinStructure(a.signature, domain, rels), tuple(trace))

    while True:
        order = list(goals)
        if rng is not None:
            rng.shuffle(order)
        for i in order:
            if not stale(i):
                continue
            last_seen[i] = clock
            envs = sorted(matches(clauses[i]), key=_key)
            if envs:
                env = min(envs, key=_key) if rng is None else rng.choice(envs)
                trace.append(Firing(i, _key(env), None))
                return result(False)
        fired = False
        order = list(rules)
        if rng is not None:
            rng.shuffle(order)
        for i in order:
            if not stale(i):
                continue
            c = clauses[i]
            last_seen[i] = clock
            # sorted first so a seeded shuffle does not depend on set order
            envs = sorted(matches(c), key=_key)
            if rng is not None:
                rng.shuffle(envs)
            for env in envs:
                new = c.conclusion.rename(env)
                if new.args in rels[new.symbol]:
                    continue
                rels[new.symbol].add(new.args)
                clock += 1
                version[new.symbol] = clock
                trace.append(Firing(i, _key(env), new))
                fired = True
        if not fired:
            return result(True)


# ---------------------------------------------------------------------------
# traces

_ELEM = r'(?:"(?:[^"\\]|\\.)*"|[A-Za-z0-9_]+)'
_PAIR = re.compile(rf"([A-Za-z_][A-Za-z0-9_]*)=({_ELEM})")
_ATOM = re.compile(rf"([A-Za-z_][A-Za-z0-9_]*)\(({_ELEM}(?:,{_ELEM})*)\)$")
_LINE = re.compile(r"(fire|bottom) (\d+) (\S.*?)(?: add (.*))?$")


def _elem(tok: str) -> str:
    return json.loads(tok) if tok.startswith('"') else tok


def _parse_assignment(text: str) -> tuple[tuple[str, str], ...]:
    if text == "-":
        return ()
    out = []
    pos = 0
    while pos < len(text):
        m = _PAIR.match(text, pos)
        if not m:
            raise ValueError(f"bad assignment {text!r}")
        out.append((m.group(1), _elem(m.group(2))))
        pos = m.end()
        if pos < len(text):
            if text[pos] != ",":
                raise ValueError(f"bad assignment {text!r}")
            pos += 1
    return tuple(out)


def _parse_ground(text: str) -> Atom:
    m = _ATOM.match(text)
    if not m:
        raise ValueError(f"bad atom {text!r}")
    args = re.findall(_ELEM, m.group(2))
    return Atom(m.group(1), tuple(_elem(x) for x in args))


def parse_trace(text: str) -> list[Firing]:
    out = []
    for n, line in enumerate(text.replace("\r\n", "\n").splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        m = _LINE.match(line)
        if not m:
            raise ValueError(f"line {n}: cannot read trace step {line!r}")
        kind, idx, asg, added = m.groups()
        if (kind == "fire") != (added is not None):
            raise ValueError(f"line {n}: malformed {kind} step")
        out.append(Firing(int(idx), _parse_assignment(asg), _parse_ground(added) if added else None))
    return out


def replay(a: FinStructure, sentence: UniversalSentence, trace: Sequence[Firing]) -> SaturationResult:
    """Re-run a trace, checking every step; raises ValueError on a bad step."""
    clauses = _horn(sentence)
    cur = a
    for k, f in enumerate(trace):
        if not 0 <= f.clause < len(clauses):
            raise ValueError(f"step {k}: no clause {f.clause}")
        c = clauses[f.clause]
        env = f.env()
        if set(env) != set(c.variables) or any(e not in cur.domain for e in env.values()):
            raise ValueError(f"step {k}: assignment does not fit clause {f.clause}")
        if not all(cur.holds(x.rename(env)) for x in c.premise):
            raise ValueError(f"step {k}: premise of clause {f.clause} does not hold")
        if c.conclusion is BOTTOM:
            if f.added is not None or k != len(trace) - 1:
                raise ValueError(f"step {k}: false must be the last step")
            return SaturationResult(False, cur, tuple(trace))
        new = c.conclusion.rename(env)
        if f.added != new or cur.holds(new):
            raise ValueError(f"step {k}: wrong or redundant tuple")
        cur = cur.with_atoms([new])
    return SaturationResult(True, cur, tuple(trace))


# ---------------------------------------------------------------------------
# entailment


def _free_structure(sentence: UniversalSentence, atoms: Iterable[Atom], extra_vars=()):
    atoms = list(atoms)
    dom = set(extra_vars) | atoms_variables(atoms)
    if not dom:
        dom = {_POINT}
    return FinStructure.from_atoms(sentence.signature, atoms, domain=dom)


@dataclass(frozen=True)
class Entailment:
    entailed: bool
    saturation: SaturationResult

    def __bool__(self):
        return self.entailed


def entails_horn(sentence: UniversalSentence, clause: HornClause) -> Entailment:
    """Decide ``sentence |= clause`` by saturating the clause's premise."""
    for x in clause.premise | clause.positives:
        sentence.signature.check_atom(x)
    a = _free_structure(sentence, clause.premise, clause.variables)
    res = saturate(a, sentence)
    if not res.consistent:
        return Entailment(True, res)
    if clause.conclusion is BOTTOM:
        return Entailment(False, res)
    return Entailment(res.structure.holds(clause.conclusion), res)


def consistent_with(sentence: UniversalSentence, atoms: Iterable[Atom]) -> bool:
    return saturate(_free_structure(sentence, atoms), sentence).consistent


def entailed_atoms(
    sentence: UniversalSentence,
    atoms: Iterable[Atom],
    restrict_to: Iterable[str] | None = None,
) -> frozenset[Atom]:
    """Atoms over ``restrict_to`` that follow from ``atoms`` and the sentence."""
    atoms = list(atoms)
    res = saturate(_free_structure(sentence, atoms), sentence)
    if not res.consistent:
        raise InconsistentInput("the atoms are inconsistent with the sentence")
    keep = None if restrict_to is None else set(restrict_to)
    return frozenset(
        x for x in res.structure.atoms() if keep is None or set(x.args) <= keep
    )
