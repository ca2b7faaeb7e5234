import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hornlab.cfg import compile_grammar
from hornlab.chase import (
    InconsistentInput,
    apply_clause,
    consistent_with,
    entailed_atoms,
    entails_horn,
    parse_trace,
    replay,
    saturate,
)
from hornlab.convexity import enumerate_models
from hornlab.core import (
    BOTTOM,
    FinStructure,
    HornClause,
    NotHornError,
    Signature,
    UniversalSentence,
    atom,
    find_homomorphisms,
    is_homomorphism,
    satisfies,
)
from hornlab.parse import parse_theory
from hornlab.randgen import random_horn_theory, random_query, random_structure

LT = Signature({"lt": 2})


def lt_chain(*names):
    return FinStructure(LT, names, {"lt": list(zip(names, names[1:]))})


def test_apply_clause_single_result(po):
    out = apply_clause(lt_chain("x", "y", "z"), po.clauses[0])
    assert len(out) == 1
    s, env = out[0]
    assert s.holds(atom("lt", "x", "z")) and env == {"x": "x", "y": "y", "z": "z"}


def test_apply_clause_on_closed_structure(po):
    s = lt_chain("x", "y")
    assert apply_clause(s, po.clauses[0]) == []


def test_apply_clause_conclusion_only_variable():
    sig = Signature({"P": 1})
    out = apply_clause(FinStructure(sig, ["a", "b"]), HornClause([], atom("P", "x")))
    assert len(out) == 2


def test_apply_clause_rejects_bottom(po):
    with pytest.raises(ValueError):
        apply_clause(lt_chain("a"), po.clauses[1])


def test_saturate_chain_and_loop(po):
    res = saturate(lt_chain("a", "b", "c"), po)
    assert res.consistent
    assert res.structure.relations["lt"] == {("a", "b"), ("b", "c"), ("a", "c")}
    loop = FinStructure(LT, ["x"], {"lt": [("x", "x")]})
    res = saturate(loop, po)
    assert not res.consistent and res.bottom.clause == 1


def test_saturate_grammar_chain(anbn):
    phi1 = compile_grammar(anbn).phi1
    s = FinStructure.from_atoms(phi1.signature, [atom("R_a", "x1", "x2"), atom("R_b", "x2", "x3")])
    res = saturate(s, phi1)
    assert res.consistent and res.structure.holds(atom("R_S", "x1", "x3"))


def test_saturate_rejects_non_horn():
    th = parse_theory("signature { P/1; Q/1 } clause -> P(x) | Q(x);")
    with pytest.raises(NotHornError):
        saturate(FinStructure(th.signature, ["a"]), th)


def test_trace_text_round_trip(po):
    start = lt_chain("a", "b", "c", "d")
    res = saturate(start, po)
    steps = parse_trace(res.trace_text())
    assert replay(start, po, steps).structure == res.structure
    bad = list(steps)
    bad[0] = type(bad[0])(0, bad[0].assignment, atom("lt", "d", "a"))
    with pytest.raises(ValueError):
        replay(start, po, bad)


def test_entailment_examples(po, anbn):
    four = HornClause(
        [atom("lt", "x", "y"), atom("lt", "y", "z"), atom("lt", "z", "w")], atom("lt", "x", "w")
    )
    res = entails_horn(po, four)
    assert res.entailed and len(res.saturation.trace) >= 2
    phi1 = compile_grammar(anbn).phi1
    chain = [atom(f"R_{c}", f"x{i}", f"x{i + 1}") for i, c in enumerate("aabb", 1)]
    assert entails_horn(phi1, HornClause(chain, atom("R_S", "x1", "x5")))
    assert not entails_horn(phi1, HornClause([atom("R_a", "x1", "x2")], atom("R_S", "x1", "x2")))


def test_consistency_examples(po, anbn):
    assert consistent_with(po, [atom("lt", "x", "y")])
    assert not consistent_with(po, [atom("lt", "x", "x")])
    assert consistent_with(compile_grammar(anbn).phi, [atom("U", "y")])


def test_entailed_atoms_examples(po, anbn):
    chain = [atom("lt", "x", "y"), atom("lt", "y", "z")]
    assert entailed_atoms(po, chain, restrict_to={"x", "z"}) == {atom("lt", "x", "z")}
    assert entailed_atoms(po, [atom("lt", "x", "y")]) == {atom("lt", "x", "y")}
    phi2 = compile_grammar(anbn).phi2
    got = entailed_atoms(phi2, [atom("U", "y"), atom("I", "x1")])
    assert atom("Q", "y", "x1") in got
    with pytest.raises(InconsistentInput):
        entailed_atoms(po, [atom("lt", "x", "x")])


def _semantic_entails(th: UniversalSentence, c: HornClause) -> bool:
    """Oracle: no structure on a quotient of the clause variables is a countermodel."""
    vs = sorted(c.variables)
    for labels in itertools.product(range(len(vs)), repeat=len(vs)):
        env = {v: f"e{k}" for v, k in zip(vs, labels)}
        dom = sorted(set(env.values()))
        base = [a.rename(env) for a in c.premise]
        cells = [(n, t) for n, k in th.signature.items() for t in itertools.product(dom, repeat=k)]
        for bits in itertools.product((0, 1), repeat=len(cells)):
            rels = {}
            for (n, t), b in zip(cells, bits):
                if b:
                    rels.setdefault(n, set()).add(t)
            m = FinStructure(th.signature, dom, rels)
            if not all(m.holds(a) for a in base) or not satisfies(m, th):
                continue
            if c.conclusion is BOTTOM or not m.holds(c.conclusion.rename(env)):
                return False
    return True


def test_entails_horn_matches_semantic_oracle():
    rng = random.Random(7)
    checked = 0
    while checked < 60:
        sig = Signature({"P": 1, "R": 2})
        th = random_horn_theory(rng, sig)
        q = random_query(rng, sig, max_vars=3, max_atoms=3)
        if len(q.variables) > 3:
            continue
        assert bool(entails_horn(th, q)) == _semantic_entails(th, q), (th, q)
        checked += 1


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**31))
def test_saturation_properties(seed):
    rng = random.Random(seed)
    th = random_horn_theory(rng)
    a = random_structure(rng, th.signature, rng.randint(1, 3), density=0.25)
    res = saturate(a, th)
    # monotone, domain fixed
    assert res.structure.domain == a.domain
    assert all(res.structure.relations[k] >= a.relations[k] for k in a.relations)
    assert replay(a, th, res.trace).structure == res.structure
    shuffled = saturate(a, th, rng=random.Random(seed + 1))
    assert shuffled.consistent == res.consistent
    if res.consistent:
        assert satisfies(res.structure, th)
        assert saturate(res.structure, th).trace == ()
        assert shuffled.structure == res.structure


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31))
def test_least_model_property(seed):
    rng = random.Random(seed)
    th = random_horn_theory(rng)
    a = random_structure(rng, th.signature, 2, density=0.2)
    res = saturate(a, th)
    for m in itertools.islice(enumerate_models(th, 2), 12):
        for h in find_homomorphisms(a, m):
            assert res.consistent
            assert is_homomorphism(h, res.structure, m)
