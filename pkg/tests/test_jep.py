import itertools
import random

from hypothesis import given, settings
from hypothesis import strategies as st

from hornlab.cfg import compile_grammar
from hornlab.chase import saturate
from hornlab.convexity import enumerate_models
from hornlab.core import BOTTOM, FinStructure, HornClause, atom, canonical_structure, disjoint_union, find_homomorphisms
from hornlab.jep import (
    JepWitness,
    _CrossCheck,
    all_connected,
    dominates,
    find_joint,
    format_witness,
    is_connected_clause,
    jep_bruteforce,
    jep_refute,
    joint_embed,
    parse_witness,
    verify_witness,
    witness_problems,
)
from hornlab.parse import parse_theory
from hornlab.randgen import random_jep_theory

STRICT_ORDER_PATH = (
    "signature {P/1; R/2} clause R(x,y), R(y,z) -> R(x,z); clause R(x,x) -> false;"
    " clause R(x,y), R(y,z), R(z,w), P(u) -> false;"
)


def test_connectedness(po, anbn):
    assert is_connected_clause(po.clauses[0])
    c = compile_grammar(anbn)
    clause3 = HornClause([atom("U", "y"), atom("I", "x1")], atom("Q", "y", "x1"))
    assert clause3 in c.phi2.clauses
    assert not is_connected_clause(clause3)
    assert not is_connected_clause(HornClause([], atom("R", "x", "y")))
    assert is_connected_clause(HornClause([], atom("P", "x")))
    assert all_connected(po) and all_connected(c.phi1) and not all_connected(c.phi)


def test_dominates(po, anbn):
    phi = [atom("lt", "x", "y")]
    assert dominates(po, phi, phi)
    assert dominates(po, [atom("lt", "x", "z"), atom("lt", "z", "y")], phi)
    sent = compile_grammar(anbn).phi
    u = [atom("U", "y")]
    extra = [atom("I", "x1"), atom("R_a", "x1", "x2"), atom("T", "x2")]
    assert not dominates(sent, u + extra, u)


def test_refute_partial_orders(po):
    assert not jep_refute(po).found


def test_refute_grammar_finds_valid_witness(anbn):
    sent = compile_grammar(anbn).phi
    r = jep_refute(sent)
    assert r.found and verify_witness(sent, r.witness)
    # the shape used in the undecidability argument is also a witness
    w = JepWitness([atom("U", "y")], [atom("I", "x1"), atom("R_a", "x1", "x2"), atom("T", "x2")], BOTTOM)
    assert verify_witness(sent, w)


def test_refute_two_unary_denial():
    th = parse_theory("signature {P/1; Q/1} clause P(x), Q(y) -> false;")
    r = jep_refute(th)
    assert r.found and r.witness.size == 2


def test_side_variable_bound_limits_witnesses():
    th = parse_theory(STRICT_ORDER_PATH)
    # a 3-edge path needs 4 variables on one side
    assert not jep_refute(th, max_atoms=6, max_vars=5, side_vars=3).found
    r = jep_refute(th, max_atoms=6, max_vars=5)
    assert r.found and verify_witness(th, r.witness)


def test_witness_problems_reported(po):
    w = JepWitness([atom("lt", "x", "y")], [atom("lt", "x", "z")], BOTTOM)
    probs = witness_problems(po, w)
    assert any("share" in p for p in probs)


def test_witness_text_round_trip(anbn):
    sent = compile_grammar(anbn).phi
    w = jep_refute(sent).witness
    text = format_witness(sent, w)
    assert "trace joint inconsistent" in text
    assert parse_witness(text, sent.signature) == w


def test_joint_embed_partial_orders(po):
    b1 = FinStructure(po.signature, "ab", {"lt": [("a", "b")]})
    b2 = FinStructure(po.signature, "cde", {"lt": [("c", "d"), ("d", "e"), ("c", "e")]})
    j = joint_embed(po, b1, b2)
    assert j.joined
    assert j.c == disjoint_union(b1, b2)[0]
    assert j.e1 in find_homomorphisms(b1, j.c, mode="embedding")
    empty = FinStructure(po.signature, [])
    j = joint_embed(po, b1, empty)
    assert j.joined and j.c.size() == 2


def test_joint_embed_refuses_grammar_pair(anbn):
    sent = compile_grammar(anbn).phi
    b1, _ = canonical_structure([atom("U", "y")], sent.signature)
    b2, _ = canonical_structure([atom("I", "x1"), atom("R_a", "x1", "x2"), atom("T", "x2")], sent.signature)
    r = joint_embed(sent, b1, b2)
    assert not r.joined and r.witness.chi is BOTTOM
    assert verify_witness(sent, r.witness)


def test_bruteforce_examples(po, anbn):
    assert jep_bruteforce(po, 2).holds
    th = parse_theory("signature {P/1; Q/1} clause P(x), Q(y) -> false;")
    f = jep_bruteforce(th, 2)
    assert not f.holds
    assert {f.b1.size(), f.b2.size()} == {1}
    assert {(len(m.relations["P"]), len(m.relations["Q"])) for m in (f.b1, f.b2)} == {(1, 0), (0, 1)}
    # size 1 already separates a U-point from a one-point "a" chain
    assert not jep_bruteforce(compile_grammar(anbn).phi, 1).holds


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31))
def test_cross_saturation_matches_chase(seed):
    rng = random.Random(seed)
    th = random_jep_theory(rng)
    cc = _CrossCheck.for_theory(th.horn_clauses())
    models = list(enumerate_models(th, 2))
    for b1, b2 in itertools.islice(itertools.product(models, models), 60):
        d, _, _ = disjoint_union(b1, b2)
        res = saturate(d, th)
        clean = res.consistent and all(
            res.structure.relations[k] == d.relations[k] or not _pure_added(d, res.structure, k) for k in d.relations
        )
        assert cc.joins(cc.tables(b1, 1), cc.tables(b2, 2)) == clean
        assert (find_joint(th, b1, b2) is not None) == clean


def _pure_added(d, sat, k):
    side = lambda t: {e.rsplit("#", 1)[1] for e in t}
    return any(len(side(t)) == 1 for t in sat.relations[k] - d.relations[k])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31))
def test_refute_agrees_with_bruteforce_small(seed):
    th = random_jep_theory(random.Random(seed))
    # matched bounds: a two-element model has at most 6 facts over {P/1, R/2}
    r = jep_refute(th, max_atoms=6, max_vars=4, side_vars=2)
    b = jep_bruteforce(th, 2)
    assert r.found == (not b.holds)
    if r.found:
        assert verify_witness(th, r.witness)
