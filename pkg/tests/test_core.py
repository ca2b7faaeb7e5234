import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hornlab.core import (
    BOTTOM,
    Atom,
    FinStructure,
    GeneralClause,
    HornClause,
    Signature,
    SignatureError,
    UniversalSentence,
    atom,
    canonical_form,
    canonical_structure,
    disjoint_union,
    find_homomorphisms,
    is_embedding,
    iter_assignments,
    pair_name,
    product,
    relabel,
    satisfies,
    satisfies_clause,
    substructure,
    violations,
)
from hornlab.convexity import enumerate_models
from hornlab.randgen import random_horn_theory, random_structure, random_universal_sentence

LT = Signature({"lt": 2})
seeds = st.integers(0, 2**31)


def chain(*names):
    return FinStructure(LT, names, {"lt": list(zip(names, names[1:]))})


def test_signature_rejects_equality_and_bad_arity():
    with pytest.raises(SignatureError):
        Signature({"=": 2})
    with pytest.raises(SignatureError):
        Signature({"P": 0})
    with pytest.raises(SignatureError):
        Signature({"P": 1}).check_atom(atom("P", "x", "y"))


def test_structure_rejects_foreign_elements():
    with pytest.raises(ValueError):
        FinStructure(LT, ["a"], {"lt": [("a", "b")]})


def test_point_satisfies_unconditional_fact():
    sig = Signature({"P": 1})
    a = FinStructure(sig, ["a"], {"P": [("a",)]})
    assert satisfies_clause(a, HornClause([], atom("P", "x")))


def test_chain_and_two_cycle_against_transitivity(po):
    trans = po.clauses[0]
    assert satisfies_clause(chain("a", "b"), trans)
    cyc = FinStructure(LT, ["a", "b"], {"lt": [("a", "b"), ("b", "a")]})
    assert not satisfies_clause(cyc, trans)
    # oracle: enumerate the 8 assignments directly
    bad = [
        env
        for env in (dict(zip("xyz", t)) for t in itertools.product("ab", repeat=3))
        if cyc.holds(atom("lt", env["x"], env["y"]))
        and cyc.holds(atom("lt", env["y"], env["z"]))
        and not cyc.holds(atom("lt", env["x"], env["z"]))
    ]
    assert {"x": "a", "y": "b", "z": "a"} in bad


def test_satisfies_empty_structure_and_loop(po):
    assert satisfies(FinStructure(LT, []), po)
    loop = FinStructure(LT, ["a"], {"lt": [("a", "a")]})
    assert not satisfies(loop, po)


def test_satisfies_signature_mismatch(po):
    with pytest.raises(SignatureError):
        satisfies(FinStructure(Signature({"P": 1}), ["a"]), po)


def test_iter_assignments_covers_conclusion_only_variables():
    c = HornClause([atom("lt", "x", "y")], atom("lt", "y", "z"))
    got = list(iter_assignments(c, chain("a", "b")))
    assert [g["z"] for g in got] == ["a", "b"]
    assert all(g["x"] == "a" and g["y"] == "b" for g in got)


def test_product_of_points():
    sig = Signature({"P": 1})
    a = FinStructure(sig, ["a"], {"P": [("a",)]})
    b = FinStructure(sig, ["b"], {"P": [("b",)]})
    p = product(a, b)
    assert p.domain == (pair_name("a", "b"),)
    assert p.relations["P"] == {(pair_name("a", "b"),)}


def test_product_of_two_chains_has_one_pair():
    p = product(chain("a", "b"), chain("c", "d"))
    assert p.size() == 4
    assert p.relations["lt"] == {(pair_name("a", "c"), pair_name("b", "d"))}


def test_disjoint_union_tags_and_embeds(po):
    sig = Signature({"P": 1})
    a = FinStructure(sig, ["a"], {"P": [("a",)]})
    d, e1, e2 = disjoint_union(a, a)
    assert d.size() == 2 and len(d.relations["P"]) == 2
    assert e1 == {"a": "a#1"} and e2 == {"a": "a#2"}
    u, _, _ = disjoint_union(chain("a", "b"), FinStructure(LT, ["c"]))
    assert u.size() == 3 and len(u.relations["lt"]) == 1
    assert satisfies(disjoint_union(chain("a", "b", "c").with_atoms([atom("lt", "a", "c")]), chain("p", "q"))[0], po)


def test_homomorphism_counts():
    point = FinStructure(LT, ["p"])
    assert len(find_homomorphisms(point, chain("a", "b", "c"))) == 3
    tri = chain("x", "y", "z").with_atoms([atom("lt", "x", "z")])
    assert len(find_homomorphisms(chain("a", "b"), tri, mode="embedding")) == 3
    loop = FinStructure(Signature({"E": 2}), ["a"], {"E": [("a", "a")]})
    edge = FinStructure(Signature({"E": 2}), ["u", "v"], {"E": [("u", "v")]})
    assert find_homomorphisms(loop, edge) == []


def test_homomorphism_limit():
    point = FinStructure(LT, ["p"])
    assert len(find_homomorphisms(point, chain("a", "b", "c"), limit=2)) == 2


def test_substructure_cases():
    c3 = chain("a", "b", "c").with_atoms([atom("lt", "a", "c")])
    assert substructure(c3, c3.domain) == c3
    assert substructure(c3, []).size() == 0
    ends = substructure(c3, ["a", "c"])
    assert ends.relations["lt"] == {("a", "c")}
    with pytest.raises(ValueError):
        substructure(c3, ["zz"])


def test_canonical_structure():
    sig = Signature({"R": 2})
    s, ident = canonical_structure([atom("R", "x", "y")], sig)
    assert s.size() == 2 and ident == {"x": "x", "y": "y"}
    s, _ = canonical_structure([atom("R", "x", "x")], sig)
    assert s.size() == 1 and s.relations["R"] == {("x", "x")}


def test_canonical_form_is_isomorphism_invariant():
    a = chain("a", "b", "c")
    b = chain("q", "p", "r")
    assert canonical_form(a) == canonical_form(b)
    assert canonical_form(a) != canonical_form(chain("a", "b").with_atoms([]))
    assert relabel(b).domain == ("e0", "e1", "e2")


def test_general_clause_with_one_positive_is_horn():
    c = GeneralClause([atom("lt", "x", "y")], [atom("lt", "y", "x")])
    assert c.is_horn


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_product_pairs_satisfy_atoms_componentwise(seed):
    rng = random.Random(seed)
    sig = Signature({"P": 1, "R": 2})
    a = random_structure(rng, sig, rng.randint(1, 3))
    b = random_structure(rng, sig, rng.randint(1, 3))
    p = product(a, b)
    for name, k in sig.items():
        for s in itertools.product(a.domain, repeat=k):
            for t in itertools.product(b.domain, repeat=k):
                pair = tuple(pair_name(x, y) for x, y in zip(s, t))
                assert p.holds(Atom(name, pair)) == (a.holds(Atom(name, s)) and b.holds(Atom(name, t)))


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_horn_models_closed_under_products(seed):
    rng = random.Random(seed)
    th = random_horn_theory(rng)
    models = list(enumerate_models(th, 2))
    for a, b in itertools.islice(itertools.product(models, models), 40):
        assert satisfies(product(a, b), th)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_disjoint_union_embeddings_verify(seed):
    rng = random.Random(seed)
    sig = Signature({"P": 1, "R": 2})
    a = random_structure(rng, sig, rng.randint(0, 3))
    b = random_structure(rng, sig, rng.randint(0, 3))
    d, e1, e2 = disjoint_union(a, b)
    assert is_embedding(e1, a, d) and is_embedding(e2, b, d)
    assert e1 in find_homomorphisms(a, d, mode="embedding")


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_substructures_of_models_are_models(seed):
    rng = random.Random(seed)
    th = random_universal_sentence(rng)
    for m in itertools.islice(enumerate_models(th, 3), 10):
        for r in range(m.size() + 1):
            for sub in itertools.combinations(m.domain, r):
                assert satisfies(substructure(m, sub), th)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_canonical_structure_has_exactly_the_atoms(seed):
    rng = random.Random(seed)
    sig = Signature({"P": 1, "R": 2})
    atoms = {Atom("R", (rng.choice("xyz"), rng.choice("xyz"))) for _ in range(rng.randint(1, 4))}
    s, ident = canonical_structure(atoms, sig)
    assert set(s.atoms()) == {a.rename(ident) for a in atoms}


def test_bottom_is_singleton():
    assert HornClause([atom("lt", "x", "x")], BOTTOM).is_goal
    assert UniversalSentence(LT, []).is_horn


@settings(max_examples=150, deadline=None)
@given(seeds)
def test_violations_match_all_assignments(seed):
    rng = random.Random(seed)
    th = random_universal_sentence(rng, max_clauses=2, max_vars=4, max_negatives=2, max_positives=4)
    s = random_structure(rng, th.signature, rng.randint(0, 3), rng.random())
    for c in th.clauses:
        vs = sorted(c.variables)
        expected = set()
        for values in itertools.product(s.domain, repeat=len(vs)):
            env = dict(zip(vs, values))
            if all(s.holds(a.rename(env)) for a in c.negatives) and not any(
                s.holds(a.rename(env)) for a in c.positives
            ):
                expected.add(values)
        got = [tuple(env[v] for v in vs) for env in violations(s, c)]
        assert len(got) == len(set(got))
        assert set(got) == expected
