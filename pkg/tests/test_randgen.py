import random

from hornlab.jep import is_connected_clause
from hornlab.randgen import (
    random_connected_theory,
    random_horn_theory,
    random_jep_theory,
    random_query,
)


def test_generators_are_seeded():
    a = [random_horn_theory(random.Random(5)) for _ in range(2)]
    assert a[0] == a[1]


def test_horn_family_limits():
    rng = random.Random(1)
    for _ in range(200):
        th = random_horn_theory(rng)
        assert th.is_horn and len(th.signature) <= 3 and len(th.clauses) <= 3
        assert all(k <= 2 for _, k in th.signature.items())
        assert len(random_query(rng, th.signature).variables) <= 4


def test_connected_family():
    rng = random.Random(2)
    for _ in range(50):
        assert all(is_connected_clause(c) for c in random_connected_theory(rng).clauses)


def test_jep_family_uses_three_variables():
    rng = random.Random(3)
    for _ in range(100):
        th = random_jep_theory(rng)
        assert all(len(c.variables) <= 3 for c in th.clauses)
