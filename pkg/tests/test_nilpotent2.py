import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from folnerkit.core import inner_boundary
from folnerkit.errors import ResourceError, StructuralError
from folnerkit.isoperimetry import tau_three_halves
from folnerkit.nilpotent2 import (BasicCommutator, DSpec, KSeq, Nil2Element, Nil2Group, OmegaSet,
                                  all_bracketings, commutator_key, commutator_rank, commutator_word,
                                  enumerate_basic_commutators, is_basic, omega_boundary_ratio,
                                  omega_cardinality, omega_set, prescribe_from_tau, rho_D, tau_Dk,
                                  witt_count)
from folnerkit.wreath import WreathGroup, make_lamp

D_FAMILY = [DSpec.empty(), DSpec.finite([2, 6, 7]), DSpec.all(), DSpec.evens()]
LETTERS = ["b", "z", "z^-1"]


def groups():
    return [Nil2Group(),
            Nil2Group(DSpec.finite([2, 6, 7])),
            Nil2Group(DSpec.evens()),
            Nil2Group(DSpec.finite([3]), KSeq({1: 2, 2: 3}, None), "Dk"),
            Nil2Group(DSpec.empty(), KSeq.constant(1), "Dk")]


def word_oracle(word):
    """Normal form in G_{Z,Nil,2} by counting out-of-order letter pairs (no collection)."""
    z, letters = 0, []
    for a in word:
        if a == "b":
            letters.append(z)
        else:
            z += 1 if a == "z" else -1
    linear = tuple(sorted(i for i in set(letters) if letters.count(i) % 2))
    quad = set()
    for p, q in itertools.combinations(range(len(letters)), 2):
        if letters[p] > letters[q]:
            quad ^= {(letters[q], letters[p])}
    return Nil2Element(linear, tuple(sorted(quad)), z)


def rand_word(rng, n):
    return [rng.choice(LETTERS) for _ in range(rng.randint(0, n))]


def test_collection_examples():
    G = Nil2Group()
    x = G._multiply(G.b(1), G.b(0))
    assert x.linear == (0, 1) and x.quad == ((0, 1),)
    assert G._multiply(G.b(0), G.b(0)) == G.identity
    assert G.format_element(x) == "lin{0,1}|quad{(0,1)}|0"
    assert G.parse_element(G.format_element(x)) == x


def test_evaluation_matches_word_oracle():
    G = Nil2Group()
    rng = random.Random(1)
    for _ in range(2000):
        w = rand_word(rng, 14)
        assert G.evaluate(w) == word_oracle(w)


def test_associativity_ten_thousand_triples_each_variant():
    rng = random.Random(7)
    for G in groups():
        for _ in range(10_000 // len(groups()) * 2):
            x, y, z = (G.evaluate(rand_word(rng, 6)) for _ in range(3))
            assert G._multiply(G._multiply(x, y), z) == G._multiply(x, G._multiply(y, z))
            assert G.contains(G._multiply(x, y))


def test_inverse_and_central():
    rng = random.Random(3)
    for G in groups():
        for _ in range(300):
            x = G.evaluate(rand_word(rng, 10))
            assert G._multiply(x, G.inverse(x)) == G.identity
            c = G.central(rng.randint(-3, 3), rng.randint(4, 9))
            # central in the nilpotent part; the shift z moves it
            n = G._multiply(x, G.evaluate(["z^-1"] * x.z if x.z > 0 else ["z"] * -x.z))
            assert n.z == 0 and G.commute(c, n)
            if G.variant == "nil2" and c != G.identity:
                assert not G.commute(c, G.evaluate(["z"]))


def test_quotient_maps_are_homomorphisms():
    rng = random.Random(11)
    free = Nil2Group()
    for G in groups()[1:]:
        for _ in range(300):
            u, v = rand_word(rng, 8), rand_word(rng, 8)
            assert G.evaluate(u + v) == G._multiply(G.evaluate(u), G.evaluate(v))
            # reducing the free product equals the product of reductions
            assert G.evaluate(u + v) == G.check(G.evaluate(u + v))
        assert G.evaluate([]) == free.evaluate([])


def test_projection_to_lamplighter():
    L = WreathGroup(2, 1, ("t", "b"))
    G = Nil2Group()
    rng = random.Random(5)
    for _ in range(500):
        w = rand_word(rng, 12)
        x = G.evaluate(w)
        y = L.evaluate([{"b": "b", "z": "t", "z^-1": "t^-1"}[a] for a in w])
        assert y == make_lamp({i: 1 for i in x.linear}, x.z)


def test_hall_case_translation_invariance():
    G = Nil2Group(DSpec.empty(), KSeq.constant(1), "Dk")
    for i in range(-3, 3):
        for j in range(i + 1, i + 5):
            assert G.evaluate(commutator_word(i, j)) == G.evaluate(commutator_word(i + 1, j + 1))


def test_killed_differences_vanish():
    G = Nil2Group(DSpec.finite([2, 6, 7]))
    assert G.evaluate(commutator_word(0, 2)) == G.identity
    assert G.evaluate(commutator_word(0, 3)) != G.identity
    with pytest.raises(StructuralError):
        G.check(Nil2Element((), ((0, 2),), 0))


def test_omega_small_exhaustive():
    G = Nil2Group()
    assert len(omega_set(G, 2)) == 192 == omega_cardinality(G, 2)
    with pytest.raises(ResourceError):
        omega_set(G, 6, budget=1000)


@pytest.mark.parametrize("D", D_FAMILY, ids=["empty", "267", "all", "evens"])
def test_omega_boundary_ratio_brute_force(D):
    G = Nil2Group(D)
    for n in (1, 2, 3):
        V = omega_set(G, n)
        assert len(V) == omega_cardinality(G, n)
        rep = inner_boundary(G, V)
        assert rep.ratio == Fraction(2, n + 1) == omega_boundary_ratio(G, n)


@pytest.mark.parametrize("D", D_FAMILY, ids=["empty", "267", "all", "evens"])
def test_omega_ratio_and_rank(D):
    G = Nil2Group(D)
    for n in range(1, 13):
        assert omega_boundary_ratio(G, n) == Fraction(2, n + 1)
        assert omega_cardinality(G, n) == (n + 1) * 2 ** (n + 1 + commutator_rank(G, n))


def test_omega_set_view():
    G = Nil2Group(DSpec.finite([2]))
    om = OmegaSet(G, 3)
    assert len(om) == omega_cardinality(G, 3)
    assert set(om) == om.materialize() == omega_set(G, 3)
    assert all(x in om for x in omega_set(G, 3))
    assert G.b(4) not in om


def test_rho_examples():
    assert rho_D(Nil2Group(), 9) == 9
    assert rho_D(Nil2Group(DSpec.all()), 9) == 0
    assert rho_D(Nil2Group(DSpec.finite([2, 6, 7])), 7) == 4


def test_dspec_json_and_errors():
    for D in D_FAMILY:
        assert DSpec.from_json(D.to_json()) == D
    assert 200 in DSpec.evens() and 201 not in DSpec.evens() and 300 not in DSpec.evens()
    with pytest.raises(StructuralError):
        Nil2Group.from_params({"D": {"members": ["x"]}})
    with pytest.raises(StructuralError):
        Nil2Group(DSpec.finite([2]), variant="nil2")
    with pytest.raises(StructuralError):
        KSeq({1: 0})


def test_tau_prescription_sandwich():
    D, k = prescribe_from_tau(lambda m: tau_three_halves(m), 300)
    G = Nil2Group(D, k, "Dk")
    assert len(D.members) == 0
    for n in range(1, 65):
        assert tau_three_halves(Fraction(n, 2)) <= tau_Dk(G, n) <= tau_three_halves(n)


# -- basic commutators ------------------------------------------------------

def test_basic_commutator_examples():
    assert [str(c) for c in enumerate_basic_commutators(range(2), 1)] == ["b0", "b1"]
    weight2 = [c for c in enumerate_basic_commutators(range(2), 2) if c.weight == 2]
    assert [c.structure for c in weight2] == [(1, 0)]


@pytest.mark.parametrize("q,w", [(q, w) for q in range(1, 5) for w in range(1, 5)])
def test_basic_commutators_against_brute_force(q, w):
    enum = [c.structure for c in enumerate_basic_commutators(range(q), w) if c.weight == w]
    brute = sorted((t for t in all_bracketings(range(q), w) if is_basic(t)), key=commutator_key)
    assert enum == brute
    assert len(enum) == witt_count(q, w)


def test_basic_order_is_weight_major_then_lex():
    cs = enumerate_basic_commutators(range(-1, 2), 4)
    assert cs == sorted(cs)
    assert all(a.weight <= b.weight for a, b in zip(cs, cs[1:]))
    assert all(isinstance(c, BasicCommutator) and is_basic(c.structure) for c in cs)


@pytest.mark.parametrize("c", [1, 2, 3, 4])
def test_basic_commutator_growth_slope(c):
    # E_c(n): weight-c basic commutators on b_{-n}, ..., b_n; slope against the letter count 2n + 1
    ns = np.arange(4, 13)
    counts = []
    for n in ns:
        cs = enumerate_basic_commutators(range(-n, n + 1), c)
        counts.append(sum(1 for x in cs if x.weight == c))
        assert counts[-1] == witt_count(2 * n + 1, c)
    slope = np.polyfit(np.log(2 * ns + 1), np.log(counts), 1)[0]
    assert abs(slope - c) <= 0.15


def test_basic_budget():
    with pytest.raises(ResourceError):
        enumerate_basic_commutators(range(30), 6)


@given(st.integers(1, 6), st.integers(1, 6))
def test_witt_small_cases(q, w):
    assert witt_count(q, 1) == q
    assert witt_count(q, 2) == q * (q - 1) // 2
    assert witt_count(q, w) >= 0
