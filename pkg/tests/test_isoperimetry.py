import itertools
import random
from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given, strategies as st

from folnerkit.core import ball
from folnerkit.errors import (CertificateError, DegenerateInputError, HypothesisError, StructuralError)
from folnerkit.isoperimetry import (C2_THEOREM, C_LEMMA21, GoodnessGraph, TSet, certify_tset,
                                   corollary12_bound, corollary32_sandwich, csc_goodness,
                                   extract_satisfactory, grigorchuk_bound, lamplighter_pair,
                                   lemma21_check, lemma21_constant, lemma22_edge_bound,
                                   product_volume_bound, random_good_graph, tau_three_halves,
                                   theorem11_pipeline, tset_from_words, BlockWitness, folner_pairs_check)
from folnerkit.nilpotent2 import Nil2Group, OmegaSet, commutator_word
from folnerkit.wreath import WreathGroup, make_lamp


def line():
    return WreathGroup(2, 1, ("t",))


def plane():
    return WreathGroup(2, 2, ("t1", "t2"))


def interval(N):
    return {make_lamp({}, z) for z in range(N)}


def box(L):
    return {make_lamp({}, (x, y), 2, 2) for x in range(L) for y in range(L)}


def test_constants():
    assert C_LEMMA21 == Fraction(3, 4)
    assert C2_THEOREM == Fraction(1, 4)
    with pytest.raises(DegenerateInputError):
        lemma21_constant(Fraction(5, 6), Fraction(1, 5))


def test_goodness_in_a_ball():
    G = plane()
    V = set(ball(G, 4).members)
    T = tset_from_words(G, [["t1"], ["t1^-1"], ["t2"], ["t2^-1"]])
    rep = csc_goodness(G, V, T)
    B3 = ball(G, 3).members
    assert all(rep.counts[v] == 4 for v in B3)


def test_uncertified_t_rejected():
    G = line()
    with pytest.raises(StructuralError):
        csc_goodness(G, interval(5), TSet((G.generator("t"),), 1))
    with pytest.raises(StructuralError):
        certify_tset(G, [G.evaluate(["t"] * 3)], 2)


def test_count_lemma_positive_branch():
    G = line()
    T = tset_from_words(G, [["t"], ["t^-1"]])
    rep = lemma21_check(G, interval(48), T)
    assert rep.good_fraction >= Fraction(5, 6)
    with pytest.raises(HypothesisError) as exc:
        lemma21_check(G, interval(47), T)
    assert exc.value.ratio == Fraction(2, 47)


def test_count_lemma_on_omega_with_commutators():
    # hypothesis fails (ratio 2/7); the 3/4 count conclusion fails too, yet the set is #T/4-satisfactory
    G = Nil2Group()
    om = OmegaSet(G, 6)
    seen, elems = set(), []
    for i in range(-6, 7):
        for j in range(i + 1, 13):
            w = commutator_word(i, j)
            if len(w) <= 24:
                x = G.evaluate(w)
                if x not in seen:
                    seen.add(x)
                    elems.append(x)
    T = TSet(tuple(elems), 24, True)
    assert len(T) == 52
    assert csc_goodness(G, om, T).good_fraction == 0
    with pytest.raises(HypothesisError):
        lemma21_check(G, om, T)
    cert = theorem11_pipeline(G, om, T, enforce=False)
    assert cert.size == len(om) and cert.threshold == 13


def test_removal_examples():
    cyc = GoodnessGraph.from_graph(nx.cycle_graph(10))
    cert = extract_satisfactory(cyc, 2, Fraction(1, 2))
    assert len(cert.subset) == 10 and cert.rounds == 0
    star = GoodnessGraph.from_graph(nx.star_graph(6))
    cert = extract_satisfactory(star, 2, Fraction(1, 2))
    assert extract_satisfactory(GoodnessGraph.from_graph(nx.star_graph(6).subgraph(cert.subset)), 2,
                                Fraction(1, 2)).rounds == 0
    with pytest.raises(DegenerateInputError):
        extract_satisfactory(cyc, 2, 1)


@given(st.integers(0, 10**6), st.integers(3, 6))
def test_removal_output_is_fixpoint(seed, m):
    rng = random.Random(seed)
    g = nx.gnp_random_graph(40, 0.15, seed=rng.randrange(2**32))
    graph = GoodnessGraph.from_graph(g)
    c = Fraction(1, 3)
    cert = extract_satisfactory(graph, m, c)
    assert cert.verify(graph)
    sub = GoodnessGraph.from_graph(g.subgraph(cert.subset))
    assert extract_satisfactory(sub, m, c).subset == cert.subset


@given(st.integers(1, 4), st.integers(1, 3))
def test_enlarging_t_never_shrinks_counts(r1, extra):
    G = line()
    V = interval(30)
    small = tset_from_words(G, [["t"] * j for j in range(1, r1 + 1)])
    large = tset_from_words(G, [["t"] * j for j in range(1, r1 + 1 + extra)])
    c1, c2 = csc_goodness(G, V, small).counts, csc_goodness(G, V, large).counts
    assert all(c2[v] >= c1[v] for v in V)


def random_instance(rng):
    m = rng.randint(2, 8)
    p = Fraction(rng.randint(67, 99), 100)
    n = rng.randint(3 * m + 10, 120)
    g = random_good_graph(rng, n, m, p, rng.choice(["regular", "dense", "mixed"]))
    cmax = min((3 * p - 2) / p, Fraction(1, 2))
    c = cmax * Fraction(rng.randint(1, 99), 100)
    return g, m, p, c


def test_removal_harness_sample():
    rng = random.Random(0)
    for _ in range(60):
        g, m, p, c = random_instance(rng)
        graph = GoodnessGraph.from_graph(g)
        assert sum(1 for v in g if g.degree(v) >= m) >= p * g.number_of_nodes()
        cert = extract_satisfactory(graph, m, c)
        assert cert.subset and cert.verify(graph)
        assert cert.removed_edges <= lemma22_edge_bound(cert)


def layered_counterexample():
    """Good layers 125 -> 75 -> 45 -> 27 (5 edges in, 3 out) fed by 625 bad leaves, draining into K9 cliques."""
    g = nx.Graph()
    layers = [[("L", i, j) for j in range(s)] for i, s in enumerate((125, 75, 45, 27))]
    for j, v in enumerate(layers[0]):
        for k in range(5):
            g.add_edge(("leaf", j, k), v)
    for i in range(3):
        up, down = layers[i], layers[i + 1]
        for j, v in enumerate(up):
            for k in range(3):
                g.add_edge(v, down[(3 * j + k) % len(down)])
    core = []
    for q in range(260):
        clique = [("K", q, a) for a in range(9)]
        g.add_edges_from(itertools.combinations(clique, 2))
        core += clique
    for j, v in enumerate(layers[3]):
        for k in range(3):
            g.add_edge(v, core[3 * j + k])
    return g


def test_edge_accounting_bound_can_fail():
    # the removed-edge count can exceed C1 / (1 - c) while the conclusion itself holds;
    # the bound that does follow from the orientation argument is (1 - c) / (1 - 2c) C1
    g = layered_counterexample()
    m, c = 8, Fraction(49, 100)
    n = g.number_of_nodes()
    good = sum(1 for v in g if g.degree(v) >= m)
    p = Fraction(good, n)
    assert n == 3237 and p > Fraction(2, 3) and c < min((3 * p - 2) / p, Fraction(1, 2))
    graph = GoodnessGraph.from_graph(g)
    cert = extract_satisfactory(graph, m, c)
    assert len(cert.subset) == 2340 and cert.verify(graph)
    assert cert.bad_edges == 625 and cert.removed_edges == 1441
    assert cert.removed_edges > lemma22_edge_bound(cert)
    assert cert.removed_edges <= (1 - c) / (1 - 2 * c) * cert.bad_edges


def test_pipeline_on_interval_and_box():
    G = line()
    T = tset_from_words(G, [["t"], ["t^-1"]])
    cert = theorem11_pipeline(G, interval(48), T)
    assert cert and cert.threshold >= 1
    assert cert.verify(GoodnessGraph.from_group(G, interval(48), T))
    P = plane()
    T2 = tset_from_words(P, [["t1"], ["t1^-1"], ["t2"], ["t2^-1"]])
    cert = theorem11_pipeline(P, box(100), T2)
    assert cert.size > 0 and cert.threshold == 1
    assert '"threshold": 1' in cert.to_json()


def test_pipeline_rejects_omega_with_exact_ratio():
    G = Nil2Group()
    T = tset_from_words(G, [["z"], ["z^-1"]])
    with pytest.raises(HypothesisError) as exc:
        theorem11_pipeline(G, OmegaSet(G, 5), T)
    assert exc.value.ratio == Fraction(1, 3) and exc.value.required == Fraction(1, 24)
    assert theorem11_pipeline(G, OmegaSet(G, 5), T, enforce=False).size == len(OmegaSet(G, 5))


def cube_blocks():
    G = Nil2Group()
    gens = [G.central(0, j) for j in (1, 2, 3)]
    elems = [G.identity]
    for g in gens:
        elems = elems + [G._multiply(x, g) for x in elems]
    return G, gens, elems


def test_product_bound_tight_on_cube():
    G, gens, elems = cube_blocks()
    assert product_volume_bound(G, set(elems), [[g] for g in gens], 1) == 8
    with pytest.raises(StructuralError):
        product_volume_bound(G, set(elems), [[G.b(0)], [G.b(1)]], 1)


def test_product_bound_on_z3_squared():
    G = WreathGroup(3, 1, ("t", "b"))
    d0, d1 = G.lamp(0), G.lamp(1)
    blocks = [[d0, G._multiply(d0, d0)], [d1, G._multiply(d1, d1)]]
    V = {make_lamp({0: a, 1: b}, 0, 3) for a in range(3) for b in range(3)}
    assert product_volume_bound(G, V, blocks, 2) == 9


def test_block_volume_reports():
    G = Nil2Group()
    rep = corollary12_bound(G, [], 10, 1)
    assert rep.N == 0 and rep.exponent == 0 and rep.log2_at_least(0)
    blocks = []
    for i in range(0, 3):
        for j in range(i + 1, 4):
            w = commutator_word(i, j)
            blocks.append([BlockWitness(G.evaluate(w), len(w), tuple(w))])
    rep = corollary12_bound(G, blocks, 30, 1)
    assert rep.N == 6 and rep.exponent == Fraction(6, 7) and rep.k_prime == 1
    with pytest.raises(StructuralError):
        corollary12_bound(G, [[G.b(0)]], 3, 1)


def test_grigorchuk_reports_small_levels():
    for k in range(4):
        rep = grigorchuk_bound(k)
        assert rep.N == 2 ** k and rep.n == 6 * 2 ** k and rep.exponent == Fraction(2 ** k, 7)


def test_lamplighter_pairs():
    G = WreathGroup(2, 1, ("t", "b"))
    Fp, F = lamplighter_pair(4)
    rep = folner_pairs_check(G, Fp, F, 2, 14, controlled=True)
    assert rep.ok and rep.ratio == Fraction(9, 5)
    assert folner_pairs_check(G, Fp, F, 2, 1).first_violation == "(1) size"
    assert folner_pairs_check(G, Fp, F, 2, 5, controlled=True).first_violation == "(3') controlled"
    single = {G.identity}
    assert folner_pairs_check(G, single, single, 1, 1).ok
    assert folner_pairs_check(G, single, single, 2, 1).first_violation == "(2) depth"
    with pytest.raises(StructuralError):
        folner_pairs_check(G, {G.lamp(9)}, F, 1, 2)


def test_tau_three_halves_exact():
    assert [tau_three_halves(n) for n in range(6)] == [0, 1, 2, 5, 8, 11]
    assert tau_three_halves(Fraction(1, 4)) == 0
    assert tau_three_halves(Fraction(9, 4)) == 3


def test_sandwich_small():
    rows = corollary32_sandwich(16)
    assert all(r.upper_ok and r.upper_literal_ok and r.lower_ok for r in rows)


def test_exhaustive_product_check():
    from folnerkit.isoperimetry import exhaust_product_bound
    G = WreathGroup(2, 1, ("t", "b"))
    d0 = G.lamp(0)
    elems = [G.identity, d0]
    rep = exhaust_product_bound(G, elems, [[d0]], [1])
    assert rep.subsets == 3 and not rep.counterexamples and rep.tight == 1
    # a repeated block is not a direct factor: {e, d0} then has m = 2 but only 2 elements
    rep = exhaust_product_bound(G, elems, [[d0], [d0]], [1])
    assert rep.counterexamples == ((3, 1, 2),)
    with pytest.raises(StructuralError):
        exhaust_product_bound(G, [G.identity], [[d0]], [1])
