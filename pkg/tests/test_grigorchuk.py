import random

import pytest
from hypothesis import given, strategies as st

from folnerkit.core import ball
from folnerkit.errors import StructuralError, UnsupportedError
from folnerkit.grigorchuk import (GrigorchukGroup, GrigWord, OmegaSeq, act, act_by_sections, commute,
                                  equal, inverse_word, is_trivial, reduce_letters, rho, rist_witness,
                                  schreier_graph, sections, sigma, sigma_power, support_check_by_action,
                                  verify_rist, word_permutation, write_schreier_csv, write_schreier_dot)

OM = "|012"


def oracle_act(letter, v):
    """First Grigorchuk group: a swaps the root, b = (a, c), c = (a, d), d = (1, b)."""
    if not v:
        return v
    if letter == "a":
        return ("1" if v[0] == "0" else "0") + v[1:]
    left, right = {"b": ("a", "c"), "c": ("a", "d"), "d": (None, "b")}[letter]
    sub = left if v[0] == "0" else right
    return v[0] + (oracle_act(sub, v[1:]) if sub else v[1:])


def oracle_word(w, v):
    for ch in w:  # right action: leftmost letter acts first
        v = oracle_act(ch, v)
    return v


words = st.text(alphabet="abcd", max_size=12)


def test_section_examples():
    assert sections(GrigWord("d", 0), OM)[0].letters == ""
    w0, w1, sw = sections(GrigWord("d", 0), OM)
    assert not sw and w1.letters == "b"
    w0, w1, sw = sections(GrigWord("a", 0), OM)
    assert sw and w0.letters == "" and w1.letters == ""


@given(words)
def test_action_matches_independent_oracle(w):
    for bits in range(64):
        v = format(bits, "06b")
        assert act(GrigWord(w, 0), v, OM) == oracle_word(w, v)
        assert act_by_sections(GrigWord(w, 0), v, OM) == oracle_word(w, v)


def test_action_sections_consistency_random():
    rng = random.Random(2)
    for _ in range(200):
        w = GrigWord("".join(rng.choice("abcd") for _ in range(rng.randint(0, 12))), 0)
        perm = word_permutation(w, 6, OM)
        for i in range(64):
            v = format(i, "06b")
            assert format(int(perm[i]), "06b") == act_by_sections(w, v, OM)


def test_triviality_examples():
    assert is_trivial(GrigWord("", 0), OM)
    assert is_trivial(GrigWord("ad" * 4, 0), OM)
    assert not is_trivial(GrigWord("ad" * 2, 0), OM)
    assert is_trivial(GrigWord("bcd", 0), OM)
    for k in range(7):
        w0, w1, sw = sections(sigma_power("abab", k + 1), OM)
        assert not sw and is_trivial(w0, OM)
        assert is_trivial(GrigWord(w0.letters + w0.letters, w0.offset), OM)


@given(words)
def test_inverse_cancels(w):
    g = GrigWord(w, 0)
    assert is_trivial(GrigWord(w + inverse_word(g).letters, 0), OM)


def test_reduction_and_sigma():
    assert reduce_letters("abba") == ""
    assert reduce_letters("bc") == "d"
    assert sigma("abab").letters == "acadacad"
    assert sigma("").letters == ""
    for k in range(11):
        assert len(sigma_power("abab", k).letters) == 4 * 2 ** k


def test_growth_layers():
    # known growth series of the first Grigorchuk group
    G = GrigorchukGroup(OM)
    assert ball(G, 8).layer_sizes == (1, 4, 6, 12, 17, 28, 40, 68, 95)


def test_omega_parsing():
    assert str(OmegaSeq.parse("0|120120")) == "|012"
    assert OmegaSeq.parse("|012") == OmegaSeq("", "012")
    with pytest.raises(StructuralError):
        OmegaSeq.parse("0123")
    with pytest.raises(StructuralError):
        OmegaSeq("", "")


def test_other_omega_group_arithmetic():
    om = "|0112"
    G = GrigorchukGroup(om)
    x = G.element("abacad")
    assert G._multiply(x, G.inverse(x)) == G.identity
    with pytest.raises(UnsupportedError):
        rist_witness("01", om)


def test_schreier_graphs(tmp_path):
    r1 = schreier_graph(1)
    assert r1.connected and r1.graph.number_of_nodes() == 2 and r1.diameter == 1
    for k in range(1, 7):
        rep = schreier_graph(k)
        assert rep.connected and rep.diameter <= 2 ** k
    rep = schreier_graph(3)
    write_schreier_dot(rep, tmp_path / "g.dot")
    write_schreier_csv(rep, tmp_path / "g.csv")
    assert "graph" in (tmp_path / "g.dot").read_text()
    assert rho("111").letters == ""


def test_rist_witnesses_small_levels():
    for k in range(4):
        ws = {}
        for i in range(2 ** k):
            u = format(i, f"0{k}b") if k else ""
            w = rist_witness(u)
            assert len(w.letters) <= 6 * 2 ** k
            assert verify_rist(w, u).ok
            assert support_check_by_action(w, u, extra_depth=4)
            ws[u] = w
        items = list(ws.values())
        for i in range(len(items)):
            for j in range(i + 1, len(items)):
                assert commute(items[i], items[j])
    assert not verify_rist(GrigWord("a", 0), "0").ok


def test_equal_is_a_congruence():
    x, y = GrigWord("abc", 0), GrigWord("ad", 0)
    assert equal(x, GrigWord("ad", 0), OM) == equal(GrigWord("abc", 0), y, OM)
    assert equal(GrigWord("bc", 0), GrigWord("d", 0), OM)
