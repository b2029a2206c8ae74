from hypothesis import given, strategies as st

from folnerkit.core import ball
from folnerkit.wreath import (LampElement, WreathGroup, lamp_length_exact, make_lamp,
                              wreath_inverse, wreath_multiply)

configs = st.dictionaries(st.integers(-4, 4), st.integers(0, 2), max_size=5)


def elems(p):
    return st.builds(lambda c, z: make_lamp(c, z, p, 1), configs, st.integers(-4, 4))


@given(elems(3), elems(3), elems(3))
def test_associative(x, y, z):
    lhs = wreath_multiply(wreath_multiply(x, y, 3, 1), z, 3, 1)
    rhs = wreath_multiply(x, wreath_multiply(y, z, 3, 1), 3, 1)
    assert lhs == rhs


@given(elems(2))
def test_inverse(x):
    assert wreath_multiply(x, wreath_inverse(x, 2), 2, 1) == LampElement((), (0,))


def test_generators_act_on_the_right():
    G = WreathGroup(2, 1, ("t", "b"))
    x = G.evaluate(["t", "t", "b", "t^-1"])
    assert x == make_lamp({2: 1}, 1)
    assert G.format_element(x) == G.format_element(G.parse_element(G.format_element(x)))


def test_closed_form_length_matches_bfs():
    G = WreathGroup(2, 1, ("t", "b"))
    for x, L in ball(G, 8).members.items():
        assert lamp_length_exact(x) == L


def test_higher_rank_and_order():
    G = WreathGroup(3, 2)
    assert len(G.symmetric_generators) == 6
    x = G.evaluate(["b", "b", "b"])
    assert x == G.identity
    assert G.exact_length(G.identity) is None


def test_json_roundtrip():
    G = WreathGroup(2, 2)
    x = G.evaluate(["t1", "b", "t2", "b"])
    assert G.from_json(G.to_json(x)) == x
