import itertools
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cat0lab import (CyclicGroup, DihedralGroup, FreeGroup, GrigorchukGroup, InfiniteDihedral,
                     Lattice, ball, element_order, group_from_descriptor, recursive_order,
                     word_length, wreath_decompose)
from cat0lab.errors import DomainError, RadiusExceeded, SchemaError
from cat0lab.groups import distance_norm

GROUPS = [Lattice(1), Lattice(2), FreeGroup(2), FreeGroup(3), InfiniteDihedral(),
          CyclicGroup(5), DihedralGroup(4), GrigorchukGroup()]


def letters(group):
    S = group.generating_set()
    return list(S.elements)


def word_element(group, word):
    g = group.identity()
    for s in word:
        g = g * s
    return g


@pytest.mark.parametrize("group", GROUPS, ids=repr)
@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_group_axioms(group, data):
    S = letters(group)
    pick = st.lists(st.sampled_from(S), max_size=6)
    g, h, k = (word_element(group, data.draw(pick)) for _ in range(3))
    e = group.identity()
    assert (g * h) * k == (g * (h * k))
    assert g * e == g == e * g
    assert (g * g.inverse()).is_identity()
    assert (g * h).inverse() == h.inverse() * g.inverse()
    assert hash(g * e) == hash(g)


def brute_force_lengths(group, radius):
    """Minimal word length for every element reachable by words of length <= radius."""
    S = letters(group)
    best = {group.identity(): 0}
    for n in range(1, radius + 1):
        for word in itertools.product(S, repeat=n):
            g = word_element(group, word)
            best.setdefault(g, n)
    return best


@pytest.mark.parametrize("group,radius", [(Lattice(2), 4), (FreeGroup(2), 4), (InfiniteDihedral(), 6),
                                          (CyclicGroup(7), 5), (DihedralGroup(5), 5),
                                          (GrigorchukGroup(), 5)], ids=repr)
def test_ball_matches_brute_force(group, radius):
    B = ball(group, radius)
    assert dict(B.elements) == brute_force_lengths(group, radius)


def test_sphere_sizes_closed_forms():
    F = FreeGroup(2)
    B = ball(F, 6)
    assert [len(B.sphere(r)) for r in range(7)] == [1] + [4 * 3 ** (r - 1) for r in range(1, 7)]
    Z2 = ball(Lattice(2), 5)
    assert [len(Z2.sphere(r)) for r in range(6)] == [1, 4, 8, 12, 16, 20]
    Dinf = ball(InfiniteDihedral(), 8)
    assert [len(Dinf.sphere(r)) for r in range(9)] == [1] + [2] * 8
    assert len(ball(DihedralGroup(6), 10)) == 12


def test_closed_form_norms_agree_with_bfs():
    for group in (Lattice(3), FreeGroup(2), InfiniteDihedral(), CyclicGroup(9), DihedralGroup(4)):
        for g, n in ball(group, 5).elements.items():
            assert distance_norm(g) == n == word_length(g)


def test_ball_radius_cap_and_domain():
    with pytest.raises(RadiusExceeded) as info:
        ball(FreeGroup(2), 10, cap=5)
    assert info.value.cap == 5
    with pytest.raises(DomainError):
        ball(FreeGroup(2), -1)


def test_ball_cache_roundtrip(tmp_path):
    first = ball(GrigorchukGroup(), 4, cache_dir=tmp_path)
    files = list(tmp_path.iterdir())
    assert files and all(f.name.startswith("ball_v1_grigorchuk_") for f in files)
    # a fresh group instance (fresh interning) reads the cache back
    again = ball(GrigorchukGroup(), 4, cache_dir=tmp_path)
    assert [again.elements[g] for g in again.elements] == list(first.elements.values())
    assert [g.group.serialize(g) for g in again.elements] == [g.group.serialize(g) for g in first.elements]


def test_corrupt_cache_is_rebuilt(tmp_path):
    ball(FreeGroup(2), 3, cache_dir=tmp_path)
    for f in tmp_path.iterdir():
        f.write_text("not json\n")
    B = ball(FreeGroup(2), 3, cache_dir=tmp_path)
    assert len(B) == 1 + 4 + 12 + 36


def test_descriptors_roundtrip():
    for group in GROUPS:
        assert group_from_descriptor(json.loads(json.dumps(group.descriptor()))) == group
    with pytest.raises(SchemaError):
        group_from_descriptor({"kind": "mystery"})
    with pytest.raises(SchemaError):
        group_from_descriptor({"kind": "free", "rank": 2, "colour": "red"})


def test_serialize_parse_roundtrip():
    for group in GROUPS:
        for g in ball(group, 3).elements:
            assert group.parse(json.loads(json.dumps(group.serialize(g)))) == g


def test_element_order_finite_groups():
    assert element_order(CyclicGroup(12).basic_generators()[0], 100) == 12
    r, s = DihedralGroup(5).basic_generators()
    assert element_order(r, 100) == 5 and element_order(s, 100) == 2 and element_order(r * s, 10) == 2
    assert element_order(FreeGroup(2).basic_generators()[0], 50) is None
    with pytest.raises(DomainError):
        element_order(r, 0)


# -- Grigorchuk group against an independent tree-action oracle -------------------------

def _oracle_letter(ch, v):
    """Letters acting on 0/1 strings by the defining recursion."""
    if not v:
        return v
    if ch == "a":
        return ("1" if v[0] == "0" else "0") + v[1:]
    if ch == "e":
        return v
    left, right = {"b": ("a", "c"), "c": ("a", "d"), "d": ("e", "b")}[ch]
    return v[0] + _oracle_letter(left if v[0] == "0" else right, v[1:])


def _oracle_word(word, v):
    for ch in word:  # right action: the first letter acts first
        v = _oracle_letter(ch, v)
    return v


@settings(max_examples=80, deadline=None)
@given(st.text(alphabet="abcd", max_size=14))
def test_grigorchuk_portraits_match_tree_oracle(word):
    G = GrigorchukGroup()
    g = G.from_word(word)
    for depth in (1, 3, 7):
        for bits in itertools.product("01", repeat=depth):
            v = "".join(bits)
            assert "".join(map(str, G.act(g, tuple(int(b) for b in v)))) == _oracle_word(word, v)


def test_grigorchuk_relations_and_sections():
    G = GrigorchukGroup()
    a, b, c, d = G.basic_generators()
    for x in (a, b, c, d):
        assert (x * x).is_identity()
    assert (b * c * d).is_identity()
    assert ((a * d) ** 4).is_identity()
    g0, g1, swap = wreath_decompose(b)
    assert (g0, g1, swap) == (a, c, False)
    assert wreath_decompose(a) == (G.identity(), G.identity(), True)


def test_grigorchuk_known_orders():
    G = GrigorchukGroup()
    known = {"ad": 4, "ac": 8, "ab": 16}
    for word, order in known.items():
        g = G.from_word(word)
        assert recursive_order(g, 4096) == order == element_order(g, 4096)
    assert recursive_order(G.from_word("ab"), 8) is None


@settings(max_examples=60, deadline=None)
@given(st.text(alphabet="abcd", max_size=16))
def test_grigorchuk_recursive_order_matches_iteration(word):
    g = GrigorchukGroup().from_word(word)
    o = recursive_order(g, 1 << 12)
    assert o == element_order(g, 1 << 12)
    assert o is not None and o & (o - 1) == 0
