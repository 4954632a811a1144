import math

import pytest
from hypothesis import given, strategies as st

from hypdet.group import (
    IdentityWordError,
    Permutation,
    Word,
    conjugacy_key,
    cycle_type,
    cyclic_reduce,
    diameter,
    evaluate_hom,
    fixed_points,
    free_reduce,
    gap_estimate,
    is_transitive,
    surface_presentation,
    surface_relator,
)

P2 = surface_presentation(2)
letters = st.lists(st.sampled_from([1, -1, 2, -2, 3, -3, 4, -4]), max_size=12)


def test_free_reduce():
    assert free_reduce([1, -1, 2]) == (2,)
    assert free_reduce([1, 2, -2, -1]) == ()


def test_word_parse_roundtrip():
    w = Word.parse("a1b1A1")
    assert w.letters == (1, 2, -1)
    assert Word.parse(str(w)) == w


def test_cyclic_reduce_examples():
    assert cyclic_reduce(Word((1, 2, -1))) == Word((2,))
    assert cyclic_reduce(Word(())) == Word(())
    assert cyclic_reduce(Word((1, 2))) == Word((1, 2))


@given(letters)
def test_cyclic_reduce_idempotent(xs):
    w = cyclic_reduce(Word(tuple(xs)))
    assert cyclic_reduce(w) == w
    if len(w) >= 2:
        assert w.letters[0] != -w.letters[-1]


def test_conjugacy_key_detects_relator():
    with pytest.raises(IdentityWordError):
        conjugacy_key(surface_relator(2), P2)


def test_conjugacy_key_conjugate_words():
    assert conjugacy_key(Word.parse("a1b1A1"), P2) == conjugacy_key(Word.parse("b1"), P2)


@given(letters, st.integers(0, 11))
def test_conjugacy_key_rotation_invariant(xs, k):
    w = cyclic_reduce(Word(tuple(xs)))
    if not len(w):
        return
    k %= len(w)
    rot = Word(w.letters[k:] + w.letters[:k])
    try:
        key = conjugacy_key(w, P2)
    except IdentityWordError:
        return
    assert conjugacy_key(rot, P2) == key


@given(letters, st.lists(st.sampled_from([1, -1, 2, -2, 3, -3, 4, -4]), max_size=4))
def test_conjugacy_key_conjugation_invariant(xs, ys):
    w, u = Word(tuple(xs)), Word(tuple(ys))
    try:
        key = conjugacy_key(w, P2)
    except IdentityWordError:
        return
    assert conjugacy_key(u * w * u.inverse(), P2) == key


def test_evaluate_hom_examples():
    swap = Permutation.from_cycles(3, [(1, 2)])
    assert evaluate_hom([swap], Word(())).is_identity()
    assert evaluate_hom([swap], Word((1,))) == swap
    c3 = Permutation.from_cycles(3, [(1, 2, 3)])
    assert evaluate_hom([c3], Word((1, 1))) == Permutation.from_cycles(3, [(1, 3, 2)])


perm4 = st.permutations(range(4)).map(lambda p: Permutation(tuple(p)))


@given(st.lists(perm4, min_size=2, max_size=2), letters.map(lambda xs: [x for x in xs if abs(x) <= 2]),
       letters.map(lambda xs: [x for x in xs if abs(x) <= 2]))
def test_evaluate_hom_is_homomorphism(hom, xs, ys):
    u, v = Word(tuple(xs)), Word(tuple(ys))
    assert evaluate_hom(hom, u * v) == evaluate_hom(hom, u) * evaluate_hom(hom, v)
    assert evaluate_hom(hom, u.inverse()) == evaluate_hom(hom, u).inverse()


def test_cycle_type_and_fix():
    e = Permutation.identity(4)
    assert cycle_type(e) == [1, 1, 1, 1] and fixed_points(e) == 4
    t = Permutation.from_cycles(3, [(1, 2)])
    assert cycle_type(t) == [2, 1] and fixed_points(t) == 1
    c = Permutation.from_cycles(4, [(1, 2, 3, 4)])
    assert cycle_type(c) == [4] and fixed_points(c) == 0


@given(perm4)
def test_cycle_type_partitions_n(p):
    assert sum(cycle_type(p)) == 4
    assert cycle_type(p).count(1) == fixed_points(p)


def test_schreier_examples():
    ids = [Permutation.identity(3)] * 4
    assert not is_transitive(ids)
    n = 6
    cyc = Permutation.from_cycles(n, [tuple(range(1, n + 1))])
    hom = [cyc] + [Permutation.identity(n)] * 3
    assert is_transitive(hom)
    assert diameter(hom) <= n - 1
    one = [Permutation.identity(1)] * 4
    assert is_transitive(one) and diameter(one) == 0
    assert gap_estimate(one) == math.inf


def test_gap_estimate_cycle_graph():
    # normalized Laplacian of a cycle C_n with every edge doubled (a and a^-1) and 3 loops
    n = 8
    cyc = Permutation.from_cycles(n, [tuple(range(1, n + 1))])
    hom = [cyc] + [Permutation.identity(n)] * 3
    expected = (2 - 2 * math.cos(2 * math.pi / n)) / 8
    assert gap_estimate(hom) == pytest.approx(expected, rel=1e-6)
