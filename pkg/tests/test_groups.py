from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from margulis.affine import AFFINE_IDENTITY, AffineIso, operator_distance
from margulis.errors import FailedToSeparate, NonElementaryViolated
from margulis.groups import (
    Presentation,
    _angle,
    evaluate_linear,
    evaluate_word,
    hyperbolize,
    make_schottky,
    make_schottky_pair,
    schottky_intervals,
    share_fixed_points,
    verify_schottky,
)
from margulis.lorentz import IsometryClass, boost, classify, null_frame, rotation
from margulis.words import Word, enumerate_words, gen, reduce_word

from conftest import schottky_deformation, seeds

PAIR = make_schottky_pair(math.log(2), math.log(2), math.pi / 2)


# words


def test_reduce_word_examples():
    assert reduce_word([(0, 2), (0, -2)]) == Word()
    assert reduce_word([(0, 1), (1, 1), (1, -1), (0, 1)]) == Word(((0, 2),))
    assert reduce_word([(1, 3)], [None, 2]) == Word(((1, 1),))


def test_enumerate_examples():
    assert [str(w) for w in enumerate_words(2, None, 1)] == ["g1", "g1^-1", "g2", "g2^-1"]
    assert len(enumerate_words(2, None, 2)) == 16
    for w in enumerate_words(2, [2, None], 4):
        for i, e in w.syllables:
            if i == 0:
                assert e == 1


def count_reduced(n, max_len):
    # oracle: brute-force over letter strings, keep the freely reduced ones
    letters = [(i, s) for i in range(n) for s in (1, -1)]
    total, layer = 0, [()]
    for _ in range(max_len):
        layer = [w + (l,) for w in layer for l in letters
                 if not w or not (w[-1][0] == l[0] and w[-1][1] == -l[1])]
        total += len(layer)
    return total


@pytest.mark.parametrize("n,max_len", [(2, 3), (3, 2), (2, 4)])
def test_enumerate_count_oracle(n, max_len):
    words = enumerate_words(n, None, max_len)
    assert len(words) == count_reduced(n, max_len)
    assert len(set(words)) == len(words)
    assert sorted(words, key=Word.sort_key) == words
    assert all(reduce_word(w.syllables) == w for w in words)


def test_enumerate_deterministic():
    assert enumerate_words(3, [None, 3, None], 3) == enumerate_words(3, [None, 3, None], 3)


@given(st.lists(st.tuples(st.integers(0, 2), st.integers(-3, 3)), max_size=12))
def test_reduce_idempotent_and_inverse(raw):
    w = reduce_word(raw)
    assert reduce_word(w.syllables) == w
    assert (w * w.inverse()) == Word()


def test_word_string_round_trip():
    for w in enumerate_words(3, None, 3):
        assert Word.parse(str(w)) == w
    assert str(Word(((0, 2), (1, -1)))) == "g1^2.g2^-1"
    assert Word.parse("e") == Word()


# evaluation


def test_evaluate_word_examples():
    p = schottky_deformation(2)
    assert operator_distance(evaluate_word(p, Word()), AFFINE_IDENTITY) == 0
    assert operator_distance(evaluate_word(p, gen(0)), p.gens[0]) == 0
    for w in enumerate_words(2, None, 3):
        prod = evaluate_word(p, w) @ evaluate_word(p, w.inverse())
        scale = np.linalg.norm(evaluate_word(p, w).homogeneous(), 2) ** 2
        assert operator_distance(prod, AFFINE_IDENTITY) <= 1e-12 * max(1.0, scale)


def test_presentation_order_check():
    e = AffineIso(rotation(2 * math.pi / 5), np.zeros(3))
    Presentation((e,), (5,))
    with pytest.raises(Exception):
        Presentation((e,), (4,))


# Schottky


def test_schottky_pair_example():
    assert verify_schottky(PAIR.linear_gens)
    g, h = PAIR.linear_gens
    assert not share_fixed_points(g, h)
    a, b = null_frame(g), null_frame(h)
    for x in (a.xm, a.xp):
        for y in (b.xm, b.xp):
            assert np.linalg.norm(x - y) > 1e-8


def test_schottky_pair_shared_axis():
    with pytest.raises(FailedToSeparate):
        make_schottky_pair(math.log(2), math.log(2), 0.0)


def test_verify_schottky_trivial_cases():
    g = boost(1.0)
    assert verify_schottky([g])
    assert not verify_schottky([g, g.inverse()])


def _sigma_arc(arcs, i, e):
    am, ap = arcs[i]
    return ap if e > 0 else am


@pytest.mark.parametrize("seed,rank", [(0, 2), (1, 3), (5, 2)])
def test_schottky_word_combinatorics(seed, rank):
    p = make_schottky(rank, np.random.default_rng(seed))
    arcs = schottky_intervals(p.linear_gens)
    assert arcs is not None
    for w in enumerate_words(rank, None, 4):
        fr = null_frame(evaluate_linear(p.linear_gens, w))
        (i1, e1), (ik, ek) = w.syllables[0], w.syllables[-1]
        assert _sigma_arc(arcs, i1, e1).contains(_angle(fr.xp), 1e-9)
        assert _sigma_arc(arcs, ik, -ek).contains(_angle(fr.xm), 1e-9)


@pytest.mark.parametrize("seed,rank", [(0, 2), (3, 3)])
def test_schottky_words_hyperbolic(seed, rank):
    p = make_schottky(rank, np.random.default_rng(seed))
    for w in enumerate_words(rank, None, 5 if rank == 2 else 4):
        assert classify(evaluate_linear(p.linear_gens, w)) is IsometryClass.HYPERBOLIC


@given(seeds)
def test_make_schottky_verified(seed):
    rng = np.random.default_rng(seed)
    p = make_schottky(int(rng.integers(2, 4)), rng)
    assert verify_schottky(p.linear_gens)


# hyperbolization


def test_hyperbolize_identity_substitution():
    p = schottky_deformation(4, 3)
    q1, q2, words = hyperbolize(p, p)
    assert words == [gen(0), gen(1), gen(2)]


def test_hyperbolize_elliptic_generator():
    g = AffineIso(boost(1.0), [0.1, 0.2, 0.3])
    r = rotation(0.4)
    e = AffineIso(r @ rotation(2 * math.pi / 5) @ r.inverse(), np.zeros(3))
    p = Presentation((g, e), (None, 5))
    q1, q2, words = hyperbolize(p, p)
    assert words[0] == gen(0)
    w = words[1]
    assert w.syllables[-1] == (1, 1)
    k = w.syllables[0][1]
    assert w.syllables[0][0] == 0 and 1 <= abs(k) <= 32
    for q in (q1, q2):
        for h in q.gens:
            assert classify(h.linear) is IsometryClass.HYPERBOLIC


def test_hyperbolize_rejects_elementary():
    g = AffineIso(boost(1.0), np.zeros(3))
    h = AffineIso(boost(2.0), [1.0, 0, 0])
    p = Presentation((g, h))
    with pytest.raises(NonElementaryViolated):
        hyperbolize(p, p)
