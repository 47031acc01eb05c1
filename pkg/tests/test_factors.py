"""Tests for the factor machinery and the period certification check."""

import pytest

from conftest import m, random_endomorphism, seeded
from hd0l.errors import PreconditionError
from hd0l.factors import (
    FactorEngine,
    block_substitution,
    factors_of_length,
    finalcheck,
    lang_eq_periodic,
    periodic_factors,
    recurrent_factors,
    recurrent_letters,
)
from hd0l.normalization import substitutive_representation
from hd0l.words import (
    UltimatelyPeriodicWord,
    expand_fixed_point,
    identity,
    is_prolongable,
)

FIB = m({"a": "ab", "b": "a"})
TM = m({"a": "ab", "b": "ba"})


def windows(word, n):
    return frozenset(word[i:i + n] for i in range(len(word) - n + 1))


def test_engine_roundtrip_and_apply():
    eng = FactorEngine(FIB)
    w = ("a", "b", "a", "a")
    s = eng.encode(w)
    assert eng.decode(s) == w
    assert eng.decode(eng.apply(s)) == FIB(w)


def test_engine_rejects_erasing():
    with pytest.raises(PreconditionError):
        FactorEngine(m({"a": "ab", "b": ""}))


def test_fibonacci_small_factor_sets():
    assert factors_of_length(FIB, "a", 1) == {("a",), ("b",)}
    assert factors_of_length(FIB, "a", 2) == {
        ("a", "b"), ("b", "a"), ("a", "a")}
    # the Fibonacci word has n + 1 factors of each length n
    for n in range(1, 9):
        assert len(factors_of_length(FIB, "a", n)) == n + 1


def test_thue_morse_factor_counts():
    counts = [len(factors_of_length(TM, "a", n)) for n in range(1, 7)]
    assert counts == [2, 4, 6, 10, 12, 16]


def test_factors_match_long_prefix_windows():
    # both words are uniformly recurrent with small recurrence constants, so
    # every short factor already shows up in a modest prefix
    for sigma in (FIB, TM):
        x = expand_fixed_point(sigma, "a", 2000)
        for n in (2, 3, 5):
            assert factors_of_length(sigma, "a", n) == windows(x, n)


def test_factors_of_eventually_constant_word():
    sigma = m({"a": "ab", "b": "b"})
    assert factors_of_length(sigma, "a", 2) == {("a", "b"), ("b", "b")}
    assert factors_of_length(sigma, "a", 3) == {
        ("a", "b", "b"), ("b", "b", "b")}


def test_prefix_windows_always_inside_closure():
    rng = seeded(71)
    checked = 0
    for _ in range(120):
        letters = "ab" if rng.random() < 0.5 else "abc"
        sigma = random_endomorphism(rng, letters, max_len=3, allow_empty=False)
        seed_letter = next(
            (a for a in sigma.letters if is_prolongable(sigma, a)), None)
        if seed_letter is None:
            continue
        try:
            x = expand_fixed_point(sigma, seed_letter, 1200)
        except Exception:
            continue
        for n in (2, 3):
            closure = factors_of_length(sigma, seed_letter, n)
            assert windows(x[:600], n) <= closure
        checked += 1
    assert checked >= 30


def test_block_substitution_images():
    fib2 = m({"a": "aba", "b": "ab"})
    bs = block_substitution(fib2, "a", 2)
    assert bs.seed_name == "[a|b]"
    assert bs.morphism.image("[a|b]") == ("[a|b]", "[b|a]", "[a|a]")
    edge = m({"a": "ab", "b": "b"})
    bs2 = block_substitution(edge, "a", 2)
    assert bs2.morphism.image("[a|b]") == ("[a|b]", "[b|b]")


def test_block_substitution_recodes_fixed_point():
    for sigma, n in ((FIB, 2), (FIB, 3), (TM, 2), (m({"a": "ab", "b": "b"}), 2)):
        bs = block_substitution(sigma, "a", n)
        x = expand_fixed_point(sigma, "a", 400)
        xb = expand_fixed_point(bs.morphism, bs.seed_name, 300)
        eng = FactorEngine(sigma)
        for i, name in enumerate(xb):
            assert eng.decode(bs.factor_of[name]) == x[i:i + n]


def test_recurrent_letters():
    fib2 = m({"a": "aba", "b": "ab"})
    assert recurrent_letters(fib2, "a") == ({"a", "b"}, 3)
    assert recurrent_letters(m({"a": "ab", "b": "b"}), "a") == ({"b"}, 2)
    assert recurrent_letters(m({"a": "aa"}), "a") == ({"a"}, 2)


def test_recurrent_letters_requires_stable_sets():
    # letters(sigma(b)) = {a} changes to letters(sigma^2(b)) = {a, b}
    with pytest.raises(PreconditionError):
        recurrent_letters(FIB, "a")


def test_recurrent_factors_uniformly_recurrent():
    # every factor of the Fibonacci and Thue-Morse words recurs
    for sigma in (FIB, TM):
        for n in (1, 2, 4):
            rf = recurrent_factors(sigma, "a", n)
            assert rf.recurrent == rf.factors


def test_recurrent_factors_with_transient_prefix():
    rf = recurrent_factors(m({"a": "ab", "b": "b"}), "a", 2)
    assert rf.recurrent == {("b", "b")}
    assert rf.factors == {("a", "b"), ("b", "b")}
    rf1 = recurrent_factors(m({"a": "ab", "b": "b"}), "a", 1)
    assert rf1.recurrent == {("b",)}
    assert rf1.factors == {("a",), ("b",)}


def test_recurrent_factors_periodic_word():
    rf = recurrent_factors(m({"a": "ab", "b": "ab"}), "a", 4)
    assert rf.recurrent == {
        ("a", "b", "a", "b"), ("b", "a", "b", "a")}


def test_recurrent_index_semantics():
    # the window at every position at or past the index must be recurrent
    cases = [(FIB, 3), (TM, 2), (m({"a": "ab", "b": "b"}), 2),
             (m({"a": "abb", "b": "bb"}), 3)]
    for sigma, n in cases:
        rf = recurrent_factors(sigma, "a", n)
        x = expand_fixed_point(sigma, "a", rf.index + 60 + n)
        for i in range(rf.index, rf.index + 60):
            assert x[i:i + n] in rf.recurrent


def test_periodic_factors():
    assert periodic_factors(("a", "b"), 3) == {
        ("a", "b", "a"), ("b", "a", "b")}
    assert periodic_factors("a", 4) == {("a", "a", "a", "a")}
    assert periodic_factors("abc", 2) == {
        ("a", "b"), ("b", "c"), ("c", "a")}


def test_lang_eq_periodic():
    assert lang_eq_periodic("ab", "ba")
    assert lang_eq_periodic("abab", "ab")
    assert not lang_eq_periodic("ab", "aab")
    assert lang_eq_periodic("abcabc", "cab")
    assert not lang_eq_periodic("ab", "aa")
    assert lang_eq_periodic("aaa", "a")


def test_lang_eq_periodic_matches_factor_sets():
    rng = seeded(9)
    for _ in range(200):
        u = tuple(rng.choice("ab") for _ in range(rng.randint(1, 12)))
        v = tuple(rng.choice("ab") for _ in range(rng.randint(1, 12)))
        n = len(u) + len(v)
        brute = periodic_factors(u, n) == periodic_factors(v, n)
        assert lang_eq_periodic(u, v) == brute


def _rep(images, phi=None, seed="a"):
    sigma = m(images)
    if phi is None:
        phi = identity(sigma.letters)
    return substitutive_representation(sigma, phi, seed)


def test_finalcheck_simple_tail():
    rep = _rep({"a": "ab", "b": "bb"})
    up = finalcheck(rep, ("b",))
    assert up == UltimatelyPeriodicWord(("a",), ("b",))
    # a non-primitive candidate is rooted first
    assert finalcheck(rep, ("b", "b")) == up


def test_finalcheck_purely_periodic():
    rep = _rep({"a": "ab", "b": "ab"})
    up = finalcheck(rep, ("a", "b"))
    assert up == UltimatelyPeriodicWord((), ("a", "b"))
    # a rotated candidate lands on the same canonical form
    assert finalcheck(rep, ("b", "a")) == up


def test_finalcheck_rejects_wrong_period():
    rep = _rep({"a": "ab", "b": "bb"})
    assert finalcheck(rep, ("a", "b")) is None


def test_finalcheck_aperiodic():
    for images in ({"a": "ab", "b": "a"}, {"a": "ab", "b": "ba"}):
        rep = _rep(images)
        assert finalcheck(rep, ("a", "b")) is None
        assert finalcheck(rep, ("a",)) is None


def test_finalcheck_with_coding():
    # collapsing Thue-Morse onto one letter makes it periodic
    phi = m({"a": "0", "b": "0"})
    rep = _rep({"a": "ab", "b": "ba"}, phi=phi)
    assert finalcheck(rep, ("0",)) == UltimatelyPeriodicWord((), ("0",))


def test_finalcheck_longer_preperiod():
    rep = _rep({"b": "bcc", "c": "c"}, seed="b")
    assert finalcheck(rep, ("c",)) == UltimatelyPeriodicWord(("b",), ("c",))
