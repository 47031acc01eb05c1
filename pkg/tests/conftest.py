"""Shared builders for the test suite."""

import random

from hd0l.words import Morphism


def m(images):
    """Morphism from {letter: image-string} with 1-char letters."""
    return Morphism(images)


def random_endomorphism(rng, letters, max_len=3, allow_empty=True):
    lo = 0 if allow_empty else 1
    return Morphism({
        a: "".join(rng.choice(letters) for _ in range(rng.randint(lo, max_len)))
        for a in letters})


def seeded(seed):
    return random.Random(seed)
