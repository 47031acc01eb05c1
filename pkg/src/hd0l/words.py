"""Finite words, morphisms, and ultimately periodic word forms.

Words are tuples of letter strings. Letters are arbitrary non-empty strings so
derived alphabets (pairs, blocks, position slots) can carry readable names.
"""

from dataclasses import dataclass, field

from .errors import (
    BoundedImageError,
    LetterDomainError,
    PreconditionError,
    ResourceLimitError,
    SystemValidationError,
)

Word = tuple

EPSILON = ()


def as_word(x):
    """Coerce a str / list / tuple into a Word (tuple of 1-char strings for str input)."""
    if isinstance(x, tuple):
        return x
    if isinstance(x, str):
        return tuple(x)
    return tuple(x)


def word_str(w):
    """Human-readable rendering; joins single-char letters, brackets multi-char ones."""
    if not w:
        return "e"
    if all(len(a) == 1 for a in w):
        return "".join(w)
    return ".".join(w)


class Morphism:
    """A morphism between free monoids, stored as a letter -> image-word table."""

    __slots__ = ("images", "domain", "codomain", "letters")

    def __init__(self, images, codomain=None):
        table = {}
        for a, img in images.items():
            if not isinstance(a, str) or not a:
                raise SystemValidationError([f"invalid letter {a!r}"])
            table[a] = as_word(img)
        self.images = table
        self.domain = frozenset(table)
        self.letters = tuple(sorted(table))
        used = frozenset(c for img in table.values() for c in img)
        if codomain is None:
            self.codomain = used
        else:
            self.codomain = frozenset(codomain)
            extra = used - self.codomain
            if extra:
                raise LetterDomainError(
                    f"images use letters outside codomain: {sorted(extra)}")

    def __call__(self, word):
        out = []
        for a in word:
            img = self.images.get(a)
            if img is None:
                raise LetterDomainError(f"letter {a!r} not in domain")
            out.extend(img)
        return tuple(out)

    def image(self, a):
        img = self.images.get(a)
        if img is None:
            raise LetterDomainError(f"letter {a!r} not in domain")
        return img

    @property
    def is_endomorphism(self):
        return self.codomain <= self.domain

    @property
    def is_coding(self):
        return all(len(img) == 1 for img in self.images.values())

    @property
    def is_non_erasing(self):
        return all(img for img in self.images.values())

    def erasing_letters(self):
        return frozenset(a for a, img in self.images.items() if not img)

    def max_image_len(self):
        return max(len(img) for img in self.images.values())

    def restrict(self, letters):
        """Restriction to a sub-domain; images must not leave the kept codomain."""
        keep = frozenset(letters)
        missing = keep - self.domain
        if missing:
            raise LetterDomainError(f"cannot restrict to unknown letters {sorted(missing)}")
        return Morphism({a: self.images[a] for a in keep})

    def pretty(self):
        parts = []
        for a in self.letters:
            parts.append(f"{a}->{word_str(self.images[a])}")
        return "{" + ", ".join(parts) + "}"

    def __eq__(self, other):
        return isinstance(other, Morphism) and self.images == other.images

    def __hash__(self):
        return hash(tuple(sorted(self.images.items())))

    def __repr__(self):
        return f"Morphism({self.pretty()})"


def identity(letters):
    return Morphism({a: (a,) for a in letters})


# Caps guard against runaway image growth when composing accumulated powers.
DEFAULT_COMPOSE_CAP = 4_000_000


def compose(outer, inner, cap=DEFAULT_COMPOSE_CAP):
    """outer o inner. Raises ResourceLimitError when total image size passes cap,
    sizing the result from image lengths before materializing anything."""
    if not inner.codomain <= outer.domain:
        raise PreconditionError(
            f"compose: inner codomain {sorted(inner.codomain - outer.domain)} "
            "not covered by outer domain")
    total = 0
    for a in inner.letters:
        total += sum(len(outer.images[c]) for c in inner.images[a])
        if total > cap:
            raise ResourceLimitError(f"compose: image table exceeds {cap} letters")
    return Morphism({a: outer(inner.images[a]) for a in inner.letters})


def power(sigma, n, cap=DEFAULT_COMPOSE_CAP):
    """sigma^n by binary exponentiation. sigma must be an endomorphism, n >= 0."""
    if not sigma.is_endomorphism:
        raise PreconditionError("power: not an endomorphism")
    if n < 0:
        raise PreconditionError("power: negative exponent")
    result = identity(sorted(sigma.domain))
    base = sigma
    while n:
        if n & 1:
            result = compose(base, result, cap=cap)
        n >>= 1
        if n:
            base = compose(base, base, cap=cap)
    return result


def is_prolongable(sigma, a):
    """sigma(a) = a u with u non-empty."""
    img = sigma.image(a)
    return len(img) >= 2 and img[0] == a


def expand_fixed_point(sigma, a, n, max_steps=10_000, allow_short=False):
    """First n letters of the fixed point of sigma at prolongable letter a.

    Iterates full words (no truncation below n) so cycle detection stays exact.
    A finite fixed point raises BoundedImageError unless allow_short is set.
    """
    if not sigma.is_endomorphism:
        raise PreconditionError("expand_fixed_point: not an endomorphism")
    if not is_prolongable(sigma, a):
        raise PreconditionError(f"expand_fixed_point: sigma not prolongable at {a!r}")
    w = (a,)
    seen = {w}
    for _ in range(max_steps):
        if len(w) >= n:
            return w[:n]
        nxt = sigma(w)
        if nxt == w:
            if allow_short:
                return w
            raise BoundedImageError(
                f"fixed point at {a!r} is finite ({len(w)} letters)")
        if len(nxt) <= n and nxt in seen:
            raise BoundedImageError(
                f"iteration at {a!r} cycles without converging")
        if len(nxt) <= n:
            seen.add(nxt)
        w = nxt
    raise ResourceLimitError(f"expand_fixed_point: no length-{n} prefix after {max_steps} steps")


def minimal_period(word):
    """Smallest p with word[i] == word[i + p] wherever both sides exist,
    via the KMP failure function (p = length minus longest border)."""
    m = len(word)
    if m == 0:
        return 0
    fail = [0] * m
    k = 0
    for i in range(1, m):
        while k and word[i] != word[k]:
            k = fail[k - 1]
        if word[i] == word[k]:
            k += 1
        fail[i] = k
    return m - fail[-1]


def primitive_root(word):
    """Shortest r with word = r^k."""
    m = len(word)
    if m == 0:
        return word
    r = minimal_period(word)
    if m % r == 0:
        return word[:r]
    return word


@dataclass(frozen=True)
class UltimatelyPeriodicWord:
    """u v^omega with v non-empty. Use canonicalize_up for the normal form."""

    preperiod: tuple
    period: tuple

    def __post_init__(self):
        if not self.period:
            raise PreconditionError("period must be non-empty")

    def prefix(self, n):
        u, v = self.preperiod, self.period
        if n <= len(u):
            return u[:n]
        k = n - len(u)
        reps = k // len(v) + 1
        return (u + v * reps)[:n]

    def __str__(self):
        return f"{word_str(self.preperiod)}({word_str(self.period)})^w"


def canonicalize_up(u, v):
    """Normal form of u v^omega: primitive period, then shortest preperiod.

    Shrinking u rotates v (u ending in the last letter of v can absorb it), so
    equal words get equal forms.
    """
    u, v = as_word(u), as_word(v)
    if not v:
        raise PreconditionError("canonicalize_up: empty period")
    v = primitive_root(v)
    u = list(u)
    while u and u[-1] == v[-1]:
        u.pop()
        v = v[-1:] + v[:-1]
    return UltimatelyPeriodicWord(tuple(u), v)


def up_equal(x, y):
    a = canonicalize_up(x.preperiod, x.period)
    b = canonicalize_up(y.preperiod, y.period)
    return a == b


@dataclass(frozen=True)
class HD0LSystem:
    """(A, B, sigma, phi, w): endomorphism sigma on A, morphism phi into B, seed w."""

    alphabet_a: tuple
    alphabet_b: tuple
    sigma: Morphism
    phi: Morphism
    seed: tuple = field(default=())

    def __post_init__(self):
        problems = validate_system(
            self.alphabet_a, self.alphabet_b, self.sigma, self.phi, self.seed)
        if problems:
            raise SystemValidationError(problems)

    def term(self, k, cap=DEFAULT_COMPOSE_CAP):
        """phi(sigma^k(w)), the k-th word of the image sequence."""
        w = self.seed
        total = 0
        for _ in range(k):
            w = self.sigma(w)
            total += len(w)
            if total > cap:
                raise ResourceLimitError(f"term: expansion exceeds {cap} letters")
        return self.phi(w)


def validate_system(alphabet_a, alphabet_b, sigma, phi, seed):
    """Collect every structural violation; empty list means valid."""
    problems = []
    set_a, set_b = set(alphabet_a), set(alphabet_b)
    if len(set_a) != len(alphabet_a):
        problems.append("alphabet A has duplicate letters")
    if len(set_b) != len(alphabet_b):
        problems.append("alphabet B has duplicate letters")
    if not alphabet_a:
        problems.append("alphabet A is empty")
    if not alphabet_b:
        problems.append("alphabet B is empty")
    if sigma.domain != set_a:
        problems.append(
            f"sigma domain {sorted(sigma.domain)} does not match A {sorted(set_a)}")
    extra = sigma.codomain - set_a
    if extra:
        problems.append(f"sigma images leave A: {sorted(extra)}")
    if phi.domain != set_a:
        problems.append(
            f"phi domain {sorted(phi.domain)} does not match A {sorted(set_a)}")
    extra = phi.codomain - set_b
    if extra:
        problems.append(f"phi images leave B: {sorted(extra)}")
    if not seed:
        problems.append("seed word is empty")
    bad = [a for a in seed if a not in set_a]
    if bad:
        problems.append(f"seed uses letters outside A: {sorted(set(bad))}")
    return problems
