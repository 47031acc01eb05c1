"""Factor (subword) machinery for fixed points of non-erasing substitutions,
plus the period certification check used by every positive verdict.

Words are interned into one-char-per-letter Python strings so window slicing
and image application run at C speed; public results decode back to tuples.
"""

from dataclasses import dataclass

from .errors import (
    BoundedImageError,
    InternalCheckError,
    PreconditionError,
    ResourceLimitError,
)
from .matrices import letterset_orbit, minimal_p2_exponent, satisfies_p2_at
from .words import Morphism, as_word, canonicalize_up, is_prolongable, primitive_root

DEFAULT_MAX_FACTORS = 200_000
DEFAULT_MAX_WORD = 2_000_000


class FactorEngine:
    """Interned view of a non-erasing substitution."""

    def __init__(self, tau):
        if not tau.is_endomorphism:
            raise PreconditionError("FactorEngine: not an endomorphism")
        if not tau.is_non_erasing:
            raise PreconditionError("FactorEngine: erasing substitution")
        self.tau = tau
        self._enc = {a: chr(0x100 + i) for i, a in enumerate(tau.letters)}
        self._dec = {c: a for a, c in self._enc.items()}
        self.table = {
            self._enc[a]: "".join(self._enc[c] for c in tau.image(a))
            for a in tau.letters}

    def encode(self, word):
        return "".join(self._enc[a] for a in word)

    def decode(self, s):
        return tuple(self._dec[c] for c in s)

    def apply(self, s):
        return "".join(self.table[c] for c in s)

    def expand_until(self, word, n, max_word=DEFAULT_MAX_WORD):
        """Apply tau to word until it has at least n letters (word untruncated)."""
        s = self.encode(word)
        for _ in range(10_000):
            if len(s) >= n:
                return s
            nxt = self.apply(s)
            if nxt == s:
                raise BoundedImageError("expand_until: word is a finite fixed word")
            if len(nxt) > max_word:
                raise ResourceLimitError("expand_until: word cap exceeded")
            s = nxt
        raise ResourceLimitError("expand_until: step cap exceeded")

    def factors(self, seed_word, n, max_factors=DEFAULT_MAX_FACTORS):
        """All length-n factors of the limit language generated from seed_word:
        the closure of the n-windows of an expanded seed under taking n-windows
        of images. Sound and complete for the fixed point when seed_word is a
        prefix, and for the minimal subshift when tau is primitive."""
        if n < 1:
            raise PreconditionError("factors: n must be positive")
        base = self.expand_until(seed_word, n)
        found = set(_windows(base, n))
        queue = list(found)
        while queue:
            w = queue.pop()
            img = self.apply(w)
            for win in _windows(img, n):
                if win not in found:
                    found.add(win)
                    if len(found) > max_factors:
                        raise ResourceLimitError("factors: factor cap exceeded")
                    queue.append(win)
        return frozenset(found)

    def coded_window_floor(self, kappa, seed_word, n, sample_len,
                           max_word=DEFAULT_MAX_WORD):
        """Number of distinct kappa-coded n-windows in an expanded sample of
        the limit word: a sound lower bound on the coded factor count, since
        the sample can only miss factors (hash collisions only merge windows,
        never split them). kappa must have single-letter images."""
        if n < 1:
            raise PreconditionError("coded_window_floor: n must be positive")
        s = self.expand_until(seed_word, max(n, sample_len), max_word)
        s = s[:max(n, sample_len)]
        table = {}
        out_codes = {}
        for a in self.tau.letters:
            img = kappa.image(a)
            if len(img) != 1:
                raise PreconditionError("coded_window_floor: kappa not a coding")
            table[ord(self._enc[a])] = out_codes.setdefault(
                img[0], 0x8000 + len(out_codes))
        coded = s.translate(table)
        mod = (1 << 61) - 1
        base = 1_000_003
        shift = pow(base, n, mod)
        seen = set()
        h = 0
        for i, code in enumerate(coded):
            h = (h * base + ord(code)) % mod
            if i >= n:
                h = (h - ord(coded[i - n]) * shift) % mod
            if i >= n - 1:
                seen.add(h)
        return len(seen)


def _windows(s, n):
    return {s[i:i + n] for i in range(len(s) - n + 1)}


def factors_of_length(sigma, a, n, max_factors=DEFAULT_MAX_FACTORS):
    """All length-n factors of the limit word generated from a (letter or word)."""
    eng = FactorEngine(sigma)
    return frozenset(
        eng.decode(w) for w in eng.factors(as_word(a), n, max_factors))


@dataclass(frozen=True)
class BlockSubstitution:
    """Substitution on length-n factors whose fixed point at seed_name is the
    n-block recoding of the original fixed point (block at position i covers
    positions i..i+n-1). The image of a block is the run of windows of its
    image word covering the image of the block's first letter."""

    n: int
    morphism: Morphism
    seed_name: str
    name_of: dict
    factor_of: dict


def _block_substitution(engine, seed_word, n, max_factors):
    base = engine.expand_until(seed_word, n)
    facs = engine.factors(seed_word, n, max_factors)
    names = {}
    for w in sorted(facs):
        names[w] = "[" + "|".join(engine.decode(w)) + "]"
    images = {}
    for w in facs:
        img = engine.apply(w)
        first_len = len(engine.table[w[0]])
        blocks = []
        for j in range(first_len):
            win = img[j:j + n]
            if win not in names:
                raise InternalCheckError("block image leaves the factor set")
            blocks.append(names[win])
        images[names[w]] = tuple(blocks)
    return BlockSubstitution(
        n=n,
        morphism=Morphism(images),
        seed_name=names[base[:n]],
        name_of=names,
        factor_of={v: k for k, v in names.items()})


def block_substitution(sigma, a, n, max_factors=DEFAULT_MAX_FACTORS):
    return _block_substitution(FactorEngine(sigma), as_word(a), n, max_factors)


def recurrent_letters(sigma, a):
    """Letters occurring infinitely often in the fixed point at a, and an
    index past which every position holds one.

    With sigma(a) = a u and stable letter sets the fixed point reads
    a u sigma(u) sigma^2(u) ..., so the recurrent letters are exactly
    letters(sigma(u)) and positions >= |a u| all carry them."""
    orbit = letterset_orbit(sigma)
    if not satisfies_p2_at(orbit, 1):
        raise PreconditionError("recurrent_letters: letter sets not stable")
    img = sigma.image(a)
    if not is_prolongable(sigma, a):
        raise PreconditionError("recurrent_letters: sigma not prolongable at a")
    rec = frozenset(c for b in img[1:] for c in sigma.image(b))
    return rec, len(img)


@dataclass(frozen=True)
class FactorSet:
    """Length-n factors of a fixed point, the recurrent ones, and an index
    such that the window at every position >= index is recurrent."""

    n: int
    factors: frozenset
    recurrent: frozenset
    index: int


def _recurrent_interned(engine, seed_word, n, max_factors, max_word):
    """Interned (factors, recurrent, index) for the fixed point at seed_word.

    Works on the n-block substitution raised to its minimal letter-set
    stabilization power r: the block fixed point is c u s(u) s^2(u) ... with
    s the raised substitution, so the letters of s(u) are the recurrent
    blocks and everything past c u is one. Letter sets of s(u) come from the
    orbit table; only s(c) = c u is ever materialized."""
    bs = _block_substitution(engine, seed_word, n, max_factors)
    sigma_n = bs.morphism
    if not is_prolongable(sigma_n, bs.seed_name):
        raise PreconditionError("recurrent factors: block seed not prolongable")
    orbit = letterset_orbit(sigma_n)
    r = minimal_p2_exponent(orbit)
    word = (bs.seed_name,)
    for _ in range(r):
        word = sigma_n(word)
        if len(word) > max_word:
            raise ResourceLimitError("recurrent factors: block word cap exceeded")
    if word[0] != bs.seed_name:
        raise InternalCheckError("block power lost prolongability")
    rec_names = set()
    for b in word[1:]:
        rec_names.update(orbit.letters_of(r, b))
    all_factors = frozenset(bs.factor_of[v] for v in sigma_n.letters)
    recurrent = frozenset(bs.factor_of[v] for v in rec_names)
    return all_factors, recurrent, len(word)


def recurrent_factors(sigma, a, n, max_factors=DEFAULT_MAX_FACTORS,
                      max_word=DEFAULT_MAX_WORD):
    """Recurrent length-n factors of the fixed point at a (letter or word)."""
    eng = FactorEngine(sigma)
    facs, rec, index = _recurrent_interned(
        eng, as_word(a), n, max_factors, max_word)
    return FactorSet(
        n=n,
        factors=frozenset(eng.decode(w) for w in facs),
        recurrent=frozenset(eng.decode(w) for w in rec),
        index=index)


def periodic_factors(v, n):
    """All length-n factors of v v v ..."""
    v = as_word(v)
    if not v:
        raise PreconditionError("periodic_factors: empty period")
    reps = v * (n // len(v) + 2)
    return frozenset(reps[i:i + n] for i in range(len(v)))


def lang_eq_periodic(u, v):
    """Whether u^omega and v^omega have the same factors: conjugate roots."""
    ru, rv = primitive_root(as_word(u)), primitive_root(as_word(v))
    if not (ru and rv):
        raise PreconditionError("lang_eq_periodic: empty word")
    return len(ru) == len(rv) and _is_rotation(ru, rv)


def _is_rotation(ru, rv):
    return any(ru[i:] + ru[:i] == rv for i in range(len(ru)))


def finalcheck(rep, v, max_factors=DEFAULT_MAX_FACTORS):
    """Decide whether y = kappa(core fixed point) is ultimately periodic with
    a period conjugate to v; return the canonical form, or None.

    Phase semantics: a recurrent 2|v|-window B of y matches the phases f with
    (vvv)[f:f+2|v|] == kappa(B); a primitive v leaves at most one. Windows
    2|v| apart must share a phase for the junction to read as a whole copy of
    v or nothing, and recurrent 4|v|-windows enumerate exactly those adjacent
    pairs, so consistency is a union-find over equalities plus a domain
    intersection per group. A consistent assignment makes everything past the
    recurrence index literally periodic; the cut scan finds the onset."""
    v = primitive_root(as_word(v))
    q = len(v)
    engine = FactorEngine(rep.tau)
    seed = (rep.seed,)
    f2_all, f2_rec, i2 = _recurrent_interned(
        engine, seed, 2 * q, max_factors, DEFAULT_MAX_WORD)
    f4_all, f4_rec, i4 = _recurrent_interned(
        engine, seed, 4 * q, max_factors, DEFAULT_MAX_WORD)
    vvv = v * 3

    dom = {}
    for b in f2_rec:
        img = rep.kappa(engine.decode(b))
        dom[b] = {f for f in range(q) if vvv[f:f + 2 * q] == img}
        if not dom[b]:
            return None

    parent = {b: b for b in f2_rec}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for w in f4_rec:
        left, right = w[:2 * q], w[2 * q:]
        if left not in parent or right not in parent:
            raise InternalCheckError("half of a recurrent window not recurrent")
        parent[find(left)] = find(right)

    groups = {}
    for b in f2_rec:
        groups.setdefault(find(b), []).append(b)
    for members in groups.values():
        shared = set(dom[members[0]])
        for b in members[1:]:
            shared &= dom[b]
        if not shared:
            return None

    cut_bound = max(i2, i4)
    y = rep.expand_image(cut_bound + 8 * q)
    for c in range(cut_bound + 1):
        tail = y[c:]
        period = tail[:q]
        if all(tail[i] == period[i % q] for i in range(len(tail))):
            return canonicalize_up(y[:c], period)
    raise InternalCheckError("consistent phases but no periodic cut found")
