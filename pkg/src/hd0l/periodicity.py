"""Ultimate periodicity decisions for coded fixed points of substitutions.

Three layers: a bounded complexity oracle for primitive components, the
all-growing case built on it, and the reduction of mixed alphabets through
the bounded-runs / unbounded-runs dichotomy for the non-growing letters.
"""

import math
from dataclasses import dataclass

from .errors import InternalCheckError, PreconditionError, ResourceLimitError
from .factors import FactorEngine, finalcheck, lang_eq_periodic
from .matrices import (
    NULL,
    PRIMITIVE,
    classify_letters,
    component_decomposition,
    incidence_matrix,
    is_primitive,
)
from .normalization import (
    ALL_PROPERTIES,
    CODING,
    P4,
    SubstitutiveRepresentation,
    reachable_letters,
    substitutive_representation,
)
from .words import (
    Morphism,
    UltimatelyPeriodicWord,
    compose,
    expand_fixed_point,
    is_prolongable,
    minimal_period,
    power,
    primitive_root,
    word_str,
)

APERIODIC_SUB_COMPONENT = "AperiodicSubComponent"
PERIOD_LANGUAGE_MISMATCH = "PeriodLanguageMismatch"
FINALCHECK_FAILED = "FinalcheckFailed"
BOUNDED_IMAGE = "BoundedImage"
DIVERGENT_LIMIT = "DivergentLimit"
CLASS_LIMITS_DIFFER = "ClassLimitsDiffer"

CASE_BOUNDED_BLOCKS = 2
CASE_FLANK = 3


@dataclass(frozen=True)
class Limits:
    """Resource configuration for the decision procedures.

    primitive_bound overrides the complexity-scan bound N of the primitive
    oracle outright; otherwise N is the formula bound capped at
    primitive_hard_cap (capping is recorded as an uncertified negative)."""

    primitive_bound: int | None = None
    primitive_hard_cap: int = 600
    small_scan: int = 64
    pansiot_rounds: int = 16
    pansiot_word_cap: int = 500_000
    max_triples: int = 20_000
    max_factors: int = 200_000
    max_chain: int = 100_000
    couple_power_cap: int = 256
    table_rounds: int = 2048
    table_entry_cap: int = 100_000
    class_count_cap: int = 4096


DEFAULT_LIMITS = Limits()


@dataclass(frozen=True)
class DecisionOutcome:
    """Verdict on ultimate periodicity of an image sequence. A positive
    verdict always carries the canonical form and passed the alignment
    check; certified goes false only on negatives that rest on a capped
    oracle bound."""

    periodic: bool
    up: UltimatelyPeriodicWord | None
    certified: bool
    diagnostic: str | None
    trace: tuple


def _yes(up, trace):
    return DecisionOutcome(True, up, True, None, tuple(trace))


def _no(diagnostic, trace, certified=True):
    return DecisionOutcome(False, None, certified, diagnostic, tuple(trace))


@dataclass(frozen=True)
class SubSubstitution:
    """Restriction of a substitution to a principal primitive component,
    with a letter whose first-letter cycle makes the exponent-th power
    prolongable there."""

    letters: tuple
    sigma: Morphism
    seed: str
    exponent: int


def _first_letter_cycle(first):
    cur = min(first)
    seen = {}
    path = []
    while cur not in seen:
        seen[cur] = len(path)
        path.append(cur)
        cur = first[cur]
    return path[seen[cur]:]


def _power_image_length(sigma, k, a):
    mk = incidence_matrix(sigma).pow(k)
    j = mk.letters.index(a)
    return sum(row[j] for row in mk.rows)


def make_sub_substitutions(sigma):
    """One SubSubstitution per principal primitive component.

    Within a closed component the first letters of images form a functional
    graph, so some letter a_i lies on a cycle of length k_i <= |component|
    and sigma_i^{k_i}(a_i) starts with a_i. The shared exponent is the lcm
    of the k_i, which every component accepts."""
    dec = component_decomposition(incidence_matrix(sigma))
    picks = []
    for blk in dec.blocks:
        if not blk.principal:
            continue
        if blk.kind == NULL:
            raise InternalCheckError(
                "principal component erases everything (null kind)")
        if blk.kind != PRIMITIVE:
            continue  # closed unit component: a fixed letter, nothing to raise
        sub = sigma.restrict(blk.letters)
        first = {b: sub.image(b)[0] for b in blk.letters}
        cycle = _first_letter_cycle(first)
        picks.append((blk.letters, sub, min(cycle), len(cycle)))
    k = 1
    for _, _, _, k_i in picks:
        k = math.lcm(k, k_i)
    subs = []
    for letters, sub, a_i, _ in picks:
        if _power_image_length(sub, k, a_i) < 2:
            raise InternalCheckError(
                f"component power at {a_i!r} stays a single letter")
        subs.append(SubSubstitution(letters, sub, a_i, k))
    return k, subs


@dataclass(frozen=True)
class PrimitiveVerdict:
    periodic: bool
    period: tuple | None
    certified: bool
    bound: int
    formula_bound: int


def primitive_periodicity(tau_i, a_i, kappa, limits=None, exponent=1):
    """Decide pure periodicity of the coded fixed point of a primitive
    substitution (of tau_i^exponent at a_i; factor sets do not depend on the
    exponent, so closures run on tau_i itself).

    The coded sequence is uniformly recurrent, so it is periodic iff its
    factor count satisfies count(n) <= n for some n, and that condition is
    monotone in n (a witness forces a pure period <= n, and count(n) equals
    the period length from there on), so probing geometrically and then the
    single bound N is exhaustive up to N. Periodic verdicts extract the
    period from a prefix and re-certify it; the aperiodic verdict is
    certified only when N honors the formula bound."""
    limits = limits or DEFAULT_LIMITS
    if not is_primitive(incidence_matrix(tau_i).support()):
        raise PreconditionError("primitive_periodicity: not primitive")
    letters = tau_i.letters
    formula = len(letters) * (1 + tau_i.max_image_len()) ** (len(letters) + 2)
    if limits.primitive_bound is not None:
        bound = limits.primitive_bound
    else:
        bound = min(formula, limits.primitive_hard_cap)
    certified = bound >= formula
    eng = FactorEngine(tau_i)
    ns = []
    n = 1
    while n <= min(bound, limits.small_scan):
        ns.append(n)
        n *= 2
    if not ns or ns[-1] != bound:
        ns.append(bound)
    witness = None
    for n in ns:
        # a long sample gives a sound lower bound on the coded factor count
        # at a fraction of the closure cost; the exact closure only runs for
        # lengths the sample cannot rule out, which is where it is small
        floor = eng.coded_window_floor(kappa, (a_i,), n, max(20_000, 80 * n))
        if floor > n:
            continue
        facs = eng.factors((a_i,), n, limits.max_factors)
        count = len({kappa(eng.decode(w)) for w in facs})
        if count <= n:
            witness = n
            break
    if witness is None:
        return PrimitiveVerdict(False, None, certified, bound, formula)
    tau_pow = tau_i if exponent == 1 else power(tau_i, exponent)
    if not is_prolongable(tau_pow, a_i):
        raise PreconditionError("primitive_periodicity: power not prolongable")
    prefix = kappa(expand_fixed_point(tau_pow, a_i, 3 * witness))
    v = prefix[:minimal_period(prefix)]
    rep = SubstitutiveRepresentation(
        tau_pow, kappa.restrict(tau_pow.domain), a_i, frozenset({P4, CODING}))
    up = finalcheck(rep, v, limits.max_factors)
    if up is None or up.preperiod:
        raise InternalCheckError(
            "primitive component: extracted period failed certification")
    return PrimitiveVerdict(True, up.period, True, bound, formula)


def _confirm_prefix(rep, up):
    # belt and braces behind every positive verdict: re-expand and compare
    horizon = (len(up.preperiod) + 20 * len(up.period)
               + len(rep.tau.image(rep.seed)))
    if rep.expand_image(horizon) != up.prefix(horizon):
        raise InternalCheckError(
            "confirmed period does not match the expanded prefix")


def decide_growing(rep, limits=None, trace=None):
    """Decide ultimate periodicity of the image sequence when every letter
    of the core substitution grows.

    Each principal component carries a minimal sub-system whose coded
    factors all recur in the tail of the image; so the image can only be
    ultimately periodic if every component's coded sequence is periodic and
    all their period languages agree, and that shared period is then the
    only candidate left for the alignment check."""
    limits = limits or DEFAULT_LIMITS
    trace = list(trace or ())
    if not ALL_PROPERTIES <= rep.certified:
        raise PreconditionError("decide_growing: representation not certified")
    if classify_letters(rep.tau).bounded:
        raise PreconditionError("decide_growing: non-growing letters present")
    k, subs = make_sub_substitutions(rep.tau)
    if not subs:
        raise InternalCheckError("no principal component on a growing alphabet")
    trace.append(
        f"growing case: {len(subs)} principal component(s), exponent {k}")
    periods = []
    for sub in subs:
        verdict = primitive_periodicity(
            sub.sigma, sub.seed, rep.kappa, limits, exponent=sub.exponent)
        label = "{" + ",".join(sub.letters) + "}"
        if not verdict.periodic:
            note = "" if verdict.certified else (
                f" (scan capped at {verdict.bound} below the formula bound"
                f" {verdict.formula_bound}; uncertified)")
            trace.append(
                f"component {label}: factor count exceeds n for every"
                f" n <= {verdict.bound}{note}")
            return _no(APERIODIC_SUB_COMPONENT, trace,
                       certified=verdict.certified)
        trace.append(
            f"component {label}: periodic image, period {word_str(verdict.period)}")
        periods.append(verdict.period)
    base = periods[0]
    for other in periods[1:]:
        if not lang_eq_periodic(base, other):
            trace.append(
                f"period languages differ: {word_str(base)}"
                f" vs {word_str(other)}")
            return _no(PERIOD_LANGUAGE_MISMATCH, trace)
    up = finalcheck(rep, base, limits.max_factors)
    if up is None:
        trace.append(
            f"candidate period {word_str(base)} rejected by the alignment check")
        return _no(FINALCHECK_FAILED, trace)
    _confirm_prefix(rep, up)
    trace.append(f"alignment check passed: {up}")
    return _yes(up, trace)


@dataclass(frozen=True)
class Case3Witness:
    """sigma^exponent maps the growing letter to an image where one side of
    some occurrence of the letter is a non-empty all-non-growing word."""

    exponent: int
    letter: str
    side: str
    flank: tuple


@dataclass(frozen=True)
class PansiotCase:
    """Outcome of the dichotomy: bounded non-growing runs come with the
    re-presentation over a growing alphabet and its recovery coding."""

    case: int
    witness: Case3Witness | None = None
    rep: SubstitutiveRepresentation | None = None
    chi: Morphism | None = None


def _segment(word, growing):
    """Split as (leading non-growing run, [(growing letter, following run)])."""
    nu = []
    i = 0
    while i < len(word) and word[i] not in growing:
        nu.append(word[i])
        i += 1
    segments = []
    while i < len(word):
        h = word[i]
        i += 1
        run = []
        while i < len(word) and word[i] not in growing:
            run.append(word[i])
            i += 1
        segments.append((h, tuple(run)))
    return tuple(nu), segments


def _spell(triple):
    left, g, right = triple
    return left + (g,) + right


def _triple_image(sigma, triple, growing):
    """Image units of a flanked letter: segment the image word, the leading
    non-growing run going to the first unit."""
    image = sigma(_spell(triple))
    nu, segments = _segment(image, growing)
    if not segments:
        raise InternalCheckError("image of a growing letter lost its growth")
    head_h, head_run = segments[0]
    out = [(nu, head_h, head_run)]
    for h, run in segments[1:]:
        out.append(((), h, run))
    return tuple(out)


class _TripleClosure:
    """Breadth-first closure of the flanked-letter alphabet, one level per
    advance() call so the caller can interleave it with the flank scan."""

    def __init__(self, sigma, a, growing, cap):
        self.sigma = sigma
        self.growing = growing
        self.cap = cap
        start = ((), a, ())
        self.seen = {start}
        self.frontier = [start]

    def advance(self):
        nxt = []
        for triple in self.frontier:
            for unit in _triple_image(self.sigma, triple, self.growing):
                if unit not in self.seen:
                    self.seen.add(unit)
                    if len(self.seen) > self.cap:
                        raise ResourceLimitError(
                            "flanked-letter closure exceeded cap")
                    nxt.append(unit)
        self.frontier = nxt
        return not nxt


def _apply_capped(sigma, word, cap):
    total = sum(len(sigma.images[c]) for c in word)
    if total > cap:
        raise ResourceLimitError("image word exceeds the scan cap")
    return sigma(word)


def _flank_scan(word, b, growing, m):
    for pos, c in enumerate(word):
        if c != b:
            continue
        suffix = word[pos + 1:]
        if suffix and not any(d in growing for d in suffix):
            return Case3Witness(m, b, "right", suffix)
        prefix = word[:pos]
        if prefix and not any(d in growing for d in prefix):
            return Case3Witness(m, b, "left", prefix)
    return None


def pansiot_classify(sigma, a, limits=None):
    """Dichotomy for a fixed point with non-growing letters: either the
    non-growing runs are bounded (case 2: returns the growing
    re-presentation) or some power of sigma maps a growing letter b to an
    image where everything on one side of an occurrence of b is non-growing
    and non-empty (case 3: returns the witness). Exactly one side holds, but
    which power exhibits case 3 is not known in advance, so the scan over
    rising powers interleaves with rounds of the case-2 closure and returns
    whichever terminates."""
    limits = limits or DEFAULT_LIMITS
    classes = classify_letters(sigma)
    if not classes.bounded:
        raise PreconditionError("pansiot_classify: every letter grows")
    if not is_prolongable(sigma, a):
        raise PreconditionError("pansiot_classify: not prolongable at the seed")
    growing = classes.growing
    targets = sorted(b for b in reachable_letters(sigma, (a,)) if b in growing)
    words = {b: (b,) for b in targets}
    closure = _TripleClosure(sigma, a, growing, limits.max_triples)
    for m in range(1, limits.pansiot_rounds + 1):
        for b in targets:
            words[b] = _apply_capped(sigma, words[b], limits.pansiot_word_cap)
            wit = _flank_scan(words[b], b, growing, m)
            if wit is not None:
                return PansiotCase(CASE_FLANK, witness=wit)
        if closure.advance():
            rep, chi = convert_case2_to_growing(sigma, a, limits)
            return PansiotCase(CASE_BOUNDED_BLOCKS, rep=rep, chi=chi)
    raise ResourceLimitError("pansiot_classify: power/closure cap exceeded")


def convert_case2_to_growing(sigma, a, limits=None):
    """Re-present the fixed point at a over an all-growing alphabet with a
    letter-to-letter decoder back onto it.

    Three steps. Close the flanked-letter alphabet: units <left|g|right>
    with one growing letter each, images read off the segmentation of the
    unit's spelled image (the decoder identity spell(tau(T)) = sigma(spell(T))
    is asserted unit by unit). Stabilize: the first-unit chain is eventually
    cyclic, giving a unit that tau^K prolongs; K is then raised until every
    unit's spelled image at least doubles. Refine: one letter per spelled
    position of each unit, tau^K-images chunked into consecutive runs of at
    least two refined letters each (the doubling makes that possible), so
    every refined letter grows and the position coding gamma(<T>:i) =
    spell(T)[i] carries the refined fixed point onto the original one."""
    limits = limits or DEFAULT_LIMITS
    classes = classify_letters(sigma)
    growing = classes.growing
    if not sigma.is_non_erasing or not is_prolongable(sigma, a):
        raise PreconditionError(
            "convert_case2_to_growing: needs a non-erasing prolongable seed")
    if a not in growing:
        raise PreconditionError("convert_case2_to_growing: seed does not grow")

    start = ((), a, ())
    images = {}
    todo = [start]
    while todo:
        triple = todo.pop()
        if triple in images:
            continue
        img = _triple_image(sigma, triple, growing)
        images[triple] = img
        for unit in img:
            if unit not in images:
                todo.append(unit)
        if len(images) > limits.max_triples:
            raise InternalCheckError(
                "convert: closure exceeded cap on a bounded-runs input")
    for triple, img in images.items():
        spelled = ()
        for unit in img:
            spelled += _spell(unit)
        if spelled != sigma(_spell(triple)):
            raise InternalCheckError("convert: decoder does not commute")

    first = {t: images[t][0] for t in images}
    cur = start
    pos = {start: 0}
    path = [start]
    while True:
        cur = first[cur]
        if cur in pos:
            seed_triple = cur
            cycle_len = len(path) - pos[cur]
            break
        pos[cur] = len(path)
        path.append(cur)

    matrix = incidence_matrix(sigma)
    K = cycle_len
    while True:
        mk = matrix.pow(K)
        lens = {c: sum(row[j] for row in mk.rows)
                for j, c in enumerate(mk.letters)}
        if all(sum(lens[c] for c in _spell(t)) >= 2 * len(_spell(t))
               for t in images):
            break
        K += cycle_len
        if K > 10_000 * cycle_len:
            raise ResourceLimitError("convert: doubling power out of reach")

    rho = {}
    for t in images:
        word = (t,)
        for _ in range(K):
            word = tuple(u for v in word for u in images[v])
            if len(word) > limits.pansiot_word_cap:
                raise ResourceLimitError("convert: raised image exceeds cap")
        rho[t] = word

    tname = {}
    used = set()
    for t in sorted(images):
        name = "<{}|{}|{}>".format(".".join(t[0]), t[1], ".".join(t[2]))
        while name in used:
            name += "'"
        used.add(name)
        tname[t] = name

    def slots(t):
        return [f"{tname[t]}:{i}" for i in range(len(_spell(t)))]

    tau_images = {}
    gamma_images = {}
    for t in images:
        spelled = _spell(t)
        refined_run = [s for u in rho[t] for s in slots(u)]
        n = len(spelled)
        total = len(refined_run)
        if total < 2 * n:
            raise InternalCheckError("convert: doubling check failed to hold")
        size, rem = divmod(total, n)
        idx = 0
        for i, (nm, letter) in enumerate(zip(slots(t), spelled)):
            take = size + (1 if i < rem else 0)
            tau_images[nm] = tuple(refined_run[idx:idx + take])
            gamma_images[nm] = (letter,)
            idx += take

    tau_out = Morphism(tau_images)
    gamma_out = Morphism(gamma_images, codomain=sigma.domain)
    seed_name = f"{tname[seed_triple]}:0"
    keep = reachable_letters(tau_out, (seed_name,))
    tau_out = tau_out.restrict(keep)
    gamma_out = Morphism(
        {b: gamma_images[b] for b in keep}, codomain=sigma.domain)
    if not is_prolongable(tau_out, seed_name):
        raise InternalCheckError("convert: refined seed not prolongable")
    if classify_letters(tau_out).bounded:
        raise InternalCheckError("convert: a refined letter does not grow")
    check = min(400, 4 * len(tau_out.letters) + 40)
    if gamma_out(expand_fixed_point(tau_out, seed_name, check)) != \
            expand_fixed_point(sigma, a, check):
        raise InternalCheckError("convert: decoded fixed point drifts")
    rep = SubstitutiveRepresentation(
        tau_out, gamma_out, seed_name, frozenset({P4, CODING}))
    return rep, gamma_out


def case3_period_candidate(sigma, witness, limits=None):
    """Candidate period word from a flank witness: iterate rho = sigma^m on
    the non-growing flank until the word repeats (boundedness forces it),
    then concatenate one full cycle in the order the copies sit along the
    fixed point. On the right side the copies march away from the letter in
    ascending powers; on the left side they read left to right in descending
    powers, so the cycle is reversed."""
    limits = limits or DEFAULT_LIMITS
    m = witness.exponent
    seen = {witness.flank: 0}
    chain = [witness.flank]
    cur = witness.flank
    while True:
        for _ in range(m):
            cur = sigma(cur)
        if cur in seen:
            i = seen[cur]
            break
        seen[cur] = len(chain)
        chain.append(cur)
        if len(chain) > limits.max_chain:
            raise ResourceLimitError("case-3 flank orbit exceeds cap")
    cycle = chain[i:]
    if witness.side == "left":
        cycle = list(reversed(cycle))
    out = ()
    for w in cycle:
        out += w
    if not out:
        raise InternalCheckError("case-3 flank vanished under a non-erasing map")
    return out


def decide_substitutive(rep, limits=None, fidelity=400):
    """Top dispatcher for a certified representation: all letters growing
    goes straight to the component analysis; otherwise the dichotomy either
    produces the one possible period for the alignment check (unbounded
    runs) or re-presents the sequence over a growing alphabet and recurses
    into the growing case (bounded runs)."""
    limits = limits or DEFAULT_LIMITS
    if not ALL_PROPERTIES <= rep.certified:
        raise PreconditionError(
            "decide_substitutive: representation not certified")
    trace = []
    if not classify_letters(rep.tau).bounded:
        return decide_growing(rep, limits, trace)
    case = pansiot_classify(rep.tau, rep.seed, limits)
    if case.case == CASE_FLANK:
        wit = case.witness
        trace.append(
            f"non-growing flank at power {wit.exponent}:"
            f" letter {wit.letter}, {wit.side} side")
        candidate = case3_period_candidate(rep.tau, wit, limits)
        v0 = primitive_root(rep.kappa(candidate))
        trace.append(f"candidate period from the flank cycle: {word_str(v0)}")
        up = finalcheck(rep, v0, limits.max_factors)
        if up is None:
            trace.append("candidate rejected by the alignment check")
            return _no(FINALCHECK_FAILED, trace)
        _confirm_prefix(rep, up)
        trace.append(f"alignment check passed: {up}")
        return _yes(up, trace)
    trace.append(
        f"bounded non-growing runs: recoded over"
        f" {len(case.rep.tau.letters)} growing letters")
    phi2 = compose(rep.kappa, case.chi)
    rep2 = substitutive_representation(
        case.rep.tau, phi2, case.rep.seed, fidelity)
    return decide_growing(rep2, limits, trace)
