"""Normalization of a morphic sequence into a coding of a clean fixed point.

The pipeline turns (sigma, phi, seed letter a) with sigma prolongable at a
into tau, kappa, d0 such that kappa is a coding, tau is non-erasing with
stable image letter sets and single-component decomposition, and
kappa(tau^omega(d0)) equals the limit of phi(sigma^n(a)).

Certified property names:
  P1      decomposition power of the incidence matrix is 1
  P2      letters(tau(b)) == letters(tau^2(b)) for every b
  P3      alphabet is exactly {seed} union letters(tau(seed))
  P4      tau is non-erasing and prolongable at the seed
  CODING  kappa maps every letter to a single letter
"""

from dataclasses import dataclass

from .errors import (
    BoundedImageError,
    InternalCheckError,
    PreconditionError,
)
from .matrices import (
    component_decomposition,
    incidence_matrix,
    letterset_orbit,
    satisfies_p2_at,
)
from .words import (
    Morphism,
    compose,
    expand_fixed_point,
    is_prolongable,
    power,
)

P1, P2, P3, P4, CODING = "P1", "P2", "P3", "P4", "CODING"
ALL_PROPERTIES = frozenset({P1, P2, P3, P4, CODING})


def minimal_p1_p2_exponent(sigma):
    """Smallest e with: e a multiple of the decomposition power, and the image
    letter sets of sigma^e stable (so sigma^e has properties P1 and P2)."""
    dec = component_decomposition(incidence_matrix(sigma))
    orbit = letterset_orbit(sigma)
    p = dec.p
    limit = p * (orbit.preperiod + orbit.period + 1)
    e = p
    while e <= limit:
        if satisfies_p2_at(orbit, e):
            return e
        e += p
    raise InternalCheckError("no valid exponent within orbit bound")


def normalize_p1_p2(sigma):
    """(e, sigma^e) with e = p * |A| scaled by the smallest integer making the
    image letter sets of sigma^e stable.

    p * |A| alone is not always enough: with {a->b, b->c, c->ab} the letters of
    sigma^3(a) and sigma^6(a) still differ, so the candidate is verified against
    the letter-set orbit and escalated by integer multiples when it fails.
    """
    dec = component_decomposition(incidence_matrix(sigma))
    orbit = letterset_orbit(sigma)
    base = dec.p * len(sigma.letters)
    m = 1
    limit = orbit.preperiod + orbit.period + 1
    while not satisfies_p2_at(orbit, base * m):
        m += 1
        if m > limit:
            raise InternalCheckError("stabilization escalation exceeded orbit bound")
    e = base * m
    return e, power(sigma, e)


def satisfies_p2(sigma):
    orbit = letterset_orbit(sigma)
    return satisfies_p2_at(orbit, 1)


def reachable_letters(sigma, seeds):
    """Closure of seeds under b -> letters(sigma(b))."""
    out = set()
    todo = list(seeds)
    while todo:
        b = todo.pop()
        if b in out:
            continue
        out.add(b)
        todo.extend(set(sigma.image(b)) - out)
    return frozenset(out)


def restrict_to_reachable(sigma, phi, seeds):
    keep = reachable_letters(sigma, seeds)
    return sigma.restrict(keep), phi.restrict(keep), keep


def _delete_letters(word, gone):
    return tuple(c for c in word if c not in gone)


def phi_dead_letters(sigma, phi):
    """Letters whose entire sigma-future is erased by phi: phi(sigma^k(d)) = e
    for all k >= 0. Computed on the reachability closure, no stability needed."""
    dead = set()
    for d in sigma.letters:
        if phi.image(d):
            continue
        closure = reachable_letters(sigma, (d,))
        if all(not phi.image(c) for c in closure):
            dead.add(d)
    return frozenset(dead)


def eliminate_erasing(sigma, phi, a):
    """Remove erasing letters, folding their one-step contribution into phi.

    Requires stable letter sets (P2), under which erasing letters are exactly
    the mortal ones and die in a single step; then for the fixed point x,
    sigma(x) = x makes (delete o sigma, phi o sigma) exact: the new fixed point
    is delete(x) and its phi o sigma image is phi(x).
    """
    if not satisfies_p2(sigma):
        raise PreconditionError("eliminate_erasing: image letter sets not stable")
    gone = sigma.erasing_letters()
    if not gone:
        return sigma, phi, a
    if a in gone:
        raise BoundedImageError("seed letter is erasing")
    keep = sigma.domain - gone
    new_sigma = Morphism({b: _delete_letters(sigma.image(b), gone) for b in keep})
    new_phi = Morphism(
        {b: phi(sigma.image(b)) for b in keep}, codomain=phi.codomain)
    if not new_sigma.is_non_erasing:
        raise InternalCheckError("erasing letters not mortal in one step")
    return new_sigma, new_phi, a


def eliminate_phi_dead(sigma, phi, a):
    """Remove letters invisible to phi forever; phi is unchanged on the rest.

    The dead set is closed under sigma, so deleting it commutes with sigma and
    the new fixed point is delete(x) with the same phi-image."""
    dead = phi_dead_letters(sigma, phi)
    if not dead:
        return sigma, phi, a
    if a in dead:
        raise BoundedImageError("the image sequence is empty from the seed on")
    keep = sigma.domain - dead
    new_sigma = Morphism({b: _delete_letters(sigma.image(b), dead) for b in keep})
    new_phi = phi.restrict(keep)
    return new_sigma, new_phi, a


def recurrent_letter_set(sigma, a):
    """Letters occurring infinitely often in the fixed point at a, under P2:
    with sigma(a) = a u, these are exactly letters(sigma(u))."""
    img = sigma.image(a)
    if not (len(img) >= 1 and img[0] == a):
        raise PreconditionError("recurrent_letter_set: sigma(a) must start with a")
    return frozenset(c for b in img[1:] for c in sigma.image(b))


def image_is_infinite(sigma, phi, a):
    """Whether lim phi(sigma^n(a)) is an infinite word (needs P2)."""
    rec = recurrent_letter_set(sigma, a)
    return any(phi.image(c) for c in rec)


def _phi_lengths_after(sigma, phi, k):
    """|phi(sigma^k(b))| for every b, from integer incidence powers."""
    mat = incidence_matrix(sigma).pow(k)
    letters = mat.letters
    weights = [len(phi.image(c)) for c in letters]
    return {
        b: sum(weights[i] * mat.rows[i][j] for i in range(len(letters)))
        for j, b in enumerate(letters)}


MAX_PHI_COMPOSITIONS = 8
MAX_POWER_DOUBLINGS = 24


def achieve_growth_inequalities(sigma, phi, a):
    """Replace (sigma, phi) by (sigma^k, phi o sigma^j) so that phi' never
    erases and |phi'(sigma'(b))| >= |phi'(b)| for every letter.

    Both replacements fix the fixed point x and its phi-image. Candidates are
    verified with incidence arithmetic and escalated until they hold; bounded
    letters stabilize to fixed words, so a valid (j, k) always exists.
    """
    cap = len(sigma.letters) + MAX_PHI_COMPOSITIONS
    j = 0
    cur = phi
    while not cur.is_non_erasing or not _growth_candidate(sigma, cur):
        j += 1
        if j > cap:
            raise InternalCheckError("growth inequalities unobtainable by composition")
        cur = compose(cur, sigma)
    k = _growth_candidate(sigma, cur)
    new_sigma = power(sigma, k)
    new_phi = cur
    if not is_prolongable(new_sigma, a):
        raise InternalCheckError("power lost prolongability")
    lengths_now = {b: len(new_phi.image(b)) for b in new_sigma.letters}
    after = _phi_lengths_after(new_sigma, new_phi, 1)
    if any(after[b] < lengths_now[b] for b in new_sigma.letters):
        raise InternalCheckError("growth inequality verification failed")
    return new_sigma, new_phi


def _growth_candidate(sigma, phi):
    """The smallest power k with |phi(sigma^k(b))| >= |phi(b)| for all b, or
    None. Small k keeps the later slot construction small, so scan upward
    before falling back to doubling."""
    targets = {b: len(phi.image(b)) for b in sigma.letters}
    ceiling = max(1, max(targets.values(), default=1))
    candidates = list(range(1, ceiling + 1))
    k = ceiling
    for _ in range(MAX_POWER_DOUBLINGS):
        k *= 2
        candidates.append(k)
    for k in candidates:
        reached = _phi_lengths_after(sigma, phi, k)
        if all(reached[b] >= targets[b] for b in sigma.letters):
            return k
    return None


def to_coding(sigma, phi, a):
    """Cobham slot construction: from non-erasing sigma and phi with
    |phi(sigma(b))| >= |phi(b)| >= 1, build (tau, kappa, d0) with kappa a
    coding and kappa(tau^omega(d0)) = phi(sigma^omega(a)).

    One slot (b, i) per position of phi(b); the slot word of sigma(b) is split
    over the slots of b, the first slot absorbing the surplus."""
    if not sigma.is_non_erasing or not phi.is_non_erasing:
        raise PreconditionError("to_coding: erasing input")
    if not is_prolongable(sigma, a):
        raise PreconditionError("to_coding: seed not prolongable")

    def slot(b, i):
        return f"({b},{i})"

    tau_images = {}
    kappa_images = {}
    for b in sigma.letters:
        blocks = [slot(c, i) for c in sigma.image(b)
                  for i in range(len(phi.image(c)))]
        n_slots = len(phi.image(b))
        if len(blocks) < n_slots:
            raise PreconditionError(f"to_coding: image of {b!r} too short")
        head = len(blocks) - n_slots + 1
        tau_images[slot(b, 0)] = tuple(blocks[:head])
        for i in range(1, n_slots):
            tau_images[slot(b, i)] = (blocks[head + i - 1],)
        for i in range(n_slots):
            kappa_images[slot(b, i)] = (phi.image(b)[i],)
    tau = Morphism(tau_images)
    kappa = Morphism(kappa_images, codomain=phi.codomain)
    d0 = slot(a, 0)
    if not is_prolongable(tau, d0):
        raise InternalCheckError("to_coding: derived seed not prolongable")
    for b in sigma.letters:
        spelled = []
        for i in range(len(phi.image(b))):
            spelled.extend(kappa(tau.image(slot(b, i))))
        if tuple(spelled) != phi(sigma.image(b)):
            raise InternalCheckError("to_coding: slot identity broken")
    return tau, kappa, d0


@dataclass(frozen=True)
class SubstitutiveRepresentation:
    """y = kappa(tau^omega(seed)) with the certified properties of the module
    docstring; kappa maps into the original output alphabet."""

    tau: Morphism
    kappa: Morphism
    seed: str
    certified: frozenset

    def verify(self):
        tau, kappa, seed = self.tau, self.kappa, self.seed
        orbit = letterset_orbit(tau)
        if component_decomposition(incidence_matrix(tau)).p != 1:
            raise InternalCheckError("verify: P1 fails")
        if not satisfies_p2_at(orbit, 1):
            raise InternalCheckError("verify: P2 fails")
        if tau.domain != {seed} | set(tau.image(seed)):
            raise InternalCheckError("verify: P3 fails")
        if not (tau.is_non_erasing and is_prolongable(tau, seed)):
            raise InternalCheckError("verify: P4 fails")
        if not kappa.is_coding or kappa.domain != tau.domain:
            raise InternalCheckError("verify: kappa not a coding over the alphabet")
        return True

    def expand_core(self, n):
        return expand_fixed_point(self.tau, self.seed, n)

    def expand_image(self, n):
        return self.kappa(self.expand_core(n))


def _assert_p1_p2(sigma, where):
    if component_decomposition(incidence_matrix(sigma)).p != 1:
        raise InternalCheckError(f"{where}: P1 lost")
    if not satisfies_p2(sigma):
        raise InternalCheckError(f"{where}: P2 lost")


def substitutive_representation(sigma, phi, a, fidelity=400):
    """Full normalization pipeline for y = lim phi(sigma^n(a)), a prolongable.

    Raises BoundedImageError when y is finite (no infinite limit word exists),
    and verifies the result against a directly expanded prefix of y."""
    if not is_prolongable(sigma, a):
        raise PreconditionError("substitutive_representation: seed not prolongable")
    original = (sigma, phi, a)

    e = minimal_p1_p2_exponent(sigma)
    cur_sigma = power(sigma, e)
    cur_phi = phi
    cur_sigma, cur_phi, _ = restrict_to_reachable(cur_sigma, cur_phi, (a,))

    # alternate the two eliminations until neither applies; each round shrinks
    # the alphabet, and both preserve P1/P2
    while True:
        if not cur_sigma.is_non_erasing:
            cur_sigma, cur_phi, a = eliminate_erasing(cur_sigma, cur_phi, a)
        elif phi_dead_letters(cur_sigma, cur_phi):
            cur_sigma, cur_phi, a = eliminate_phi_dead(cur_sigma, cur_phi, a)
        else:
            break
        if len(cur_sigma.image(a)) < 2:
            raise BoundedImageError("fixed point collapses to a finite word")
    _assert_p1_p2(cur_sigma, "after elimination")

    if not image_is_infinite(cur_sigma, cur_phi, a):
        raise BoundedImageError("image sequence converges to a finite word")

    cur_sigma, cur_phi = achieve_growth_inequalities(cur_sigma, cur_phi, a)
    tau, kappa, d0 = to_coding(cur_sigma, cur_phi, a)

    e2 = minimal_p1_p2_exponent(tau)
    tau = power(tau, e2)
    tau, kappa, _ = restrict_to_reachable(tau, kappa, (d0,))

    rep = SubstitutiveRepresentation(tau, kappa, d0, ALL_PROPERTIES)
    rep.verify()
    if fidelity:
        _check_fidelity(rep, original, fidelity)
    return rep


def _check_fidelity(rep, original, n):
    sigma, phi, a = original
    want = _direct_image_prefix(sigma, phi, a, n)
    got = rep.expand_image(len(want))
    if got != want:
        raise InternalCheckError("representation disagrees with direct expansion")


def _direct_image_prefix(sigma, phi, a, n):
    """Prefix of lim phi(sigma^k(a)) of length up to n, by direct expansion."""
    m = n
    for _ in range(24):
        x = expand_fixed_point(sigma, a, m)
        y = phi(x)
        if len(y) >= n:
            return y[:n]
        m *= 2
    return y
