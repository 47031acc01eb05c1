"""Incidence matrices, primitivity, component decomposition, letter growth classes.

Counting matrices keep exact (arbitrary precision) integer entries; reachability
questions run on boolean support matrices stored as per-row bitmasks.
"""

from dataclasses import dataclass
from math import gcd

from .errors import InternalCheckError, PreconditionError, ResourceLimitError


@dataclass(frozen=True)
class IncidenceMatrix:
    """rows[i][j] = number of occurrences of letters[i] in the image of letters[j]."""

    letters: tuple
    rows: tuple

    @property
    def n(self):
        return len(self.letters)

    def entry(self, a, b):
        i = self.letters.index(a)
        j = self.letters.index(b)
        return self.rows[i][j]

    def matmul(self, other):
        if self.letters != other.letters:
            raise PreconditionError("matmul: letter orders differ")
        n = self.n
        bt = tuple(zip(*other.rows))
        rows = tuple(
            tuple(sum(ra[k] * cb[k] for k in range(n)) for cb in bt)
            for ra in self.rows)
        return IncidenceMatrix(self.letters, rows)

    def pow(self, e):
        if e < 0:
            raise PreconditionError("pow: negative exponent")
        result = identity_matrix(self.letters)
        base = self
        while e:
            if e & 1:
                result = result.matmul(base)
            e >>= 1
            if e:
                base = base.matmul(base)
        return result

    def support(self):
        masks = tuple(
            sum(1 << j for j, v in enumerate(row) if v) for row in self.rows)
        return SupportMatrix(self.letters, masks)


def identity_matrix(letters):
    n = len(letters)
    rows = tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))
    return IncidenceMatrix(tuple(letters), rows)


def incidence_matrix(sigma, letters=None):
    """Incidence matrix of an endomorphism over a fixed letter order."""
    if letters is None:
        letters = sigma.letters
    letters = tuple(letters)
    if not (sigma.domain <= set(letters) and sigma.codomain <= set(letters)):
        raise PreconditionError("incidence_matrix: letters do not cover the morphism")
    index = {a: i for i, a in enumerate(letters)}
    n = len(letters)
    cols = []
    for b in letters:
        col = [0] * n
        for c in sigma.image(b):
            col[index[c]] += 1
        cols.append(col)
    rows = tuple(tuple(cols[j][i] for j in range(n)) for i in range(n))
    return IncidenceMatrix(letters, rows)


@dataclass(frozen=True)
class SupportMatrix:
    """Boolean matrix; masks[i] has bit j set iff entry (i, j) is non-zero."""

    letters: tuple
    masks: tuple

    @property
    def n(self):
        return len(self.letters)

    def matmul(self, other):
        if self.letters != other.letters:
            raise PreconditionError("matmul: letter orders differ")
        out = []
        for row in self.masks:
            acc = 0
            r = row
            while r:
                k = (r & -r).bit_length() - 1
                acc |= other.masks[k]
                r &= r - 1
            out.append(acc)
        return SupportMatrix(self.letters, tuple(out))

    def pow(self, e):
        if e < 0:
            raise PreconditionError("pow: negative exponent")
        n = self.n
        result = SupportMatrix(self.letters, tuple(1 << i for i in range(n)))
        base = self
        while e:
            if e & 1:
                result = result.matmul(base)
            e >>= 1
            if e:
                base = base.matmul(base)
        return result

    def all_positive(self):
        full = (1 << self.n) - 1
        return all(m == full for m in self.masks)


def is_primitive(support):
    """Exact primitivity test: a single boolean power at the universal exponent
    n^2 - 2n + 2 is all-positive iff the matrix is primitive."""
    n = support.n
    if n == 0:
        raise PreconditionError("is_primitive: empty matrix")
    if n == 1:
        return bool(support.masks[0] & 1)
    bound = n * n - 2 * n + 2
    return support.pow(bound).all_positive()


NULL, UNIT, PRIMITIVE = "null", "unit", "primitive"


@dataclass(frozen=True)
class ComponentBlock:
    letters: tuple
    kind: str
    principal: bool


@dataclass(frozen=True)
class Decomposition:
    """Power p and ordered letter blocks making the p-th power block lower
    triangular, every diagonal block null, unit, or primitive.

    Non-principal blocks (images escape the block) come first in dependency
    order, principal (closed) blocks last; q counts the non-principal ones.
    """

    p: int
    blocks: tuple
    q: int

    @property
    def letter_order(self):
        return tuple(a for blk in self.blocks for a in blk.letters)

    def block_index(self):
        return {a: i for i, blk in enumerate(self.blocks) for a in blk.letters}

    def principal_primitive_blocks(self):
        return tuple(b for b in self.blocks if b.principal and b.kind == PRIMITIVE)


def _strong_components(n, adj):
    """Iterative Tarjan; adj[u] = sorted product-letter indices. Returns SCCs
    in a deterministic order (reverse topological: products before producers)."""
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack = []
    comps = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            u, pi = work[-1]
            if pi == 0:
                index[u] = low[u] = counter
                counter += 1
                stack.append(u)
                on_stack[u] = True
            advanced = False
            while pi < len(adj[u]):
                v = adj[u][pi]
                pi += 1
                if index[v] == -1:
                    work[-1] = (u, pi)
                    work.append((v, 0))
                    advanced = True
                    break
                if on_stack[v]:
                    low[u] = min(low[u], index[v])
            if advanced:
                continue
            work.pop()
            if low[u] == index[u]:
                comp = []
                while True:
                    v = stack.pop()
                    on_stack[v] = False
                    comp.append(v)
                    if v == u:
                        break
                comps.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[u])
    return comps


def _adjacency(support):
    """adj[j] = indices i with letters[i] occurring in the image of letters[j]."""
    n = support.n
    cols = [[] for _ in range(n)]
    for i, mask in enumerate(support.masks):
        m = mask
        while m:
            j = (m & -m).bit_length() - 1
            cols[j].append(i)
            m &= m - 1
    return [sorted(c) for c in cols]


def _cyclicity(comp, adj):
    """Period of a strongly connected vertex set: gcd of level(u)+1-level(v)
    over internal edges, levels from a directed BFS inside the component."""
    inside = set(comp)
    level = {comp[0]: 0}
    queue = [comp[0]]
    while queue:
        u = queue.pop(0)
        for v in adj[u]:
            if v in inside and v not in level:
                level[v] = level[u] + 1
                queue.append(v)
    g = 0
    for u in comp:
        for v in adj[u]:
            if v in inside:
                g = gcd(g, abs(level[u] + 1 - level[v]))
    return g if g else 1


def _lcm(a, b):
    return a * b // gcd(a, b)


def component_decomposition(matrix):
    """Decompose an incidence matrix into p and ordered diagonal blocks.

    p is the lcm of the cyclicity indices of the strongly connected components;
    the matrix of the p-th power is block lower triangular over the returned
    letter order with every diagonal block null, unit, or primitive (verified).
    """
    letters = matrix.letters
    n = matrix.n
    support = matrix.support()
    adj = _adjacency(support)
    p = 1
    for comp in _strong_components(n, adj):
        p = _lcm(p, _cyclicity(comp, adj))

    mp = matrix.pow(p)
    sp = mp.support()
    adj_p = _adjacency(sp)
    comps = _strong_components(n, adj_p)

    # comps arrive products-first; dependency order wants producers first.
    comps.reverse()

    raw = []
    for comp in comps:
        members = tuple(letters[i] for i in comp)
        outside = False
        for j in comp:
            for i in adj_p[j]:
                if i not in comp:
                    outside = True
        if len(comp) == 1:
            j = comp[0]
            c = mp.rows[j][j]
            kind = NULL if c == 0 else (UNIT if c == 1 else PRIMITIVE)
        else:
            kind = PRIMITIVE
        if kind == PRIMITIVE:
            sub = _submatrix_support(sp, comp)
            if not is_primitive(sub):
                raise InternalCheckError(
                    f"diagonal block {members} not primitive at p={p}")
        raw.append((members, kind, not outside))

    blocks = tuple(ComponentBlock(m, k, pr) for m, k, pr in raw if not pr) + \
        tuple(ComponentBlock(m, k, pr) for m, k, pr in raw if pr)
    q = sum(1 for b in blocks if not b.principal)

    _check_triangular(mp, blocks)
    return Decomposition(p=p, blocks=blocks, q=q)


def _submatrix_support(support, comp):
    sub_letters = tuple(support.letters[i] for i in comp)
    masks = []
    for i in comp:
        m = 0
        for jj, j in enumerate(comp):
            if support.masks[i] >> j & 1:
                m |= 1 << jj
        masks.append(m)
    return SupportMatrix(sub_letters, tuple(masks))


def _check_triangular(mp, blocks):
    pos = {}
    for bi, blk in enumerate(blocks):
        for a in blk.letters:
            pos[a] = bi
    letters = mp.letters
    for i in range(mp.n):
        for j in range(mp.n):
            if mp.rows[i][j] and pos[letters[i]] < pos[letters[j]]:
                raise InternalCheckError("decomposition not block triangular")


# ---------------------------------------------------------------------------
# Letter-set orbits: letters(sigma^k(b)) for all k, without expanding words.

@dataclass(frozen=True)
class LetterSetOrbit:
    """Eventually periodic orbit of the per-letter image letter sets."""

    letters: tuple
    states: tuple      # states[k] = tuple of frozensets, aligned with letters
    preperiod: int
    period: int

    def state_at(self, k):
        if k < len(self.states):
            return self.states[k]
        s, t = self.preperiod, self.period
        return self.states[s + (k - s) % t]

    def letters_of(self, k, a):
        """letters(sigma^k(a))."""
        return self.state_at(k)[self.letters.index(a)]


def letterset_orbit(sigma, max_steps=100_000):
    if not sigma.is_endomorphism:
        raise PreconditionError("letterset_orbit: not an endomorphism")
    letters = sigma.letters
    one = [frozenset(sigma.image(a)) for a in letters]
    idx = {a: i for i, a in enumerate(letters)}
    state = tuple(frozenset((a,)) for a in letters)
    states = [state]
    seen = {state: 0}
    for k in range(1, max_steps + 1):
        state = tuple(
            frozenset(c for b in cur for c in one[idx[b]]) for cur in state)
        if state in seen:
            s = seen[state]
            return LetterSetOrbit(letters, tuple(states), s, k - s)
        seen[state] = k
        states.append(state)
    raise ResourceLimitError("letterset_orbit: no repetition found")


def satisfies_p2_at(orbit, e):
    """letters(sigma^e(b)) == letters(sigma^{2e}(b)) for every b; equivalently
    the letter sets of all sigma^{ke}(b), k >= 1, coincide."""
    return orbit.state_at(e) == orbit.state_at(2 * e)


def minimal_p2_exponent(orbit):
    for e in range(1, orbit.preperiod + orbit.period + 1):
        if satisfies_p2_at(orbit, e):
            return e
    raise InternalCheckError("no stabilization exponent within orbit bound")


def letters_stabilization_exponent(sigma):
    """Smallest multiple of |A| that stabilizes all image letter sets.

    Requires the single-component case (decomposition power 1); scales |A| up
    when the natural candidate fails, which happens when some diagonal block
    is primitive without being positive.
    """
    dec = component_decomposition(incidence_matrix(sigma))
    if dec.p != 1:
        raise PreconditionError(
            f"letters_stabilization_exponent: decomposition power is {dec.p}, not 1")
    orbit = letterset_orbit(sigma)
    n = len(sigma.letters)
    m = 1
    while not satisfies_p2_at(orbit, m * n):
        m += 1
        if m > orbit.preperiod + orbit.period + 1:
            raise InternalCheckError("stabilization exponent search exceeded orbit bound")
    return m * n


# ---------------------------------------------------------------------------
# Growth classification.

def mortal_letters(sigma):
    """Letters whose images vanish after finitely many applications."""
    mortal = set(a for a in sigma.letters if not sigma.image(a))
    changed = True
    while changed:
        changed = False
        for a in sigma.letters:
            if a not in mortal and all(c in mortal for c in sigma.image(a)):
                mortal.add(a)
                changed = True
    return frozenset(mortal)


@dataclass(frozen=True)
class LetterClasses:
    """growing: |sigma^n(a)| unbounded; bounded: the complement; mortal: the
    letters of bounded whose images eventually vanish entirely."""

    growing: frozenset
    bounded: frozenset
    mortal: frozenset


def classify_letters(sigma):
    """Growth classes from the component decomposition, with no simulation.

    Block rules, resolved against dependency order (a block's images use only
    letters of the same or later blocks):
      primitive block: every letter grows;
      unit block {b} (sigma^p(b) = x b y): b bounded iff x y is all mortal;
      null block {b}: b bounded iff every letter of sigma^p(b) is bounded.
    """
    dec = component_decomposition(incidence_matrix(sigma))
    orbit = letterset_orbit(sigma)
    mortal = mortal_letters(sigma)
    p = dec.p
    growing = set()
    bounded = set()
    for blk in reversed(dec.blocks):
        if blk.kind == PRIMITIVE:
            growing.update(blk.letters)
            continue
        b = blk.letters[0]
        image_letters = orbit.letters_of(p, b)
        if blk.kind == UNIT:
            flank = image_letters - {b}
            (bounded if flank <= mortal else growing).add(b)
        else:
            (growing if image_letters & growing else bounded).add(b)
    if mortal - bounded:
        raise InternalCheckError("mortal letter classified as growing")
    return LetterClasses(frozenset(growing), frozenset(bounded), mortal)
