"""Labelled link patterns, their orbit lattice, and word combinatorics.

A link pattern on m nodes of rank r is a sequence of r directed arcs
(source, target) with 2r pairwise distinct endpoints.  The symmetric group
S_m relabels nodes, S_r relabels arcs.  Every pattern is reachable from the
minimal one (arcs m-r+i -> i) by adjacent node transpositions, and the
breadth-first search over that move graph provides minimal words,
presentations and the per-step admissible parameters.

Node values: relative to the rho_m-shifted type of the minimal class, the
node carrying the target of arc a is worth mu_a + r h, the source of arc a
is worth (m-r+1) h - mu_a, and the t-th loose node (in node order) is worth
(r+t) h.  Transposing nodes i, i+1 consumes the parameter
value(i) - value(i+1); two adjacent loose nodes would consume -h, for which
the reduced operator is undefined, so such moves never enter the search.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

from .typecalc import LinearForm, VarSpace


class PatternError(ValueError):
    """Base class for malformed link patterns and bad pattern operations."""


class BadRank(PatternError):
    """Rank r violates 2r <= m (or is negative)."""


class DistinctnessError(PatternError):
    """Arc endpoints are not pairwise distinct."""


class LooseLoose(PatternError):
    """Transposition of two adjacent loose nodes: reduced operator undefined."""


class Unreachable(PatternError):
    """Defensive: a valid pattern was not found in the orbit lattice."""


class BadCharacterShape(PatternError):
    """A step parameter is not of the form s mu_a + t mu_b - k h."""


class AlreadySquare(PatternError):
    """extend_pattern needs m > 2r."""


class PatternSyntaxError(PatternError):
    """Pattern text failed to parse; carries the byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


# --------------------------------------------------------------------------
# permutations in one-line notation, 1-based images


def identity_perm(m: int) -> tuple[int, ...]:
    return tuple(range(1, m + 1))


def transposition(m: int, i: int) -> tuple[int, ...]:
    if not 1 <= i <= m - 1:
        raise ValueError(f"s_{i} outside 1..{m - 1}")
    w = list(range(1, m + 1))
    w[i - 1], w[i] = w[i], w[i - 1]
    return tuple(w)


def compose(w: Sequence[int], v: Sequence[int]) -> tuple[int, ...]:
    """(w o v)(i) = w(v(i))."""
    return tuple(w[v[i] - 1] for i in range(len(v)))


def inverse_perm(w: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(w)
    for i, wi in enumerate(w, 1):
        inv[wi - 1] = i
    return tuple(inv)


def word_to_perm(m: int, word: Sequence[int]) -> tuple[int, ...]:
    """s_{i_1} o s_{i_2} o ... o s_{i_l} (rightmost factor applied first)."""
    w = identity_perm(m)
    for i in word:
        w = compose(w, transposition(m, i))
    return w


def is_permutation(w: Sequence[int]) -> bool:
    return sorted(w) == list(range(1, len(w) + 1))


# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LinkPattern:
    """m nodes and r labelled directed arcs with distinct endpoints."""

    m: int
    r: int
    arcs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.r < 0 or 2 * self.r > self.m:
            raise BadRank(f"rank {self.r} impossible on {self.m} nodes")
        if len(self.arcs) != self.r:
            raise PatternError(
                f"expected {self.r} arcs, got {len(self.arcs)}"
            )
        seen = set()
        for a, b in self.arcs:
            for e in (a, b):
                if not 1 <= e <= self.m:
                    raise PatternError(f"endpoint {e} outside 1..{self.m}")
                if e in seen:
                    raise DistinctnessError(f"endpoint {e} used twice")
                seen.add(e)

    @property
    def loose_nodes(self) -> tuple[int, ...]:
        used = {e for arc in self.arcs for e in arc}
        return tuple(j for j in range(1, self.m + 1) if j not in used)

    def arc_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.arcs)

    def canonical_labels(self) -> "LinkPattern":
        """The same arc set with arcs sorted, labels in sorted order."""
        return LinkPattern(self.m, self.r, tuple(sorted(self.arcs)))

    def __str__(self) -> str:
        return format_pattern(self)


def minimal_pattern(m: int, r: int) -> LinkPattern:
    """Arcs (m-r+i -> i): the minimal-dimension orbit of given rank."""
    if r < 0 or 2 * r > m:
        raise BadRank(f"rank {r} impossible on {m} nodes")
    return LinkPattern(m, r, tuple((m - r + i, i) for i in range(1, r + 1)))


def act_nodes(w: Sequence[int], p: LinkPattern) -> LinkPattern:
    """Relabel every arc endpoint by the permutation w."""
    if len(w) != p.m or not is_permutation(w):
        raise PatternError(f"node permutation must be a bijection of 1..{p.m}")
    return LinkPattern(p.m, p.r, tuple((w[a - 1], w[b - 1]) for a, b in p.arcs))


def act_labels(sigma: Sequence[int], p: LinkPattern) -> LinkPattern:
    """Give the arc that carried label j the new label sigma(j)."""
    if len(sigma) != p.r or not is_permutation(sigma):
        raise PatternError(f"label permutation must be a bijection of 1..{p.r}")
    inv = inverse_perm(sigma)
    return LinkPattern(p.m, p.r, tuple(p.arcs[inv[j - 1] - 1] for j in range(1, p.r + 1)))


def node_values(p: LinkPattern, space: VarSpace | None = None) -> tuple[LinearForm, ...]:
    """The rho-shifted x-coefficients carried by the nodes of p.

    Assumes p's loose nodes appear in their original relative order, which
    holds for every pattern reached without loose-loose transpositions.
    """
    if space is None:
        space = VarSpace(p.m, p.r)
    h = space.h()
    vals: dict[int, LinearForm] = {}
    for label, (a, b) in enumerate(p.arcs, 1):
        vals[b] = space.mu(label) + h.scale(p.r)
        vals[a] = h.scale(p.m - p.r + 1) - space.mu(label)
    for t, j in enumerate(p.loose_nodes, 1):
        vals[j] = h.scale(p.r + t)
    return tuple(vals[j] for j in range(1, p.m + 1))


def _swap_arcs(arcs: tuple[tuple[int, int], ...], i: int) -> tuple[tuple[int, int], ...]:
    def f(e: int) -> int:
        if e == i:
            return i + 1
        if e == i + 1:
            return i
        return e

    return tuple((f(a), f(b)) for a, b in arcs)


def six_move_mu(p: LinkPattern, i: int) -> tuple[LinearForm, bool]:
    """Move-table parameter for transposing nodes i, i+1, and whether the
    move lengthens the minimal word.

    The parameter is value(i) - value(i+1); the classification into the six
    pictured cases (and their reversed-arrow analogues) is exactly the case
    split of the node values.  Raises LooseLoose when both nodes are loose.
    """
    if not 1 <= i <= p.m - 1:
        raise PatternError(f"move index {i} outside 1..{p.m - 1}")
    loose = set(p.loose_nodes)
    if i in loose and i + 1 in loose:
        raise LooseLoose(
            f"nodes {i},{i + 1} both loose: parameter -h, reduced operator undefined"
        )
    vals = node_values(p)
    mu = vals[i - 1] - vals[i]
    lat = _lattice(p.m, p.r)
    here = lat.dist[p.arc_set()]
    there = lat.dist[frozenset(_swap_arcs(p.arcs, i))]
    return mu, there > here


@dataclass(frozen=True)
class Presentation:
    """pattern = sigma^mu . w . minimal_pattern, with w of minimal length."""

    pattern: LinkPattern
    sigma: tuple[int, ...]
    w: tuple[int, ...]
    word: tuple[int, ...]


class OrbitLattice:
    """BFS closure of the move graph over arc sets for fixed (m, r).

    Loose-loose transpositions fix the arc set, so they are self-loops and
    never occur on shortest paths; the search skips them outright.
    """

    def __init__(self, m: int, r: int):
        self.m = m
        self.r = r
        start = minimal_pattern(m, r).arc_set()
        self.start = start
        dist: dict[frozenset, int] = {start: 0}
        order = [start]
        queue = deque([start])
        while queue:
            s = queue.popleft()
            arcs = tuple(sorted(s))
            used = {e for arc in arcs for e in arc}
            for i in range(1, m):
                if i not in used and i + 1 not in used:
                    continue
                t = frozenset(_swap_arcs(arcs, i))
                if t not in dist:
                    dist[t] = dist[s] + 1
                    order.append(t)
                    queue.append(t)
        self.dist = dist
        self.order = order

    def lex_min_word(self, arc_set: frozenset) -> tuple[int, ...]:
        """Lexicographically smallest minimal word for the arc set.

        The word (i_1 .. i_l) satisfies arcs = s_{i_1}(...(s_{i_l}(min))),
        so the first letter is the move undone first when walking back.
        """
        if arc_set not in self.dist:
            raise Unreachable(f"arc set {sorted(arc_set)} not in the lattice")
        word = []
        cur = arc_set
        while self.dist[cur] > 0:
            arcs = tuple(sorted(cur))
            for i in range(1, self.m):
                t = frozenset(_swap_arcs(arcs, i))
                if self.dist.get(t, -1) == self.dist[cur] - 1:
                    word.append(i)
                    cur = t
                    break
            else:  # pragma: no cover - BFS guarantees a predecessor
                raise Unreachable("no distance-decreasing move")
        return tuple(word)

    def all_min_words(self, arc_set: frozenset, cap: int | None = None) -> list[tuple[int, ...]]:
        """Every minimal word for the arc set (optionally capped)."""
        if arc_set not in self.dist:
            raise Unreachable(f"arc set {sorted(arc_set)} not in the lattice")
        memo: dict[frozenset, list[tuple[int, ...]]] = {self.start: [()]}

        def rec(s: frozenset) -> list[tuple[int, ...]]:
            if s in memo:
                return memo[s]
            arcs = tuple(sorted(s))
            words = []
            for i in range(1, self.m):
                t = frozenset(_swap_arcs(arcs, i))
                if self.dist.get(t, -1) == self.dist[s] - 1:
                    for w in rec(t):
                        words.append((i,) + w)
                        if cap is not None and len(words) >= cap:
                            break
                if cap is not None and len(words) >= cap:
                    break
            memo[s] = words
            return words

        return rec(arc_set)

    def patterns(self) -> Iterator[LinkPattern]:
        """Canonically labelled representative of every arc set, BFS order."""
        for s in self.order:
            yield LinkPattern(self.m, self.r, tuple(sorted(s)))


@lru_cache(maxsize=None)
def _lattice(m: int, r: int) -> OrbitLattice:
    return OrbitLattice(m, r)


def orbit_lattice(m: int, r: int) -> OrbitLattice:
    return _lattice(m, r)


def _presentation_from_word(p: LinkPattern, word: tuple[int, ...]) -> Presentation:
    w = word_to_perm(p.m, word)
    moved = act_nodes(w, minimal_pattern(p.m, p.r))
    # sigma sends the label of moved's arc to the label p gives the same arc
    sigma = [0] * p.r
    arcs = list(p.arcs)
    for i, arc in enumerate(moved.arcs, 1):
        sigma[i - 1] = arcs.index(arc) + 1
    return Presentation(p, tuple(sigma), w, word)


def minimal_presentation(p: LinkPattern) -> Presentation:
    """Deterministic minimal presentation: lexicographically smallest word."""
    lat = _lattice(p.m, p.r)
    return _presentation_from_word(p, lat.lex_min_word(p.arc_set()))


def all_minimal_presentations(p: LinkPattern, cap: int | None = None) -> list[Presentation]:
    """All minimal presentations of p (every minimal word with its sigma)."""
    lat = _lattice(p.m, p.r)
    return [
        _presentation_from_word(p, w) for w in lat.all_min_words(p.arc_set(), cap)
    ]


def nu_list(pres: Presentation) -> tuple[LinearForm, ...]:
    """Admissible parameters consumed left-to-right by the word.

    The values are expressed in the labels of the presented pattern (the
    final label permutation applied), which is the presentation-independent
    normalisation: the k-th entry is sigma(value(i_k) - value(i_k + 1)) read
    off just before the k-th transposition is applied.
    """
    p = pres.pattern
    space = VarSpace(p.m, p.r)
    vals = list(node_values(minimal_pattern(p.m, p.r), space))
    nus: list[LinearForm] = []
    for i in reversed(pres.word):
        nus.append(vals[i - 1] - vals[i])
        vals[i - 1], vals[i] = vals[i], vals[i - 1]
    nus.reverse()
    if pres.sigma == identity_perm(p.r):
        return tuple(nus)
    mu_map = {
        space.mu_index(j): space.mu(pres.sigma[j - 1]) for j in range(1, p.r + 1)
    }
    return tuple(nu.substitute(mu_map) for nu in nus)


def multiplicities(pres: Presentation, lambdas: Sequence[Fraction]) -> list[Fraction]:
    """Boundary multiplicities of the word's resolution, one per step.

    Each step parameter must be s mu_a + t mu_b - k h; with the bookkeeping
    mu_i = h^(1 - lambda_i) the step contributes 1 + k + s lambda_a +
    t lambda_b - s - t.
    """
    p = pres.pattern
    if len(lambdas) != p.r:
        raise BadCharacterShape(f"need {p.r} lambda values, got {len(lambdas)}")
    lambdas = [Fraction(l) for l in lambdas]
    space = VarSpace(p.m, p.r)
    out = []
    for nu in nu_list(pres):
        if not nu.is_x_free() or nu.coeffs[space.u_index] != 0:
            raise BadCharacterShape(f"step parameter {nu} is not a mu/h character")
        mu_terms = [
            (j, nu.coeffs[space.mu_index(j)])
            for j in range(1, p.r + 1)
            if nu.coeffs[space.mu_index(j)] != 0
        ]
        if len(mu_terms) > 2:
            raise BadCharacterShape(f"step parameter {nu} involves >2 mu symbols")
        k = -nu.coeffs[space.h_index]
        alpha = 1 + k
        for j, s in mu_terms:
            alpha += s * lambdas[j - 1] - s
        out.append(alpha)
    return out


@dataclass(frozen=True)
class ExtensionResult:
    """Extension to a square pattern plus the uniform mu shift it records.

    Original labels j <= r become mu'_j = mu_j - mu_shift * h; the new
    labels r < j <= m - r satisfy mu'_j = (j - m/2) h.
    """

    pattern: LinkPattern
    mu_shift: Fraction


def extend_pattern(p: LinkPattern) -> ExtensionResult:
    """Add m - 2r nodes with arcs onto the loose nodes, preserving order."""
    if p.m == 2 * p.r:
        raise AlreadySquare(f"pattern with m = 2r = {p.m} cannot be extended")
    new_arcs = list(p.arcs)
    for t, j in enumerate(p.loose_nodes, 1):
        new_arcs.append((p.m + t, j))
    big = LinkPattern(2 * (p.m - p.r), p.m - p.r, tuple(new_arcs))
    return ExtensionResult(big, Fraction(p.m, 2) - p.r)


# --------------------------------------------------------------------------
# CLI text format: "m,r:a1>b1,a2>b2,..."


def format_pattern(p: LinkPattern) -> str:
    arcs = ",".join(f"{a}>{b}" for a, b in p.arcs)
    return f"{p.m},{p.r}:{arcs}" if p.r else f"{p.m},{p.r}:"


def parse_pattern(text: str) -> LinkPattern:
    """Strict parser for the CLI pattern grammar, with byte offsets."""

    pos = 0

    def fail(msg: str) -> PatternSyntaxError:
        return PatternSyntaxError(msg, pos)

    def read_int() -> int:
        nonlocal pos
        start = pos
        while pos < len(text) and text[pos].isdigit():
            pos += 1
        if pos == start:
            raise fail("expected an integer")
        return int(text[start:pos])

    def expect(ch: str):
        nonlocal pos
        if pos >= len(text) or text[pos] != ch:
            raise fail(f"expected {ch!r}")
        pos += 1

    m = read_int()
    expect(",")
    r = read_int()
    expect(":")
    arcs = []
    seen: set[int] = set()
    for k in range(r):
        if k:
            expect(",")
        a = read_int()
        expect(">")
        b = read_int()
        for e in (a, b):
            if e in seen:
                raise DistinctnessError(f"endpoint {e} used twice (at offset {pos})")
            seen.add(e)
        arcs.append((a, b))
    if pos != len(text):
        raise fail("trailing input after pattern")
    return LinkPattern(m, r, tuple(arcs))
