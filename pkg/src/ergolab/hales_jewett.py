"""Combinatorial spaces over a k-letter alphabet and their measure layer.

Words are strings over the digits "1".."9" (alphabets up to k = 9), lines
and subspaces are parametrized injections of smaller combinatorial spaces,
and the measure layer carries two finite objects exactly:

* correspondence measures built from a dense set, recording the joint law of
  the indicator slices of the set;
* finite-depth truncations of strongly stationary laws, whose stationarity
  is checked against every subspace below explicit depth and dimension caps
  rather than assumed.

Extremal search (largest line-free set) runs an exact include-first branch
and bound, reporting the lexicographically least extremal set.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product as iter_product
from typing import Iterable, Sequence

from .measure import (
    Coupling,
    ExactProbabilitySpace,
    IndependenceReport,
    Partition,
    ZERO,
    common_refinement,
    relative_independence,
    support_pullback_partition,
)
from .upsets import bits_of, enumerate_upsets, mask_of

MAX_ALPHABET = 9

__all__ = [
    "CombinatorialSubspace",
    "CorrespondenceMeasure",
    "StationaryLawTruncation",
    "all_words",
    "words_up_to",
    "check_word",
    "letter_replace",
    "enumerate_lines",
    "line_maps",
    "enumerate_subspaces",
    "max_line_free",
    "MaxLineFreeResult",
    "subspace_forcing_check",
    "build_correspondence",
    "check_density_premises",
    "strong_stationarity_check",
    "StationarityResult",
    "marginals",
    "insensitive_algebra",
    "line_marginal_structure_report",
    "iid_law",
    "constant_law",
    "mixture_law",
    "law_from_correspondence",
]


def check_word(w: str, k: int) -> str:
    if not 1 <= k <= MAX_ALPHABET:
        raise ValueError(f"alphabet size must be between 1 and {MAX_ALPHABET}")
    for ch in w:
        if not ch.isdigit() or not 1 <= int(ch) <= k:
            raise ValueError(f"letter {ch!r} outside alphabet of size {k}")
    return w


def all_words(k: int, length: int) -> list[str]:
    """All words of exactly the given length, lexicographic."""
    alphabet = "".join(str(i) for i in range(1, k + 1))
    return ["".join(t) for t in iter_product(alphabet, repeat=length)]


def words_up_to(k: int, depth: int) -> list[str]:
    """All words of length 1..depth, ordered by (length, word)."""
    out: list[str] = []
    for n in range(1, depth + 1):
        out.extend(all_words(k, n))
    return out


def letter_replace(e: Iterable[int], i: int, w: str) -> str:
    """Rewrite every letter in ``e`` to ``i``; other letters are unchanged."""
    targets = {str(x) for x in e}
    rep = str(i)
    return "".join(rep if ch in targets else ch for ch in w)


@dataclass(frozen=True)
class CombinatorialSubspace:
    """A parametrized injection of ``[k]^n`` into words of length ``N_n``.

    ``breakpoints`` are ``N_1 < ... < N_n``; wildcard set ``i`` is a nonempty
    set of 1-based positions in ``(N_{i-1}, N_i]``; non-wildcard positions
    copy the template.  ``n = 0`` is allowed and embeds the empty word onto
    the template itself (a single point of the ambient space).
    """

    k: int
    breakpoints: tuple[int, ...]
    wildcards: tuple[frozenset[int], ...]
    template: str

    def __post_init__(self) -> None:
        bps = tuple(int(b) for b in self.breakpoints)
        wcs = tuple(frozenset(int(p) for p in s) for s in self.wildcards)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "wildcards", wcs)
        check_word(self.template, self.k)
        if len(bps) != len(wcs):
            raise ValueError("need one wildcard set per breakpoint")
        prev = 0
        for b, s in zip(bps, wcs):
            if b <= prev:
                raise ValueError("breakpoints must be strictly increasing from 0")
            if not s:
                raise ValueError("wildcard sets must be nonempty")
            if not all(prev < p <= b for p in s):
                raise ValueError("wildcard positions must lie in their window")
            prev = b
        # n = 0 degenerates to a bare point: the template is the image.
        if bps and len(self.template) != prev:
            raise ValueError("template length must equal the last breakpoint")

    @property
    def n(self) -> int:
        return len(self.breakpoints)

    @property
    def ambient_length(self) -> int:
        return self.breakpoints[-1] if self.breakpoints else len(self.template)

    def embed(self, v: str) -> str:
        """The image word: wildcard positions take the matching letter of ``v``."""
        check_word(v, self.k)
        if len(v) != self.n:
            raise ValueError("argument length must equal the subspace dimension")
        out = list(self.template)
        for i, positions in enumerate(self.wildcards):
            for p in positions:
                out[p - 1] = v[i]
        return "".join(out)

    def image(self) -> tuple[str, ...]:
        return tuple(self.embed(v) for v in all_words(self.k, self.n))


def line_maps(k: int, N: int) -> list[tuple[str, ...]]:
    """All lines of ``[k]^N`` in parameter order ``(phi(1), ..., phi(k))``."""
    out = []
    positions = list(range(N))
    for r in range(1, N + 1):
        for J in combinations(positions, r):
            fixed_positions = [p for p in positions if p not in J]
            for w0 in iter_product(range(1, k + 1), repeat=len(fixed_positions)):
                line = []
                for letter in range(1, k + 1):
                    word = [""] * N
                    for p in J:
                        word[p] = str(letter)
                    for p, c in zip(fixed_positions, w0):
                        word[p] = str(c)
                    line.append("".join(word))
                out.append(tuple(line))
    return out


def enumerate_lines(k: int, N: int) -> list[tuple[str, ...]]:
    """All combinatorial lines of ``[k]^N`` as sorted point tuples, lex ordered
    and deduplicated.

    Distinct ``(J, w0)`` data always give distinct point sets, so the count
    is ``(k+1)^N - k^N``; the deduplication is an assertion of that fact.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if k < 2:
        raise ValueError("lines need an alphabet of at least two letters")
    seen = {tuple(sorted(line)) for line in line_maps(k, N)}
    out = sorted(seen)
    if len(out) != (k + 1) ** N - k**N:
        raise RuntimeError("line enumeration produced duplicate point sets")
    return out


def enumerate_subspaces(
    k: int, n: int, max_length: int, exact_length: int | None = None
) -> list[CombinatorialSubspace]:
    """All n-dimensional subspaces with ambient length up to ``max_length``
    (or exactly ``exact_length``), deduplicated by image."""
    out: list[CombinatorialSubspace] = []
    seen: set[tuple[str, ...]] = set()

    lengths = (
        [exact_length] if exact_length is not None else list(range(n, max_length + 1))
    )
    for total in lengths:
        if total < n:
            continue
        for bps in combinations(range(1, total + 1), n - 1) if n > 1 else [()]:
            breakpoints = tuple(bps) + (total,)
            windows = []
            prev = 0
            for b in breakpoints:
                windows.append(tuple(range(prev + 1, b + 1)))
                prev = b
            wildcard_choices = []
            for win in windows:
                opts = []
                for r in range(1, len(win) + 1):
                    opts.extend(frozenset(c) for c in combinations(win, r))
                wildcard_choices.append(opts)
            for wcs in iter_product(*wildcard_choices):
                for template in all_words(k, total):
                    s = CombinatorialSubspace(k, breakpoints, tuple(wcs), template)
                    img = s.image()
                    if img not in seen:
                        seen.add(img)
                        out.append(s)
    return out


@dataclass(frozen=True)
class MaxLineFreeResult:
    size: int
    extremal: tuple[str, ...]
    exhaustive: bool


def max_line_free(k: int, N: int, budget: int = 5_000_000) -> MaxLineFreeResult:
    """Largest subset of ``[k]^N`` containing no combinatorial line.

    Include-first branch and bound over the line hypergraph; the first
    maximum found is the lexicographically least extremal set, and pruning
    preserves that tie-break.  ``budget`` caps the number of search nodes;
    exceeding it returns the best set found with ``exhaustive=False``.
    """
    points = all_words(k, N)
    if len(points) > 4096:
        raise ValueError("over budget: point set too large for the exact search")
    index = {w: i for i, w in enumerate(points)}
    lines = [mask_of(index[w] for w in line) for line in enumerate_lines(k, N)]
    n_pts = len(points)

    best_size = -1
    best_mask = 0
    nodes = 0
    exhausted = True

    # Depth-first over point decisions; a line is violated once all its
    # points are chosen.
    stack = [(0, 0, 0)]  # (next point, chosen mask, chosen count)
    while stack:
        nodes += 1
        if nodes > budget:
            exhausted = False
            break
        pos, chosen, count = stack.pop()
        if count + (n_pts - pos) <= best_size:
            continue
        if pos == n_pts:
            if count > best_size:
                best_size = count
                best_mask = chosen
            continue
        with_pt = chosen | (1 << pos)
        ok = all((line & with_pt) != line for line in lines)
        # Exclude branch pushed first so the include branch is explored first.
        stack.append((pos + 1, chosen, count))
        if ok:
            stack.append((pos + 1, with_pt, count + 1))

    extremal = tuple(points[i] for i in range(n_pts) if best_mask >> i & 1)
    return MaxLineFreeResult(best_size, extremal, exhausted)


def subspace_forcing_check(
    k: int, L: int, N: int, max_sets: int = 200_000
) -> tuple[bool, frozenset[str] | None]:
    """Verify that every subset of ``[k]^N`` with density above
    ``1 - k^(-2L)`` contains an L-dimensional subspace.

    Each qualifying set is checked two ways: the prefix family (a common
    suffix ``w`` with ``u + w`` inside the set for every ``u``), which the
    density bound guarantees, and a general subspace search.  Returns the
    first violating set if any.
    """
    if not 1 <= L <= N:
        raise ValueError("need 1 <= L <= N")
    points = all_words(k, N)
    total = len(points)
    threshold = 1 - Fraction(1, k ** (2 * L))
    max_missing = 0
    while Fraction(total - (max_missing + 1), total) > threshold:
        max_missing += 1

    prefixes = all_words(k, L)
    suffixes = all_words(k, N - L)
    images = [s.image() for s in enumerate_subspaces(k, L, N, exact_length=N)]
    count = 0
    for miss in range(max_missing + 1):
        for gone in combinations(points, miss):
            count += 1
            if count > max_sets:
                raise ValueError("over budget: too many qualifying sets")
            A = set(points) - set(gone)
            prefix_hit = any(
                all(u + w in A for u in prefixes) for w in suffixes
            )
            general_hit = any(all(word in A for word in img) for img in images)
            if not (prefix_hit and general_hit):
                return False, frozenset(A)
    return True, None


@dataclass(frozen=True)
class CorrespondenceMeasure:
    """The joint law of the indicator slices of a set: a measure on
    0/1 configurations indexed by ``[k]^L`` (sorted word order)."""

    k: int
    length: int
    mass: dict

    def __post_init__(self) -> None:
        cleaned: dict[tuple[int, ...], Fraction] = {}
        width = self.k**self.length
        for cfg, v in self.mass.items():
            cfg = tuple(int(b) for b in cfg)
            v = Fraction(v)
            if len(cfg) != width or any(b not in (0, 1) for b in cfg):
                raise ValueError("configurations must be 0/1 tuples over [k]^L")
            if v < 0:
                raise ValueError("masses must be nonnegative")
            if v:
                cleaned[cfg] = cleaned.get(cfg, ZERO) + v
        object.__setattr__(self, "mass", cleaned)
        if sum(cleaned.values(), ZERO) != 1:
            raise ValueError("total mass must be exactly 1")
        object.__setattr__(self, "_words", tuple(all_words(self.k, self.length)))

    @property
    def words(self) -> tuple[str, ...]:
        return self._words  # type: ignore[attr-defined]

    def point_event(self, w: str) -> Fraction:
        """Mass of configurations with a 1 at the given word."""
        i = self.words.index(w)
        return sum((v for cfg, v in self.mass.items() if cfg[i] == 1), ZERO)

    def line_event(self, line: Sequence[str]) -> Fraction:
        """Mass of configurations with a 1 at every point of the line."""
        idx = [self.words.index(w) for w in line]
        return sum(
            (v for cfg, v in self.mass.items() if all(cfg[i] == 1 for i in idx)),
            ZERO,
        )


def build_correspondence(A: Iterable[str], k: int, N: int, L: int) -> CorrespondenceMeasure:
    """The measure whose configuration probabilities are the densities of the
    suffix patterns of ``A``:

    ``mass{(x_w)} = density of {v in [k]^(N-L) : x_w = 1_{A_w}(v) for all w}``

    with ``A_w = {v : w + v in A}``.  Point events equal the slice densities
    and line events the densities of slice intersections.
    """
    if not 1 <= L < N:
        raise ValueError("need 1 <= L < N")
    A = {check_word(w, k) for w in A}
    for w in A:
        if len(w) != N:
            raise ValueError("set elements must have length N")
    prefixes = all_words(k, L)
    M = N - L
    acc: dict[tuple[int, ...], int] = {}
    for v in all_words(k, M):
        cfg = tuple(1 if w + v in A else 0 for w in prefixes)
        acc[cfg] = acc.get(cfg, 0) + 1
    total = k**M
    return CorrespondenceMeasure(
        k, L, {cfg: Fraction(c, total) for cfg, c in acc.items()}
    )


@dataclass(frozen=True)
class StationaryLawTruncation:
    """A finite-depth truncation of a law on configurations indexed by words.

    ``weights`` is an exact measure on ``K^W`` with ``W`` the words of length
    1..depth in (length, word) order and entries indexed into the carrier.
    The carrier weights must equal the marginal at the first word; marginal
    agreement across the other coordinates is what the stationarity check
    verifies, not an assumption.
    """

    k: int
    depth: int
    carrier: ExactProbabilitySpace
    weights: dict

    def __post_init__(self) -> None:
        if not 1 <= self.k <= MAX_ALPHABET:
            raise ValueError(f"alphabet size must be between 1 and {MAX_ALPHABET}")
        if self.depth < 1:
            raise ValueError("depth must be at least 1")
        wlist = tuple(words_up_to(self.k, self.depth))
        object.__setattr__(self, "_words", wlist)
        object.__setattr__(self, "_windex", {w: i for i, w in enumerate(wlist)})
        m = len(self.carrier)
        cleaned: dict[tuple[int, ...], Fraction] = {}
        for cfg, v in self.weights.items():
            cfg = tuple(int(c) for c in cfg)
            v = Fraction(v)
            if len(cfg) != len(wlist) or any(not 0 <= c < m for c in cfg):
                raise ValueError("configurations must index the carrier at every word")
            if v < 0:
                raise ValueError("masses must be nonnegative")
            if v:
                cleaned[cfg] = cleaned.get(cfg, ZERO) + v
        object.__setattr__(self, "weights", cleaned)
        if sum(cleaned.values(), ZERO) != 1:
            raise ValueError("total mass must be exactly 1")
        first = self.coordinate_marginal(wlist[0])
        if first != self.carrier.weights:
            raise ValueError("carrier weights must equal the first-coordinate marginal")

    @property
    def words(self) -> tuple[str, ...]:
        return self._words  # type: ignore[attr-defined]

    def word_index(self, w: str) -> int:
        idx = self._windex  # type: ignore[attr-defined]
        if w not in idx:
            raise ValueError(f"word {w!r} beyond the truncation depth")
        return idx[w]

    def coordinate_marginal(self, w: str) -> tuple[Fraction, ...]:
        i = self.word_index(w)
        out = [ZERO] * len(self.carrier)
        for cfg, v in self.weights.items():
            out[cfg[i]] += v
        return tuple(out)

    def pullback(self, image_words: Sequence[str]) -> dict:
        """Joint law of the coordinates at the given words."""
        idx = [self.word_index(w) for w in image_words]
        out: dict[tuple[int, ...], Fraction] = {}
        for cfg, v in self.weights.items():
            key = tuple(cfg[i] for i in idx)
            out[key] = out.get(key, ZERO) + v
        return out


def iid_law(k: int, depth: int, carrier: ExactProbabilitySpace) -> StationaryLawTruncation:
    """Product law: coordinates independent with the carrier distribution."""
    wlist = words_up_to(k, depth)
    supp = carrier.support()
    weights: dict[tuple[int, ...], Fraction] = {}
    for cfg in iter_product(supp, repeat=len(wlist)):
        m = Fraction(1)
        for c in cfg:
            m *= carrier.weights[c]
        weights[cfg] = m
    return StationaryLawTruncation(k, depth, carrier, weights)


def constant_law(
    k: int, depth: int, carrier: ExactProbabilitySpace
) -> StationaryLawTruncation:
    """Mixture of point masses on constant configurations, one per carrier
    point, weighted by the carrier."""
    wlist = words_up_to(k, depth)
    weights = {
        (i,) * len(wlist): carrier.weights[i]
        for i in carrier.support()
    }
    return StationaryLawTruncation(k, depth, carrier, weights)


def mixture_law(
    laws: Sequence[StationaryLawTruncation], coefficients: Sequence[Fraction]
) -> StationaryLawTruncation:
    """Convex mixture; stationarity is preserved by mixing."""
    if len(laws) != len(coefficients) or not laws:
        raise ValueError("need one coefficient per law")
    if sum(coefficients, ZERO) != 1 or any(c < 0 for c in coefficients):
        raise ValueError("coefficients must be a convex combination")
    first = laws[0]
    for law in laws[1:]:
        if (law.k, law.depth, law.carrier.points) != (
            first.k,
            first.depth,
            first.carrier.points,
        ):
            raise ValueError("mixture components must share alphabet, depth, carrier")
    weights: dict[tuple[int, ...], Fraction] = {}
    for law, c in zip(laws, coefficients):
        if c == 0:
            continue
        for cfg, v in law.weights.items():
            weights[cfg] = weights.get(cfg, ZERO) + c * v
    carrier_weights = tuple(
        sum((c * law.carrier.weights[i] for law, c in zip(laws, coefficients)), ZERO)
        for i in range(len(first.carrier))
    )
    carrier = ExactProbabilitySpace(first.carrier.points, carrier_weights)
    return StationaryLawTruncation(first.k, first.depth, carrier, weights)


def law_from_correspondence(cm: CorrespondenceMeasure) -> StationaryLawTruncation:
    """Promote a depth-1 correspondence measure to a law truncation on the
    0/1 carrier."""
    if cm.length != 1:
        raise ValueError("only depth-1 correspondence measures promote to laws")
    marg = [ZERO, ZERO]
    for cfg, v in cm.mass.items():
        marg[cfg[0]] += v
    carrier = ExactProbabilitySpace((0, 1), tuple(marg))
    return StationaryLawTruncation(cm.k, 1, carrier, dict(cm.mass))


@dataclass(frozen=True)
class StationarityResult:
    holds: bool
    witness: tuple | None = None  # (dimension, images_a, images_b)


def strong_stationarity_check(
    law: StationaryLawTruncation, dim_cap: int
) -> StationarityResult:
    """Check that pullbacks along every subspace of each dimension up to the
    cap agree, i.e. the truncated law cannot distinguish subspaces.

    Dimension 0 compares single-coordinate marginals.  Returns the first
    violating pair of subspace images.
    """
    if dim_cap > law.depth:
        raise ValueError("dimension cap cannot exceed the truncation depth")
    marg0 = law.coordinate_marginal(law.words[0])
    for w in law.words[1:]:
        if law.coordinate_marginal(w) != marg0:
            return StationarityResult(False, (0, (law.words[0],), (w,)))
    for n in range(1, dim_cap + 1):
        reference: tuple | None = None
        for s in enumerate_subspaces(law.k, n, law.depth):
            img = s.image()
            pulled = law.pullback(img)
            if reference is None:
                reference = (img, pulled)
            elif pulled != reference[1]:
                return StationarityResult(False, (n, reference[0], img))
    return StationarityResult(True, None)


def marginals(
    law: StationaryLawTruncation,
) -> tuple[ExactProbabilitySpace, Coupling]:
    """Point and line marginals; requires stationarity at dimensions 0 and 1.

    The line marginal is computed from every line below the depth cap and the
    results are asserted identical, so the choice of line is immaterial.
    """
    res = strong_stationarity_check(law, min(1, law.depth))
    if not res.holds:
        raise ValueError("stationarity violated; marginals are ill-defined")
    point = ExactProbabilitySpace(
        law.carrier.points, law.coordinate_marginal(law.words[0])
    )
    line_laws = []
    for s in enumerate_subspaces(law.k, 1, law.depth):
        line_laws.append(law.pullback(s.image()))
    if not line_laws:
        raise ValueError("no line fits within the truncation depth")
    for other in line_laws[1:]:
        if other != line_laws[0]:
            raise RuntimeError("line marginal depends on the line choice")
    return point, Coupling(law.k, point, line_laws[0])


def insensitive_algebra(law: StationaryLawTruncation, e: Iterable[int]) -> Partition:
    """The partition of the carrier whose block unions are the sets with
    coinciding pullbacks through every line coordinate in ``e``.

    Two characterizations are computed and must agree: connected components
    of the positive-mass cross graph, and atoms of the family of sets ``A``
    with ``mu_line(pullback_i A delta pullback_j A) = 0`` for ``i, j`` in
    ``e``.  Disagreement raises, as it would indicate a bug.
    """
    e = sorted({int(i) for i in e})
    if any(not 1 <= i <= law.k for i in e):
        raise ValueError("line coordinates must lie in the alphabet")
    _, line = marginals(law)
    m = len(law.carrier)

    # Graph characterization: join x and y when some pair of e-coordinates
    # carries positive mass with values x and y.
    parent = list(range(m))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for t in line.mass:
        for i in e:
            for j in e:
                if i < j:
                    union(t[i - 1], t[j - 1])
    graph_partition = Partition.from_labels(tuple(find(x) for x in range(m)))

    if m > 16:
        raise ValueError("carrier too large for the exhaustive dual characterization")
    good_sets = []
    for bits in range(1 << m):
        aset = {x for x in range(m) if bits >> x & 1}
        ok = True
        for i in e:
            for j in e:
                if i >= j:
                    continue
                bad = sum(
                    (
                        v
                        for t, v in line.mass.items()
                        if (t[i - 1] in aset) != (t[j - 1] in aset)
                    ),
                    ZERO,
                )
                if bad != 0:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            good_sets.append(bits)
    # Atoms of the closed set family: points are equivalent when no good set
    # separates them.
    labels = [
        tuple(bits for bits in good_sets if bits >> x & 1) for x in range(m)
    ]
    algebra_partition = Partition.from_labels(labels)

    if graph_partition != algebra_partition:
        raise RuntimeError("insensitive-algebra characterizations disagree")
    return graph_partition


@dataclass(frozen=True)
class LineStructureReport:
    coordinate_clause: IndependenceReport
    oblique_pairs: tuple[tuple[frozenset, frozenset, IndependenceReport], ...]
    implication_holds: bool
    implication_witness: tuple | None

    @property
    def coordinate_holds(self) -> bool:
        return self.coordinate_clause.holds

    @property
    def oblique_holds(self) -> bool:
        return all(r.holds for _, _, r in self.oblique_pairs)


def line_marginal_structure_report(
    law: StationaryLawTruncation,
    partition_family: Sequence[Partition] | None = None,
) -> LineStructureReport:
    """Structure predicates of the line marginal.

    Clause one: coordinate pullbacks relatively independent over the joins of
    pairwise insensitive algebras.  Clause two: lifted insensitive algebras
    of up-sets relatively independent over intersections.  Both may fail for
    unstructured laws.  The final check is the line-to-point implication:
    for every tuple of blocks from the partition family (default: carrier
    singletons), a null line event forces a null point intersection.
    """
    point, line = marginals(law)
    k = law.k
    m = len(law.carrier)

    insens = {
        frozenset(pair): insensitive_algebra(law, pair)
        for pair in combinations(range(1, k + 1), 2)
    }
    factors = [Partition.singletons(m)] * k
    subfactors = []
    for i in range(1, k + 1):
        parts = [insens[frozenset((i, j))] for j in range(1, k + 1) if j != i]
        subfactors.append(common_refinement(*parts) if parts else Partition.one_block(m))
    clause1 = relative_independence(factors, subfactors, line)

    def insensitive_for(mask: int) -> Partition:
        letters = [b + 1 for b in bits_of(mask)]
        parts = [insens[frozenset(p)] for p in combinations(letters, 2)]
        return common_refinement(*parts)

    support_space = line.as_space()
    upsets = enumerate_upsets(k)
    cache: dict[frozenset, Partition] = {}
    for u in upsets:
        parts = [
            support_pullback_partition(line, insensitive_for(mask), min(bits_of(mask)))
            for mask in sorted(u.members)
        ]
        cache[u.members] = (
            common_refinement(*parts) if parts else Partition.one_block(len(support_space))
        )
    pairs = []
    for a in upsets:
        for b in upsets:
            meet = cache[(a & b).members]
            rep = relative_independence(
                (cache[a.members], cache[b.members]), (meet, meet), support_space
            )
            pairs.append((frozenset(a.members), frozenset(b.members), rep))

    if partition_family is None:
        partition_family = [Partition.singletons(m)] * k
    if len(partition_family) != k:
        raise ValueError("need one partition per line coordinate")
    implication = True
    witness = None
    for blocks in iter_product(*(p.blocks for p in partition_family)):
        sets = [frozenset(b) for b in blocks]
        if line.event_mass(sets) == 0:
            inter = frozenset.intersection(*sets)
            if point.measure(inter) != 0:
                implication = False
                witness = tuple(sets)
                break
    return LineStructureReport(clause1, tuple(pairs), implication, witness)


def check_density_premises(
    obj: "CorrespondenceMeasure | StationaryLawTruncation", delta: Fraction
) -> bool:
    """Whether every point event (the coordinate taking the designated
    positive value) has mass at least ``delta``."""
    delta = Fraction(delta)
    if isinstance(obj, CorrespondenceMeasure):
        return all(obj.point_event(w) >= delta for w in obj.words)
    if isinstance(obj, StationaryLawTruncation):
        if 1 not in obj.carrier.points:
            raise ValueError("law carrier has no designated positive value 1")
        one = obj.carrier.points.index(1)
        for w in obj.words:
            marg = obj.coordinate_marginal(w)
            if marg[one] < delta:
                return False
        return True
    raise TypeError("expected a correspondence measure or a law truncation")
