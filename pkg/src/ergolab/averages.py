"""Nonconventional averages, Furstenberg self-joinings, and recurrence.

For a finite system every generator permutation has finite order, so the
Cesaro averages of the off-diagonal joinings are eventually periodic and the
limiting self-joining is computed exactly as the average over one full
period.  Because the averages are exactly periodic, the limit is also
uniform in the location of the averaging interval; this needs no separate
implementation.

The period ``L`` of a direction set is the lcm of the cycle lengths of the
product-space permutation, i.e. the order of the tuple of generator
permutations.  Witness searches are bounded by ``L``: one period is
exhaustive for a finite system (the ``n = L`` term always reproduces the
plain intersection).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

from .measure import (
    Coupling,
    IndependenceReport,
    Partition,
    SimpleFunction,
    ZERO,
    common_refinement,
    relative_independence,
    support_pullback_partition,
)
from .systems import (
    FiniteZdSystem,
    SubgroupSpec,
    compose,
    identity_perm,
    invariant_factor,
    perm_order,
)
from .upsets import UpSet, bits_of, enumerate_upsets


@dataclass(frozen=True)
class FurstenbergJoining:
    """The exact limiting self-joining of a direction set of a finite system.

    ``directions`` are 0-based generator indices; the coupling has one
    coordinate per direction, marginals equal to the system measure, and is
    invariant under the diagonal action.
    """

    system: FiniteZdSystem
    directions: tuple[int, ...]
    coupling: Coupling
    period: int

    def __post_init__(self) -> None:
        dirs = tuple(sorted(self.directions))
        object.__setattr__(self, "directions", dirs)
        if not dirs or len(set(dirs)) != len(dirs):
            raise ValueError("directions must be a nonempty set of generator indices")
        if any(not 0 <= i < self.system.dim for i in dirs):
            raise ValueError("direction out of range")
        if self.coupling.arity != len(dirs):
            raise ValueError("coupling arity must match the direction count")
        if self.coupling.base != self.system.space:
            raise ValueError("coupling base must be the system space")
        # Diagonal-action invariance is part of the construction contract.
        for i in range(self.system.dim):
            g = self.system.generators[i]
            moved = self.coupling.permute_points([g] * self.coupling.arity)
            if moved.mass != self.coupling.mass:
                raise ValueError("coupling must be invariant under the diagonal action")


def direction_period(sys: FiniteZdSystem, directions: Sequence[int]) -> int:
    """Order of the tuple of generator permutations at the given directions."""
    return lcm(*(perm_order(sys.generators[i]) for i in directions))


def furstenberg_self_joining(
    sys: FiniteZdSystem, directions: Iterable[int] | None = None
) -> FurstenbergJoining:
    """Average the off-diagonal joinings over one exact period.

    The mass of ``(x_1, ..., x_k)`` is ``(1/L) sum_n sum_x mu(x)`` over the
    pairs with ``x_j = T^(n e_ij) x`` for every ``j``.
    """
    if directions is None:
        directions = range(sys.dim)
    dirs = tuple(sorted(directions))
    if not dirs:
        raise ValueError("need at least one direction")
    L = direction_period(sys, dirs)
    den, nums = sys.space.integerized()
    supp = sys.space.support()
    acc: dict[tuple[int, ...], int] = {}
    current = [identity_perm(len(sys)) for _ in dirs]
    for _ in range(L):
        for x in supp:
            t = tuple(p[x] for p in current)
            acc[t] = acc.get(t, 0) + nums[x]
        current = [compose(sys.generators[i], p) for i, p in zip(dirs, current)]
    total = L * den
    mass = {t: Fraction(v, total) for t, v in acc.items()}
    coupling = Coupling(len(dirs), sys.space, mass)
    return FurstenbergJoining(sys, dirs, coupling, L)


def nonconventional_average(
    sys: FiniteZdSystem, functions: Sequence[SimpleFunction], N: int
) -> SimpleFunction:
    """The exact finite average ``(1/N) sum_{n=1..N} prod_i f_i o T^(n e_i)``."""
    if len(functions) != sys.dim:
        raise ValueError("need one function per generator")
    if any(len(f) != len(sys) for f in functions):
        raise ValueError("dimension mismatch")
    if N < 1:
        raise ValueError("N must be at least 1")
    n_pts = len(sys)
    totals = [ZERO] * n_pts
    current = list(sys.generators)
    for _ in range(N):
        for x in range(n_pts):
            prod = Fraction(1)
            for f, p in zip(functions, current):
                prod *= f.values[p[x]]
                if prod == 0:
                    break
            totals[x] += prod
        current = [compose(g, p) for g, p in zip(sys.generators, current)]
    return SimpleFunction(tuple(v / N for v in totals))


def cesaro_limit(sys: FiniteZdSystem, sets: Sequence[Iterable[int]]) -> Fraction:
    """Exact limit of ``(1/N) sum_n mu(T^(-n e_1) A_1 cap ... cap T^(-n e_d) A_d)``.

    Computed as the average over one full period, which equals the limit for
    any phase.  Coincides with the self-joining mass of the product set.
    """
    if len(sets) != sys.dim:
        raise ValueError("need one set per generator")
    fj = furstenberg_self_joining(sys)
    return fj.coupling.event_mass([frozenset(s) for s in sets])


def check_offdiagonal_invariance(fj: FurstenbergJoining) -> bool:
    """Exact invariance under ``T^(e_i1) x ... x T^(e_ik)``.

    This is a theorem for the averaged construction, so ``False`` signals a
    bug rather than an interesting outcome.
    """
    perms = [fj.system.generators[i] for i in fj.directions]
    moved = fj.coupling.permute_points(perms)
    return moved.mass == fj.coupling.mass


def project_joining(fj: FurstenbergJoining, directions: Iterable[int]) -> Coupling:
    """Coordinate pushforward onto a nonempty subset of the directions.

    Equals the directly built self-joining of the smaller direction set
    exactly; the projection identity is exercised in the test suite.
    """
    dirs = tuple(sorted(directions))
    if not dirs:
        raise ValueError("direction subset must be nonempty")
    if any(i not in fj.directions for i in dirs):
        raise ValueError("not a subset of the joining's directions")
    positions = [fj.directions.index(i) for i in dirs]
    return fj.coupling.pushforward(positions)


def difference_subgroup(dim: int, indices: Sequence[int]) -> SubgroupSpec:
    """The subgroup generated by ``e_{i_1} - e_{i_j}`` for the given indices."""
    idx = tuple(sorted(indices))
    vectors = []
    for j in idx[1:]:
        v = [0] * dim
        v[idx[0]] = 1
        v[j] = -1
        vectors.append(tuple(v))
    return SubgroupSpec(tuple(vectors))


def oblique_copy(fj: FurstenbergJoining, subset: Iterable[int]) -> Partition:
    """The common pullback, through any coordinate in ``subset``, of the
    invariant factor of the difference subgroup, as a partition of the
    coupling's support tuples.

    All coordinates in ``subset`` must induce the same partition of the
    support (they agree modulo null sets by the diagonal restriction lemma);
    disagreement raises, since it would indicate a bug.  The least coordinate
    is the canonical representative.
    """
    idx = tuple(sorted(subset))
    if len(idx) < 2:
        raise ValueError("an oblique copy needs at least two directions")
    if any(i not in fj.directions for i in idx):
        raise ValueError("subset must consist of joining directions")
    base_partition = invariant_factor(
        fj.system, difference_subgroup(fj.system.dim, idx)
    )
    positions = [fj.directions.index(i) for i in idx]
    pulled = [
        support_pullback_partition(fj.coupling, base_partition, pos)
        for pos in positions
    ]
    for other in pulled[1:]:
        if other != pulled[0]:
            raise RuntimeError("oblique copies disagree across coordinates")
    return pulled[0]


@dataclass(frozen=True)
class RecurrenceCertificate:
    """Exact Cesaro limit of the diagonal return averages of a set, plus the
    least positive return time within one period (``None`` if the set is
    null)."""

    limit: Fraction
    witness: int | None


def recurrence_certificate(sys: FiniteZdSystem, A: Iterable[int]) -> RecurrenceCertificate:
    """Limit of ``(1/N) sum_n mu(icap_i T^(-n e_i) A)`` and least witness.

    For a finite system with ``mu(A) > 0`` both are guaranteed positive: the
    term at ``n = L`` is ``mu(A)`` itself.
    """
    A = frozenset(A)
    limit = cesaro_limit(sys, [A] * sys.dim)
    witness = None
    L = direction_period(sys, range(sys.dim))
    supp = sys.space.support()
    current = list(sys.generators)
    for n in range(1, L + 1):
        if any(all(p[x] in A for p in current) for x in supp):
            witness = n
            break
        current = [compose(g, p) for g, p in zip(sys.generators, current)]
    return RecurrenceCertificate(limit, witness)


def recurrence_certificates_exhaustive(
    sys: FiniteZdSystem,
) -> dict[int, RecurrenceCertificate]:
    """Certificates for every subset of points at once, keyed by bitmask.

    Shares one period scan across all sets via a subset-sum transform, so the
    full sweep over ``2^|X|`` sets costs ``O(2^|X| |X| + L |X|)`` integer
    operations.  Agrees with :func:`recurrence_certificate` set by set.
    """
    n_pts = len(sys)
    if n_pts > 20:
        raise ValueError("exhaustive sweep is limited to 20 points")
    den, nums = sys.space.integerized()
    supp = sys.space.support()
    L = direction_period(sys, range(sys.dim))
    d = sys.dim

    # Aggregate the period scan by the point set touched by each orbit tuple.
    agg = [0] * (1 << n_pts)
    masks_by_n: list[list[int]] = []
    current = [identity_perm(n_pts) for _ in range(d)]
    for n in range(L):
        level = []
        for x in supp:
            m = 0
            for p in current:
                m |= 1 << p[x]
            agg[m] += nums[x]
            level.append(m)
        masks_by_n.append(level)
        current = [compose(g, p) for g, p in zip(sys.generators, current)]

    # Subset-sum transform: f[A] = total mass of orbit tuples inside A.
    for bit in range(n_pts):
        step = 1 << bit
        for m in range(1 << n_pts):
            if m & step:
                agg[m] += agg[m ^ step]

    # Least witness per set, again by a subset transform: the witness of A is
    # the least offset whose orbit-image mask lies inside A.  The masks for
    # offset n equal those recorded at n mod L, so n = L reuses level 0.
    first_hit: dict[int, int] = {}
    for n in range(1, L + 1):
        for tm in masks_by_n[n % L]:
            if tm not in first_hit:
                first_hit[tm] = n
    sentinel = L + 1
    wit = [sentinel] * (1 << n_pts)
    for tm, n in first_hit.items():
        if n < wit[tm]:
            wit[tm] = n
    for bit in range(n_pts):
        step = 1 << bit
        for m in range(1 << n_pts):
            if m & step and wit[m ^ step] < wit[m]:
                wit[m] = wit[m ^ step]

    total = L * den
    out: dict[int, RecurrenceCertificate] = {}
    for m in range(1 << n_pts):
        out[m] = RecurrenceCertificate(
            Fraction(agg[m], total), wit[m] if wit[m] <= L else None
        )
    return out


def multiple_recurrence_check(
    sys: FiniteZdSystem,
    sets: Sequence[Iterable[int]],
    fj: FurstenbergJoining | None = None,
) -> bool:
    """Verify the implication: vanishing self-joining mass of the product set
    forces vanishing measure of the intersection.

    Vacuously true when the product mass is positive.  Unconditionally true
    for finite systems, since the period average dominates ``mu(cap A_i)/L``.
    """
    if len(sets) != sys.dim:
        raise ValueError("need one set per generator")
    if fj is None:
        fj = furstenberg_self_joining(sys)
    sets = [frozenset(s) for s in sets]
    if fj.coupling.event_mass(sets) != 0:
        return True
    inter = set.intersection(*(set(s) for s in sets)) if sets else set()
    return sys.space.measure(inter) == 0


@dataclass(frozen=True)
class VectorSequence:
    """A finite list of equal-dimension exact rational vectors."""

    entries: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self) -> None:
        entries = tuple(
            tuple(Fraction(c) for c in row) for row in self.entries
        )
        object.__setattr__(self, "entries", entries)
        if not entries:
            raise ValueError("sequence must be nonempty")
        if len({len(r) for r in entries}) != 1:
            raise ValueError("vectors must share one dimension")

    def __len__(self) -> int:
        return len(self.entries)


def _dot(u: tuple[Fraction, ...], v: tuple[Fraction, ...]) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), ZERO)


@dataclass(frozen=True)
class VanDerCorputReport:
    lhs: Fraction
    rhs: Fraction

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs


def van_der_corput_inequality(
    seq: VectorSequence, N: int, H: int
) -> VanDerCorputReport:
    """The finite van der Corput estimate, exactly:

    ``|| (1/N) sum_n (1/H) sum_h u_{n+h} ||^2
      <= (1/H^2) sum_{h1,h2} (1/N) sum_n <u_{n+h1}, u_{n+h2}>``

    with ``n`` in ``1..N`` and ``h`` in ``1..H``.  Always holds (it is an
    exact instance of convexity of the squared norm); equality at constant
    sequences.
    """
    if N < 1 or H < 1:
        raise ValueError("N and H must be positive")
    if N + H > len(seq):
        raise ValueError("index overflow: sequence too short for N + H")
    dim = len(seq.entries[0])
    avg = [ZERO] * dim
    for n in range(1, N + 1):
        for h in range(1, H + 1):
            u = seq.entries[n + h - 1]
            for i in range(dim):
                avg[i] += u[i]
    avg = tuple(a / (N * H) for a in avg)
    lhs = _dot(avg, avg)
    rhs = ZERO
    for h1 in range(1, H + 1):
        for h2 in range(1, H + 1):
            inner = ZERO
            for n in range(1, N + 1):
                inner += _dot(seq.entries[n + h1 - 1], seq.entries[n + h2 - 1])
            rhs += inner / N
    rhs /= H * H
    return VanDerCorputReport(lhs, rhs)


@dataclass(frozen=True)
class SelfJoiningStructureReport:
    """Structure predicates on the full self-joining; both clauses can fail
    for systems lacking the relevant extension structure."""

    coordinate_clause: IndependenceReport
    oblique_pairs: tuple[tuple[frozenset, frozenset, IndependenceReport], ...]

    @property
    def coordinate_holds(self) -> bool:
        return self.coordinate_clause.holds

    @property
    def oblique_holds(self) -> bool:
        return all(r.holds for _, _, r in self.oblique_pairs)


def pair_factor_partition(sys: FiniteZdSystem, i: int) -> Partition:
    """Join of the two-index difference invariant factors through index ``i``."""
    parts = [
        invariant_factor(sys, difference_subgroup(sys.dim, (i, j)))
        for j in range(sys.dim)
        if j != i
    ]
    if not parts:
        return Partition.one_block(len(sys))
    return common_refinement(*parts)


def oblique_factor_partition(fj: FurstenbergJoining, upset: UpSet) -> Partition:
    """Join of the oblique copies over the members of an up-set, as a
    partition of the coupling support."""
    n_supp = len(fj.coupling.support())
    parts = [oblique_copy(fj, bits_of(m)) for m in upset.members]
    if not parts:
        return Partition.one_block(n_supp)
    return common_refinement(*parts)


def self_joining_structure_report(sys: FiniteZdSystem) -> SelfJoiningStructureReport:
    """Evaluate the two structure predicates of the full self-joining.

    Clause one: the coordinate pullbacks are relatively independent over the
    pullbacks of the pairwise-difference factor joins.  Clause two: for every
    pair of up-sets, the oblique factors are relatively independent over the
    oblique factor of the intersection.  Up-set pairs are enumerated
    exhaustively for d <= 4 and restricted to principal up-sets beyond that.
    """
    d = sys.dim
    if d < 2:
        raise ValueError("structure predicates need at least two directions")
    fj = furstenberg_self_joining(sys)
    factors = [Partition.singletons(len(sys))] * d
    subfactors = [pair_factor_partition(sys, i) for i in range(d)]
    clause1 = relative_independence(factors, subfactors, fj.coupling)

    support_space = fj.coupling.as_space()
    upsets = enumerate_upsets(d)
    cache = {u.members: oblique_factor_partition(fj, u) for u in upsets}
    pairs = []
    for a in upsets:
        for b in upsets:
            meet = cache[(a & b).members]
            rep = relative_independence(
                (cache[a.members], cache[b.members]), (meet, meet), support_space
            )
            pairs.append((frozenset(a.members), frozenset(b.members), rep))
    return SelfJoiningStructureReport(clause1, tuple(pairs))
