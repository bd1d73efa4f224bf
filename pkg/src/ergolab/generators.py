"""Seeded random construction of finite systems, joinings, and laws.

Every generator takes an explicit ``random.Random`` so that sampling is
deterministic given a seed; the CLI records the seed in its reports.

Random commuting tuples are built from translations on disjoint unions of
finite abelian groups: translations always commute, and weight preservation
is arranged by making weights constant on the orbits of the generated
translation subgroup.  Cyclic orders are kept small so that the tuple period
stays desk-scale.
"""
from __future__ import annotations

import random
from fractions import Fraction

from .measure import ExactProbabilitySpace, Partition
from .systems import FiniteZdSystem, GroupRotationSystem, SubgroupSpec

_COMPONENT_ORDERS = (1, 2, 3, 4, 5, 6)


def random_weights(rng: random.Random, n: int, allow_zero: bool = True) -> tuple[Fraction, ...]:
    """Random exact weights on n points summing to 1."""
    while True:
        nums = [rng.randint(0 if allow_zero else 1, 4) for _ in range(n)]
        total = sum(nums)
        if total > 0:
            return tuple(Fraction(v, total) for v in nums)


def random_space(rng: random.Random, n: int, allow_zero: bool = True) -> ExactProbabilitySpace:
    return ExactProbabilitySpace(
        tuple(range(n)), random_weights(rng, n, allow_zero)
    )


def random_system(
    rng: random.Random,
    max_points: int = 12,
    dim: int = 2,
    allow_zero: bool = True,
) -> FiniteZdSystem:
    """A random finite system: commuting translations on a disjoint union of
    small abelian groups, with weights constant on translation orbits."""
    components: list[GroupRotationSystem] = []
    remaining = max_points
    for _ in range(rng.randint(1, 3)):
        if remaining < 1:
            break
        choices = [o for o in _COMPONENT_ORDERS if o <= remaining]
        o1 = rng.choice(choices)
        orders = [o1]
        if rng.random() < 0.3:
            sub = [o for o in _COMPONENT_ORDERS if o1 * o <= remaining]
            if sub:
                orders.append(rng.choice(sub))
        size = 1
        for o in orders:
            size *= o
        remaining -= size
        rot = GroupRotationSystem(
            tuple(orders),
            tuple(
                tuple(rng.randrange(o) for o in orders) for _ in range(dim)
            ),
        )
        components.append(rot)
    if not components:
        components.append(
            GroupRotationSystem((1,), tuple((0,) for _ in range(dim)))
        )

    labels: list = []
    perms: list[list[int]] = [[] for _ in range(dim)]
    orbit_ids: list[int] = []
    orbit_counter = 0
    for ci, rot in enumerate(components):
        elems = rot.elements()
        index = {e: i for i, e in enumerate(elems)}
        offset = len(labels)
        labels.extend((ci, e) for e in elems)
        for i in range(dim):
            for e in elems:
                perms[i].append(offset + index[rot.add(e, rot.phi[i])])
        # Orbits of the generated subgroup are the cosets.
        sub = rot.generated_subgroup(rot.phi)
        coset_of: dict = {}
        for e in elems:
            rep = min(rot.add(e, h) for h in sub)
            if rep not in coset_of:
                coset_of[rep] = orbit_counter
                orbit_counter += 1
        for e in elems:
            rep = min(rot.add(e, h) for h in sub)
            orbit_ids.append(coset_of[rep])

    while True:
        orbit_weight = [rng.randint(0 if allow_zero else 1, 4) for _ in range(orbit_counter)]
        nums = [orbit_weight[orbit_ids[x]] for x in range(len(labels))]
        total = sum(nums)
        if total > 0:
            break
    weights = tuple(Fraction(v, total) for v in nums)
    space = ExactProbabilitySpace(tuple(labels), weights)
    return FiniteZdSystem(space, tuple(tuple(p) for p in perms))


def random_subset(rng: random.Random, n: int) -> frozenset[int]:
    return frozenset(i for i in range(n) if rng.random() < 0.5)


def random_nonnull_subset(rng: random.Random, space: ExactProbabilitySpace) -> frozenset[int]:
    supp = space.support()
    while True:
        s = random_subset(rng, len(space))
        if any(i in s for i in supp):
            return s


def random_partition(rng: random.Random, n: int, max_blocks: int | None = None) -> Partition:
    k = rng.randint(1, max_blocks or n)
    labels = [rng.randrange(k) for _ in range(n)]
    return Partition.from_labels(labels)


def random_subgroup(rng: random.Random, dim: int, max_vectors: int = 1) -> SubgroupSpec:
    vectors = []
    for _ in range(rng.randint(0, max_vectors)):
        vectors.append(tuple(rng.randint(-2, 2) for _ in range(dim)))
    return SubgroupSpec(tuple(vectors))


def random_vector_sequence(
    rng: random.Random, dim: int = 2, length: int = 8
) -> "tuple[tuple[Fraction, ...], ...]":
    return tuple(
        tuple(Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for _ in range(dim))
        for _ in range(length)
    )
