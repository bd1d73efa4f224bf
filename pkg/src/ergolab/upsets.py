"""Upward-closed families of index subsets of size at least 2.

Members are bitmasks over ``range(d)``.  The poset is the collection of
subsets of ``{0, ..., d-1}`` of size >= 2 ordered by inclusion; an up-set is
closed upward under inclusion.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable


def mask_of(indices: Iterable[int]) -> int:
    out = 0
    for i in indices:
        out |= 1 << i
    return out


def bits_of(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def ground_masks(d: int) -> tuple[int, ...]:
    """All subsets of ``range(d)`` of size >= 2, as bitmasks, sorted."""
    out = []
    for size in range(2, d + 1):
        for combo in combinations(range(d), size):
            out.append(mask_of(combo))
    return tuple(sorted(out))


@dataclass(frozen=True)
class UpSet:
    """An upward-closed set of bitmasks of size >= 2 over ``range(d)``."""

    d: int
    members: frozenset[int]

    def __post_init__(self) -> None:
        members = frozenset(int(m) for m in self.members)
        object.__setattr__(self, "members", members)
        full = mask_of(range(self.d))
        for m in members:
            if popcount(m) < 2:
                raise ValueError("members must have size at least 2")
            if m & ~full:
                raise ValueError("member out of range")
        for m in members:
            for i in range(self.d):
                sup = m | (1 << i)
                if sup != m and sup not in members:
                    raise ValueError("family is not upward closed")

    @classmethod
    def closure(cls, d: int, antichain: Iterable[Iterable[int]]) -> "UpSet":
        """Upward closure of a family of generating subsets."""
        gens = [mask_of(a) for a in antichain]
        if any(popcount(g) < 2 for g in gens):
            raise ValueError("generators must have size at least 2")
        members = {m for m in ground_masks(d) if any(m & g == g for g in gens)}
        return cls(d, frozenset(members))

    @classmethod
    def principal(cls, d: int, e: Iterable[int]) -> "UpSet":
        """All supersets of ``e`` of size >= 2 (``e`` itself may be small)."""
        em = mask_of(e)
        return cls(d, frozenset(m for m in ground_masks(d) if m & em == em))

    @classmethod
    def empty(cls, d: int) -> "UpSet":
        return cls(d, frozenset())

    @classmethod
    def full(cls, d: int) -> "UpSet":
        return cls(d, frozenset(ground_masks(d)))

    def intersect(self, other: "UpSet") -> "UpSet":
        if self.d != other.d:
            raise ValueError("up-sets live over different ground dimensions")
        return UpSet(self.d, self.members & other.members)

    __and__ = intersect

    def depth(self) -> int:
        """Minimal member size; undefined (raises) for the empty up-set."""
        if not self.members:
            raise ValueError("the empty up-set has no depth")
        return min(popcount(m) for m in self.members)

    def minimal_members(self) -> frozenset[int]:
        out = set()
        for m in self.members:
            if not any(o != m and o & m == o for o in self.members):
                out.add(m)
        return frozenset(out)

    def __contains__(self, item: int) -> bool:
        return int(item) in self.members

    def __le__(self, other: "UpSet") -> bool:
        return self.d == other.d and self.members <= other.members


def enumerate_upsets(d: int, include_empty: bool = True) -> tuple[UpSet, ...]:
    """All up-sets over subsets of ``range(d)`` of size >= 2.

    Exhaustive for d <= 4; for larger d only principal up-sets (plus the full
    and, optionally, the empty one) are returned, since the poset of up-sets
    explodes combinatorially.
    """
    if d <= 4:
        ground = ground_masks(d)
        out = []
        for bits in range(1 << len(ground)):
            members = frozenset(
                ground[i] for i in range(len(ground)) if bits >> i & 1
            )
            try:
                out.append(UpSet(d, members))
            except ValueError:
                continue
        if not include_empty:
            out = [u for u in out if u.members]
        return tuple(sorted(out, key=lambda u: sorted(u.members)))
    out = [UpSet.full(d)]
    if include_empty:
        out.append(UpSet.empty(d))
    for m in ground_masks(d):
        out.append(UpSet.closure(d, [bits_of(m)]))
    unique = {u.members: u for u in out}
    return tuple(unique.values())
