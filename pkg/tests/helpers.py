"""Shared builders for the test suite."""
from __future__ import annotations

from fractions import Fraction
from itertools import product as iter_product

from ergolab.measure import ExactProbabilitySpace
from ergolab.systems import FiniteZdSystem


def cyclic_system(n: int, *shifts: int) -> FiniteZdSystem:
    """Uniform Z_n with one translation generator per shift."""
    space = ExactProbabilitySpace.uniform(tuple(range(n)))
    gens = tuple(tuple((x + s) % n for x in range(n)) for s in shifts)
    return FiniteZdSystem(space, gens)


def torus_system(mod: int, *vectors: tuple[int, ...]) -> FiniteZdSystem:
    """Uniform (Z_mod)^m with one translation generator per vector."""
    m = len(vectors[0])
    points = list(iter_product(range(mod), repeat=m))
    index = {p: i for i, p in enumerate(points)}
    space = ExactProbabilitySpace.uniform(tuple(points))
    gens = []
    for v in vectors:
        gens.append(
            tuple(
                index[tuple((p[j] + v[j]) % mod for j in range(m))] for p in points
            )
        )
    return FiniteZdSystem(space, tuple(gens))


def three_direction_torus(mod: int = 5) -> FiniteZdSystem:
    """The two-torus with directions (1,0), (0,1), (1,1): pairwise independent
    invariant factors that jointly generate everything."""
    return torus_system(mod, (1, 0), (0, 1), (1, 1))


def brute_cesaro(sys: FiniteZdSystem, sets, n_terms: int) -> Fraction:
    """Independent oracle: the plain finite average over n = 1..n_terms."""
    total = Fraction(0)
    supp = sys.space.support()
    for n in range(1, n_terms + 1):
        perms = [sys.act(tuple(n if j == i else 0 for j in range(sys.dim)))
                 for i in range(sys.dim)]
        for x in supp:
            if all(p[x] in s for p, s in zip(perms, sets)):
                total += sys.space.weights[x]
    return total / n_terms
