#!/usr/bin/env python3
"""Print the bundled worked examples with their independent oracles.

Runs the small closed-form cases end to end: the two exact recurrence values,
the three-direction torus independence pattern, and the rotation extension.
"""
from __future__ import annotations

import sys
from fractions import Fraction
from itertools import combinations
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from ergolab.averages import furstenberg_self_joining, recurrence_certificate
from ergolab.measure import ExactProbabilitySpace, Partition, common_refinement, relative_independence
from ergolab.systems import (
    FiniteZdSystem,
    GroupRotationSystem,
    SubgroupSpec,
    in_partially_trivial_join,
    invariant_factor,
    rotation_extension,
)


def cyclic(n, *shifts):
    space = ExactProbabilitySpace.uniform(tuple(range(n)))
    gens = tuple(tuple((x + s) % n for x in range(n)) for s in shifts)
    return FiniteZdSystem(space, gens)


def torus(mod, *vectors):
    from itertools import product

    points = list(product(range(mod), repeat=len(vectors[0])))
    index = {p: i for i, p in enumerate(points)}
    space = ExactProbabilitySpace.uniform(tuple(points))
    gens = tuple(
        tuple(index[tuple((p[j] + v[j]) % mod for j in range(len(v)))] for p in points)
        for v in vectors
    )
    return FiniteZdSystem(space, gens)


def main() -> int:
    z3 = cyclic(3, 1, 2)
    cert = recurrence_certificate(z3, {0})
    print(f"Z3 with shifts (+1,+2), A = {{0}}: limit = {cert.limit}, witness n = {cert.witness}")

    z4 = cyclic(4, 1, 2)
    fj = furstenberg_self_joining(z4)
    print(f"Z4 with shifts (+1,+2): self-joining mass at (0,0) = {fj.coupling.mass[(0, 0)]}, period = {fj.period}")

    tri = torus(5, (1, 0), (0, 1), (1, 1))
    factors = [invariant_factor(tri, SubgroupSpec.basis_vector(3, i)) for i in range(3)]
    trivial = Partition.one_block(25)
    for i, j in combinations(range(3), 2):
        rep = relative_independence((factors[i], factors[j]), (trivial, trivial), tri.space)
        gen = common_refinement(factors[i], factors[j]) == Partition.singletons(25)
        print(f"torus directions {i},{j}: independent = {rep.holds}, jointly generating = {gen}")
    triple = relative_independence(tuple(factors), (trivial,) * 3, tri.space)
    print(f"torus all three directions independent = {triple.holds}")

    rot = GroupRotationSystem((2,), ((1,), (1,)))
    ext, _ = rotation_extension(rot)
    print(
        f"rotation Z2 with images (1,1): in join = {in_partially_trivial_join(rot)}, "
        f"extension orders = {ext.orders}, extension in join = {in_partially_trivial_join(ext)}"
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
