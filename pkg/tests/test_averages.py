"""Averages, self-joinings, recurrence, and the van der Corput estimate."""
from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations, product as iter_product

import pytest

from helpers import brute_cesaro, cyclic_system, three_direction_torus, torus_system

from ergolab.averages import (
    FurstenbergJoining,
    RecurrenceCertificate,
    VectorSequence,
    cesaro_limit,
    check_offdiagonal_invariance,
    difference_subgroup,
    direction_period,
    furstenberg_self_joining,
    multiple_recurrence_check,
    nonconventional_average,
    oblique_copy,
    project_joining,
    recurrence_certificate,
    recurrence_certificates_exhaustive,
    self_joining_structure_report,
    van_der_corput_inequality,
)
from ergolab.generators import random_system, random_vector_sequence
from ergolab.measure import Partition, SimpleFunction, support_pullback_partition
from ergolab.systems import FiniteZdSystem, SubgroupSpec, invariant_factor

F = Fraction


# -- nonconventional averages ---------------------------------------------------

def test_average_identity_action_returns_function():
    sys_ = cyclic_system(4, 0)
    f = SimpleFunction((F(1), F(0), F(2), F(0)))
    for N in (1, 3, 7):
        assert nonconventional_average(sys_, [f], N) == f


def test_average_of_ones_is_one():
    sys_ = cyclic_system(3, 1, 2)
    one = SimpleFunction.constant(3, 1)
    out = nonconventional_average(sys_, [one, one], 5)
    assert set(out.values) == {F(1)}


def test_average_direct_summation_oracle():
    # Z3, generators +1 and +2, indicators of {0}, N = 3.
    sys_ = cyclic_system(3, 1, 2)
    ind = SimpleFunction.indicator(3, {0})
    out = nonconventional_average(sys_, [ind, ind], 3)
    # Oracle: only n = 3 contributes, at x = 0.
    expected = [F(0)] * 3
    for x in range(3):
        hits = sum(
            1 for n in range(1, 4) if (x + n) % 3 == 0 and (x + 2 * n) % 3 == 0
        )
        expected[x] = F(hits, 3)
    assert out.values == tuple(expected)
    assert out.values == (F(1, 3), F(0), F(0))


def test_average_summands_periodic_and_limit_matches_joining():
    rng = random.Random(2)
    for _ in range(15):
        sys_ = random_system(rng, max_points=7, dim=rng.randint(1, 3))
        funcs = [
            SimpleFunction(
                tuple(F(rng.randint(-2, 2)) for _ in range(len(sys_)))
            )
            for _ in range(sys_.dim)
        ]
        L = direction_period(sys_, range(sys_.dim))
        fj = furstenberg_self_joining(sys_)
        partial = {
            N: nonconventional_average(sys_, funcs, N) for N in range(1, 3 * L + 1)
        }
        limit_fn = partial[L]
        # Summand periodicity: each window of length L sums to L times the
        # limit, so N S_N - (N - L) S_{N-L} is constant across N <= 3L.
        for N in range(L + 1, 3 * L + 1):
            window = tuple(
                N * a - (N - L) * b
                for a, b in zip(partial[N].values, partial[N - L].values)
            )
            assert window == tuple(L * v for v in limit_fn.values)
        for m in (2, 3):
            assert partial[m * L] == limit_fn
        # The integral of the limit is the joining integral of the tensor.
        tensor = sum(
            (
                v * prod
                for t, v in fj.coupling.mass.items()
                for prod in [_prod(funcs[i].values[t[i]] for i in range(sys_.dim))]
            ),
            F(0),
        )
        assert limit_fn.integral(sys_.space) == tensor


def _prod(xs):
    out = F(1)
    for x in xs:
        out *= x
    return out


# -- exact Cesaro limits ----------------------------------------------------------

def test_cesaro_one_dimensional_is_measure():
    rng = random.Random(4)
    for _ in range(20):
        sys_ = random_system(rng, max_points=8, dim=1)
        a = frozenset(x for x in range(len(sys_)) if rng.random() < 0.5)
        assert cesaro_limit(sys_, [a]) == sys_.space.measure(a)


def test_cesaro_z3_worked_value():
    sys_ = cyclic_system(3, 1, 2)
    assert cesaro_limit(sys_, [{0}, {0}]) == F(1, 9)
    # Period-enumeration oracle, computed independently.
    assert brute_cesaro(sys_, [{0}, {0}], 3) == F(1, 9)


def test_cesaro_full_set_marginalizes():
    sys_ = cyclic_system(4, 1, 2)
    full = frozenset(range(4))
    for a in ({0}, {1, 2}, {0, 3}):
        assert cesaro_limit(sys_, [full, a]) == cesaro_limit_one_direction(sys_, a)


def cesaro_limit_one_direction(sys_, a):
    sub = FiniteZdSystem(sys_.space, (sys_.generators[1],))
    return cesaro_limit(sub, [a])


# -- the self-joining --------------------------------------------------------------

def test_joining_singleton_direction_is_the_measure():
    rng = random.Random(6)
    for _ in range(10):
        sys_ = random_system(rng, max_points=8, dim=2)
        fj = furstenberg_self_joining(sys_, (0,))
        assert fj.coupling.mass == {
            (x,): w for x, w in enumerate(sys_.space.weights) if w > 0
        }


def test_joining_z4_worked_value_with_oracle():
    sys_ = cyclic_system(4, 1, 2)
    fj = furstenberg_self_joining(sys_)
    assert fj.period == 4
    assert fj.coupling.mass[(0, 0)] == F(1, 16)
    # Oracle: enumerate the off-diagonal measures over one period directly.
    acc = {}
    for n in range(4):
        for x in range(4):
            key = ((x + n) % 4, (x + 2 * n) % 4)
            acc[key] = acc.get(key, F(0)) + F(1, 4)
    assert {k: v / 4 for k, v in acc.items()} == dict(fj.coupling.mass)


def test_joining_equal_generators_is_diagonal():
    sys_ = cyclic_system(5, 2, 2)
    fj = furstenberg_self_joining(sys_)
    assert set(fj.coupling.mass) == {(x, x) for x in range(5)}


def test_offdiagonal_invariance_randomized():
    rng = random.Random(8)
    for _ in range(100):
        sys_ = random_system(rng, max_points=8, dim=rng.randint(1, 3))
        fj = furstenberg_self_joining(sys_)
        assert check_offdiagonal_invariance(fj)


def test_projection_consistency_randomized():
    rng = random.Random(9)
    for _ in range(40):
        sys_ = random_system(rng, max_points=7, dim=rng.randint(2, 3))
        dirs = tuple(range(sys_.dim))
        fj = furstenberg_self_joining(sys_, dirs)
        for r in range(1, len(dirs) + 1):
            for e in combinations(dirs, r):
                assert (
                    project_joining(fj, e).mass
                    == furstenberg_self_joining(sys_, e).coupling.mass
                )


def test_projection_trivial_cases():
    sys_ = cyclic_system(4, 1, 3)
    fj = furstenberg_self_joining(sys_)
    assert project_joining(fj, fj.directions) == fj.coupling
    assert project_joining(fj, (1,)).mass == {
        (x,): F(1, 4) for x in range(4)
    }


def test_diagonal_restriction_of_joining():
    # Restricted to blocks of the difference-invariant factor, the joining is
    # the diagonal measure.
    sys_ = three_direction_torus(5)
    fj = furstenberg_self_joining(sys_, (0, 1))
    phi = invariant_factor(sys_, difference_subgroup(3, (0, 1)))
    for a, b in iter_product(phi.blocks, repeat=2):
        mass = fj.coupling.event_mass([frozenset(a), frozenset(b)])
        assert mass == sys_.space.measure(set(a) & set(b))


def test_oblique_copy_equal_generators():
    sys_ = cyclic_system(4, 1, 1)
    fj = furstenberg_self_joining(sys_)
    oc = oblique_copy(fj, (0, 1))
    # Equal generators: the difference factor is everything, pulled back it
    # separates the diagonal support completely.
    assert len(oc.blocks) == len(fj.coupling.support())


def test_oblique_copy_torus_agreement():
    sys_ = three_direction_torus(5)
    fj = furstenberg_self_joining(sys_)
    for e in ((0, 1), (0, 2), (1, 2), (0, 1, 2)):
        oc = oblique_copy(fj, e)  # raises on cross-coordinate disagreement
        assert oc.size == len(fj.coupling.support())


def test_oblique_copy_coarse_for_mixing_directions():
    # With generators +1 and +2 on five points, the difference direction acts
    # transitively, so the oblique copy is the one-block partition.
    sys_ = cyclic_system(5, 1, 2)
    fj = furstenberg_self_joining(sys_)
    oc = oblique_copy(fj, (0, 1))
    assert len(oc.blocks) == 1


def test_oblique_copy_needs_two_directions():
    sys_ = cyclic_system(3, 1, 2)
    fj = furstenberg_self_joining(sys_)
    with pytest.raises(ValueError):
        oblique_copy(fj, (0,))


# -- recurrence ---------------------------------------------------------------------

def test_recurrence_null_set():
    sp_weights = (F(1, 2), F(1, 2), F(0))
    from ergolab.measure import ExactProbabilitySpace

    sys_ = FiniteZdSystem(
        ExactProbabilitySpace((0, 1, 2), sp_weights), ((1, 0, 2), (0, 1, 2))
    )
    cert = recurrence_certificate(sys_, {2})
    assert cert.limit == 0 and cert.witness is None


def test_recurrence_worked_example():
    sys_ = cyclic_system(3, 1, 2)
    cert = recurrence_certificate(sys_, {0})
    assert cert == RecurrenceCertificate(F(1, 9), 3)


def test_recurrence_full_set():
    sys_ = cyclic_system(3, 1, 2)
    cert = recurrence_certificate(sys_, {0, 1, 2})
    assert cert.limit == 1 and cert.witness == 1


def test_recurrence_exhaustive_agrees_with_single_calls():
    rng = random.Random(10)
    for _ in range(8):
        sys_ = random_system(rng, max_points=7, dim=rng.randint(1, 3))
        table = recurrence_certificates_exhaustive(sys_)
        for _ in range(12):
            mask = rng.randrange(1 << len(sys_))
            aset = {x for x in range(len(sys_)) if mask >> x & 1}
            assert table[mask] == recurrence_certificate(sys_, aset)


def test_multiple_recurrence_trivial_cases():
    sys_ = cyclic_system(4, 1, 2)
    assert multiple_recurrence_check(sys_, [{0}, {1}])  # disjoint
    assert multiple_recurrence_check(sys_, [set(range(4)), set(range(4))])


def test_joining_mass_dominates_intersection():
    # The period average includes the zero-offset term, so the product mass
    # is at least the intersection measure divided by the period.
    rng = random.Random(12)
    for _ in range(30):
        sys_ = random_system(rng, max_points=6, dim=2)
        fj = furstenberg_self_joining(sys_)
        a = frozenset(x for x in range(len(sys_)) if rng.random() < 0.5)
        b = frozenset(x for x in range(len(sys_)) if rng.random() < 0.5)
        lhs = fj.coupling.event_mass([a, b])
        assert lhs * fj.period >= sys_.space.measure(a & b)


# -- van der Corput -------------------------------------------------------------------

def test_vdc_constant_sequence_equality():
    v = (F(2, 3), F(-1, 2))
    seq = VectorSequence(tuple(v for _ in range(8)))
    rep = van_der_corput_inequality(seq, 4, 2)
    norm = v[0] * v[0] + v[1] * v[1]
    assert rep.lhs == rep.rhs == norm
    assert rep.holds


def test_vdc_alternating_sequence():
    v = (F(1), F(2))
    seq = VectorSequence(
        tuple(v if i % 2 == 0 else tuple(-c for c in v) for i in range(10))
    )
    rep = van_der_corput_inequality(seq, 4, 2)
    assert rep.lhs == 0 and rep.rhs == 0 and rep.holds


def test_vdc_randomized():
    rng = random.Random(13)
    for _ in range(120):
        length = rng.randint(4, 16)
        seq = VectorSequence(random_vector_sequence(rng, rng.randint(1, 4), length))
        N = rng.randint(1, length - 2)
        H = rng.randint(1, length - N)
        assert van_der_corput_inequality(seq, N, H).holds


def test_vdc_index_overflow():
    seq = VectorSequence(((F(1),),) * 4)
    with pytest.raises(ValueError):
        van_der_corput_inequality(seq, 4, 2)


# -- structure predicates ---------------------------------------------------------------

def test_structure_report_three_direction_torus():
    rep = self_joining_structure_report(three_direction_torus(5))
    assert rep.coordinate_holds
    assert rep.oblique_holds


def test_structure_report_d2_oblique_poset_is_small():
    sys_ = cyclic_system(4, 1, 2)
    rep = self_joining_structure_report(sys_)
    # d = 2: the only nonempty up-set is {{0,1}}; all pairs are degenerate.
    assert len(rep.oblique_pairs) == 4
    assert rep.oblique_holds


def test_structure_report_needs_two_directions():
    with pytest.raises(ValueError):
        self_joining_structure_report(cyclic_system(3, 1))
