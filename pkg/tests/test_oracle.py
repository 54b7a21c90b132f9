import itertools
from math import log

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from inertia.grammar import parse_endo, parse_group
from inertia.oracle import (
    CapExceeded,
    FiniteAbelianGroup,
    FiniteEndo,
    FiniteSubgroup,
    brute_force_subgroups,
    check_closure_bound,
    closure_bounds,
    count_subgroups,
    count_subgroups_formula,
    cyclic_module,
    enumerate_subgroups,
    fs_bound,
    fs_bounds,
    phi_closure_down,
    phi_closure_up,
    random_endo,
    span,
)


def F(*orders):
    return FiniteAbelianGroup(orders)


def swap(G):
    return FiniteEndo.from_matrix(G, [[0, 1], [1, 0]])


def shift(G):
    n = G.n
    return FiniteEndo.from_matrix(G, [[1 if i == (j + 1) % n else 0 for j in range(n)] for i in range(n)])


# ------------------------------------------------- independent reference
# Every subgroup of a group with n cyclic factors is spanned by n elements,
# so spanning all n-tuples finds each one.  Closures iterate images directly.


def ref_subgroups(G):
    seen = set()
    for gens in itertools.combinations_with_replacement(range(G.order), G.n):
        seen.add(span(G, gens).elements)
    return seen


def ref_up(G, X, fam):
    X = set(X)
    while True:
        gens = X | {f(x) for f in fam for x in X}
        Y = set(span(G, gens).elements)
        if Y == X:
            return frozenset(X)
        X = Y


def ref_down(X, fam):
    X = set(X)
    while True:
        Y = {x for x in X if all(f(x) in X for f in fam)}
        if Y == X:
            return frozenset(X)
        X = Y


def ref_fs(G, fam):
    return max(len(ref_up(G, X, fam)) // len(ref_down(X, fam)) for X in ref_subgroups(G))


def ref_closure(G, f):
    p = G.prime
    m = max(round(log(len(X) // len(ref_down(X, [f])), p)) for X in ref_subgroups(G))
    w = max(round(log(len(ref_up(G, X, [f])) // len(X), p)) for X in ref_subgroups(G))
    return m, w


# ------------------------------------------------------------------ groups


class TestGroup:
    def test_encode_decode(self):
        G = F(4, 2, 3)
        for x in range(G.order):
            assert G.encode(G.decode(x)) == x
        assert G.add(G.encode([3, 1, 2]), G.encode([1, 1, 2])) == G.encode([0, 0, 1])

    def test_from_descriptor(self):
        G = FiniteAbelianGroup.from_descriptor(parse_group("Z(2^2) + Z(3)^2"))
        assert G.orders == (4, 3, 3) and G.order == 36

    def test_infinite_descriptor_rejected(self):
        with pytest.raises(ValueError):
            FiniteAbelianGroup.from_descriptor(parse_group("Z(2)^w"))

    def test_cap(self):
        with pytest.raises(CapExceeded):
            F(2, 2, 2).check_cap(4)

    def test_order_of_image_checked(self):
        with pytest.raises(ValueError):
            FiniteEndo.from_columns(F(2, 4), [[0, 1], [0, 1]])


class TestEnumerate:
    @pytest.mark.parametrize(
        "orders, n",
        [((4,), 3), ((2, 2), 5), ((4, 2), 8), ((3, 3), 6), ((2, 2, 2), 16), ((8,), 4), ((4, 4), 15)],
    )
    def test_counts(self, orders, n):
        G = F(*orders)
        assert count_subgroups(G) == n
        assert len(ref_subgroups(G)) == n

    def test_table_agrees_with_reference(self):
        G = F(4, 2)
        table = enumerate_subgroups(G)
        assert {s.elements for s in table.subgroups} == ref_subgroups(G)
        assert table.verify_count()

    def test_brute_force_route(self):
        G = F(2, 4)
        assert {s.elements for s in brute_force_subgroups(G)} == ref_subgroups(G)

    def test_join_and_meet(self):
        G = F(2, 2)
        t = enumerate_subgroups(G)
        a = t.index[span(G, [G.encode([1, 0])]).elements]
        b = t.index[span(G, [G.encode([0, 1])]).elements]
        assert t.subgroups[t.join(a, b)].order == 4
        assert t.subgroups[t.meet(a, b)].order == 1

    def test_max_subgroups(self):
        with pytest.raises(CapExceeded):
            enumerate_subgroups(F(2, 2, 2), max_subgroups=10)

    def test_formula(self):
        # Z(p)^2 has p + 3 subgroups
        for p in (2, 3, 5, 7):
            assert count_subgroups_formula([1, 1], p) == p + 3
        assert count_subgroups_formula([2, 1], 2) == 8

    def test_coprime_multiplicative(self):
        assert count_subgroups(F(4, 3, 3)) == count_subgroups(F(4)) * count_subgroups(F(3, 3))
        assert count_subgroups(F(2, 2, 5)) == 5 * 2


@pytest.mark.parametrize(
    "part, p", [([1, 1, 1], 3), ([2, 2], 2), ([3, 1], 2), ([2, 1, 1], 2), ([2, 1], 3), ([1, 1, 1, 1], 2)]
)
def test_kernel_matches_formula(part, p):
    G = F(*[p**e for e in part])
    assert count_subgroups(G) == count_subgroups_formula(part, p)


# ---------------------------------------------------------------- closures


class TestClosures:
    def test_up_swap(self):
        G = F(3, 3)
        X = span(G, [G.encode([1, 0])])
        assert phi_closure_up(X, [swap(G)]).order == 9

    def test_down_swap(self):
        G = F(3, 3)
        X = span(G, [G.encode([1, 0])])
        assert phi_closure_down(X, [swap(G)]).order == 1

    def test_fixed_points(self):
        G = F(3, 3)
        X = span(G, [G.encode([1, 1])])
        assert phi_closure_up(X, [swap(G)]) == X
        assert phi_closure_down(X, [swap(G)]) == X
        whole = FiniteSubgroup(G, frozenset(range(9)))
        assert phi_closure_down(whole, [swap(G)]) == whole

    def test_empty_family(self):
        G = F(4, 2)
        X = span(G, [G.encode([1, 1])])
        assert phi_closure_up(X, []) == X and phi_closure_down(X, []) == X


class TestBounds:
    def test_multiplication(self):
        G = F(4, 2, 2)
        assert tuple(check_closure_bound(G, FiniteEndo.multiplication(G, 3))) == (0, 0, True)

    def test_swap_on_Z2_squared(self):
        G = F(2, 2)
        assert tuple(check_closure_bound(G, swap(G))) == (1, 1, True)
        assert ref_closure(G, swap(G)) == (1, 1)

    def test_cyclic_shift(self):
        G = F(3, 3, 3)
        b = check_closure_bound(G, shift(G))
        assert b.holds and (b.m, b.worst) == ref_closure(G, shift(G)) == (2, 2)

    def test_needs_p_group(self):
        with pytest.raises(ValueError):
            check_closure_bound(F(2, 3), FiniteEndo.multiplication(F(2, 3), 1))

    def test_fs_multiplications(self):
        G = F(4, 2)
        assert fs_bound(G, [FiniteEndo.multiplication(G, k) for k in (0, 1, 3)]) == 1

    def test_fs_empty(self):
        assert fs_bound(F(4, 2), []) == 1

    def test_fs_shear(self):
        G = F(2, 4)
        shear = FiniteEndo.from_matrix(G, [[1, 1], [0, 1]])
        assert fs_bound(G, [shear]) == ref_fs(G, [shear]) == 4

    def test_from_descriptor_endo(self):
        A = parse_group("Z(2)^2")
        phi = parse_endo("matrix{1: [[0,1],[1,0]]}", A)
        G = FiniteAbelianGroup.from_descriptor(A)
        assert fs_bound(G, [phi]) == ref_fs(G, [swap(G)]) == 4


# --------------------------------------------------------------- properties

small_groups = st.sampled_from([(2, 2), (2, 4), (4, 4), (3, 3), (3, 9), (2, 2, 2), (2, 2, 4), (9,)])


@settings(max_examples=25, deadline=None)
@given(small_groups, st.integers(0, 2**32 - 1))
def test_kernel_agrees_with_reference(orders, seed):
    G = F(*orders)
    rng = np.random.default_rng(seed)
    fam = [random_endo(G, rng) for _ in range(int(rng.integers(1, 3)))]
    assert fs_bound(G, fam, check=True) == ref_fs(G, fam)
    b = check_closure_bound(G, fam[0])
    assert (b.m, b.worst) == ref_closure(G, fam[0])


@settings(max_examples=25, deadline=None)
@given(small_groups, st.integers(0, 2**32 - 1))
def test_closure_bound_holds(orders, seed):
    G = F(*orders)
    rng = np.random.default_rng(seed)
    for b in closure_bounds(G, [random_endo(G, rng) for _ in range(4)], check=True):
        assert b.holds and b.worst <= b.m**2


@settings(max_examples=25, deadline=None)
@given(small_groups, st.integers(0, 2**32 - 1))
def test_fs_monotone_in_family(orders, seed):
    G = F(*orders)
    rng = np.random.default_rng(seed)
    a, b = random_endo(G, rng), random_endo(G, rng)
    one, both = fs_bounds(G, [[a], [a, b]])
    assert one <= both


@settings(max_examples=25, deadline=None)
@given(small_groups, st.integers(0, 2**32 - 1), st.data())
def test_closure_sandwich(orders, seed, data):
    G = F(*orders)
    rng = np.random.default_rng(seed)
    fam = [random_endo(G, rng)]
    X = span(G, [data.draw(st.integers(0, G.order - 1)) for _ in range(2)])
    up, down = phi_closure_up(X, fam), phi_closure_down(X, fam)
    assert down <= X <= up
    for Y in (up, down):
        assert all(fam[0](y) in Y for y in Y.elements)
    assert phi_closure_up(up, fam) == up and phi_closure_down(down, fam) == down


# ----------------------------------------------------------- cyclic module


class TestCyclicModule:
    def test_multiplication(self):
        G = F(8)
        mod = cyclic_module(1, FiniteEndo.multiplication(G, 3))
        assert mod.finite and mod.order == 8

    def test_swap(self):
        G = F(2, 2)
        mod = cyclic_module(G.encode([1, 0]), swap(G))
        assert mod.finite and mod.order == 4

    def test_doubling_on_Z(self):
        A = parse_group("Z")
        mod = cyclic_module(A.element({(0, 0): 1}), parse_endo("mult 2", A))
        assert not mod.finite and mod.rank == 1 and mod.torsion_order == 1

    def test_mixed_torsion(self):
        A = parse_group("Z + Z(4)")
        phi = parse_endo("mult 1 + finitary{1.0 -> 2.0:1}", A)
        mod = cyclic_module(A.element({(0, 0): 1}), phi)
        assert mod.rank == 1 and mod.torsion_order == 4

    def test_cap(self):
        A = parse_group("Q[2]")
        with pytest.raises(CapExceeded):
            cyclic_module(A.element({(0, 0): 1}), parse_endo("mult 1/2", A), cap=8)
