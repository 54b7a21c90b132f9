from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from inertia.grammar import ParseError, parse_group
from inertia.groups import (
    OMEGA,
    AtLeast,
    Finite,
    GroupDescriptor,
    Localized,
    PrimeSet,
    SubgroupHandle,
    component,
    divisible_part,
    is_commensurable,
    n_socle,
    section_order,
    torsion_part,
)
from inertia.lattice import smith_normal_form


def G(text):
    return parse_group(text)


def Z_n(n):
    return GroupDescriptor(((Localized(PrimeSet()), n),))


class TestPrimeSet:
    def test_rejects_composites(self):
        with pytest.raises(ValueError):
            PrimeSet.of(4)

    def test_all_marker(self):
        assert PrimeSet.all().is_all
        assert 101 in PrimeSet.all()
        assert str(PrimeSet.of(5, 2, 2)) == "{2,5}"

    def test_of_number(self):
        assert PrimeSet.of_number(360) == PrimeSet.of(2, 3, 5)


class TestGrammar:
    def test_round_trip_text(self):
        A = G("Z(2^3)^2 + Z(3^inf) + Q[2] + Z^w + Q")
        assert [type(a).__name__ for a, _ in A.slots] == ["Cyclic", "Prufer", "Localized", "Localized", "Localized"]
        assert A.mult(0) == 2 and A.mult(3) is OMEGA
        assert G(str(A)) == A

    def test_parse_error_position(self):
        with pytest.raises(ParseError) as info:
            G("Z(2^3) + Z(4")
        assert info.value.line == 1 and info.value.column > 1

    def test_non_prime_power(self):
        with pytest.raises(ValueError):
            G("Z(6^1)")


class TestCanonicalParts:
    def test_torsion_part(self):
        assert torsion_part(G("Z(2^2) + Z(3^inf) + Q[2]")) == G("Z(2^2) + Z(3^inf)")
        assert torsion_part(G("Z^w")).slots == ()

    def test_torsion_of_presentation(self):
        # diag(2, 0): rows are relations on two generators
        A = GroupDescriptor.from_presentation([[2, 0], [0, 0]], 2)
        assert torsion_part(A) == G("Z(2)")
        assert A.r0 == 1

    def test_component(self):
        A = G("Z(2^2) + Z(3^2) + Z(5^inf)")
        assert component(A, PrimeSet.of(2, 5)) == G("Z(2^2) + Z(5^inf)")
        assert component(G("Z(2^2) + Z(3^2)"), PrimeSet()).slots == ()
        assert component(G("Z(2)^w + Z(3)"), PrimeSet.of(2)) == G("Z(2)^w")

    def test_socle(self):
        assert n_socle(G("Z(2^3)"), 2) == G("Z(2)")
        assert n_socle(G("Z(3^inf)"), 9) == G("Z(3^2)")
        assert n_socle(G("Q[2]"), 6).slots == ()

    def test_divisible_part(self):
        assert divisible_part(G("Z(2^2) + Z(5^inf) + Q")) == G("Z(5^inf) + Q")
        assert divisible_part(G("Z(2)^w")).slots == ()
        assert divisible_part(G("Q[2,3]")).slots == ()

    def test_derived_quantities(self):
        A = G("Z(2^3)^2 + Z(3^inf) + Q[2]^2")
        assert A.r0 == 2 and A.has_ftfr and not A.is_periodic
        assert G("Q^w").r0 is OMEGA
        assert G("Z(4) + Z(8)").exponent == 8


class TestElements:
    def test_canonical_coordinates(self):
        A = G("Z(2^2) + Z(3^inf) + Q[2]")
        x = A.element({(0, 0): 5, (1, 0): Fraction(4, 3), (2, 0): Fraction(3, 4)})
        assert x.get((0, 0)) == 1
        assert x.get((1, 0)) == Fraction(1, 3)
        assert A.order_of(A.element({(1, 0): Fraction(1, 9)})) == 9

    def test_localized_denominator_checked(self):
        with pytest.raises(ValueError):
            G("Q[2]").element({(0, 0): Fraction(1, 3)})

    def test_omega_support_is_finite(self):
        A = G("Z(2)^w")
        x = A.element({(0, 10**6): 1})
        assert x.support == [(0, 10**6)]


class TestSections:
    def test_rank_gap(self):
        A = Z_n(2)
        X = SubgroupHandle.of(A, A.element({(0, 1): 1}))
        Y = SubgroupHandle.of(A, A.element({(0, 0): 1, (0, 1): 1}))
        assert isinstance(section_order(X, Y), AtLeast)

    def test_index_two(self):
        A = G("Z")
        X = SubgroupHandle.of(A, A.element({(0, 0): 2}))
        Y = SubgroupHandle.of(A, A.element({(0, 0): 1}))
        assert section_order(X, Y) == Finite(2)

    def test_same_subgroup(self):
        A = G("Z(2^3) + Q[3] + Z(5^inf)")
        X = SubgroupHandle.of(A, A.element({(0, 0): 2, (1, 0): Fraction(1, 9), (2, 0): Fraction(1, 25)}))
        assert section_order(X, X) == Finite(1)

    def test_prufer_divisible_closure(self):
        A = G("Z(2^inf)")
        X = SubgroupHandle.of(A, A.element({(0, 0): Fraction(1, 4)}))
        D = SubgroupHandle(A, (), ((A.element({(0, 0): Fraction(1, 2)}), PrimeSet.of(2)),))
        assert isinstance(section_order(X, D), AtLeast)
        assert section_order(D, X) == Finite(1)

    def test_ambient_mismatch(self):
        A, B = G("Z"), G("Q")
        with pytest.raises(ValueError):
            section_order(SubgroupHandle.of(A), SubgroupHandle.of(B))


class TestCommensurable:
    def test_2Z_3Z(self):
        A = G("Z")
        X = SubgroupHandle.of(A, A.element({(0, 0): 2}))
        Y = SubgroupHandle.of(A, A.element({(0, 0): 3}))
        assert is_commensurable(X, Y) == (True, Finite(2), Finite(3))

    def test_trivial_subgroup(self):
        A = G("Z")
        ok, a, b = is_commensurable(SubgroupHandle.of(A, A.element({(0, 0): 1})), SubgroupHandle.of(A))
        assert not ok and a == Finite(1) and isinstance(b, AtLeast)

    def test_reflexive(self):
        A = G("Z")
        X = SubgroupHandle.of(A, A.element({(0, 0): 7}))
        assert is_commensurable(X, X) == (True, Finite(1), Finite(1))


def _lattice(A, rows):
    return SubgroupHandle.of(A, *[A.element({(0, 0): a, (0, 1): b}) for a, b in rows])


nonsingular = st.tuples(*[st.integers(-6, 6)] * 4).filter(lambda t: t[0] * t[3] - t[1] * t[2] != 0)


@settings(max_examples=40, deadline=None)
@given(nonsingular, nonsingular, nonsingular)
def test_commensurability_on_full_rank_lattices(a, b, c):
    A = Z_n(2)
    X, Y, W = (_lattice(A, [t[:2], t[2:]]) for t in (a, b, c))
    assert is_commensurable(X, Y)[0] and is_commensurable(Y, X)[0]
    assert is_commensurable(X, W)[0]
    # |X+Y : X| equals det(X) / det(X+Y)
    XY = X.join(Y)
    d1 = abs(a[0] * a[3] - a[1] * a[2])
    dj = _det_of_join(a, b)
    assert section_order(X, Y) == Finite(d1 // dj)
    assert section_order(XY, X) == Finite(1)


def _det_of_join(a, b):
    rows = [list(a[:2]), list(a[2:]), list(b[:2]), list(b[2:])]
    _, d, _ = smith_normal_form(rows, 2)
    return abs(d[0][0] * d[1][1])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.sampled_from(["Z(2^2)", "Z(3^inf)", "Q[2]", "Z(5)^w", "Q", "Z(2)"]), min_size=1, max_size=4))
def test_torsion_part_idempotent(parts):
    A = G(" + ".join(parts))
    T = torsion_part(A)
    assert torsion_part(T) == T
    assert set(component(A, PrimeSet.of(2, 3)).slots) <= set(T.slots)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(["Z(2^3) + Z(3^inf)", "Z(2^inf)^2 + Z(5^2)", "Z(3)^w + Z(3^4)"]), st.integers(1, 40))
def test_socle_killed_by_n(text, n):
    S = n_socle(G(text), n)
    for s, (atom, m) in enumerate(S.slots):
        x = S.element({(s, 0): 1})
        assert S.scale(x, n).is_zero()


def _matmul(a, b):
    return [[sum(x * y for x, y in zip(r, c)) for c in zip(*b)] for r in a]


@pytest.mark.parametrize("rows", [
    [[4, -3], [-2, -2], [3, 1], [2, 0]],
    [[2, 4, 4], [-6, 6, 12], [10, -4, -16]],
    [[0, 0], [0, 0]],
])
def test_smith_normal_form_shape(rows):
    u, d, v = smith_normal_form(rows, len(rows[0]))
    assert _matmul(_matmul(u, rows), v) == d
    diag = [d[i][i] for i in range(min(len(d), len(d[0])))]
    assert all(x >= 0 for x in diag)
    assert all(b % a == 0 if a else b == 0 for a, b in zip(diag, diag[1:]))
    assert all(d[i][j] == 0 for i in range(len(d)) for j in range(len(d[0])) if i != j)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.lists(st.integers(-9, 9), min_size=3, max_size=3), min_size=1, max_size=4))
def test_smith_normal_form_property(rows):
    u, d, v = smith_normal_form(rows, 3)
    assert _matmul(_matmul(u, rows), v) == d
    diag = [d[i][i] for i in range(min(len(d), 3))]
    assert all(b % a == 0 if a else b == 0 for a, b in zip(diag, diag[1:]))
