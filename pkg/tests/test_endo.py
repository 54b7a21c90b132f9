from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from inertia.endo import (
    Endomorphism,
    IllDefined,
    compose,
    equal_mod_finitary,
    image_finite,
    induced_on_quotient,
    inverse,
    restrict,
)
from inertia.grammar import parse_endo, parse_group
from inertia.groups import CertifiedInfinite, Finite, SubgroupHandle
from inertia.sampling import random_element, random_endo, random_group


def G(text):
    return parse_group(text)


class TestWellDefined:
    @pytest.mark.parametrize(
        "group, ok",
        [("Z(3^inf)", True), ("Z", False), ("Q[2]", True), ("Z(2^3)", False), ("Z(5^2)^w", True)],
    )
    def test_half(self, group, ok):
        assert Endomorphism.scalar(G(group), Fraction(1, 2)).is_well_defined() is ok

    def test_diagnostic_names_slot(self):
        ok, why = Endomorphism.build(G("Z(3) + Z"), {1: Fraction(1, 2)}).check()
        assert not ok and "slot 2" in why

    def test_finitary_into_divisible_prime(self):
        A = G("Q[2] + Z(2)")
        with pytest.raises(IllDefined):
            parse_endo("finitary{1.0 -> 2.0:1}", A).require()

    def test_chunk_must_divide_multiplicity(self):
        A = G("Z(2)^3")
        assert not parse_endo("matrix{1: [[0,1],[1,0]]}", A).is_well_defined()


class TestApply:
    def test_doubling_mod_5(self):
        A = G("Z(5)")
        assert Endomorphism.scalar(A, 2).apply(A.element({(0, 0): 3})) == A.element({(0, 0): 1})

    def test_half_on_prufer(self):
        A = G("Z(3^inf)")
        phi = Endomorphism.scalar(A, Fraction(1, 2))
        assert phi.apply(A.element({(0, 0): Fraction(1, 3)})) == A.element({(0, 0): Fraction(2, 3)})

    def test_zero_finitary_part(self):
        A = G("Z + Z(4)")
        x = A.element({(0, 0): 5, (1, 0): 3})
        assert parse_endo("mult 3", A).apply(x) == Endomorphism.scalar(A, 3).apply(x)

    def test_relations_respected(self):
        A = G("fg{2, 0; 0, 4}")
        phi = Endomorphism.from_generator_matrix(A, [[1, 0], [2, 1]])
        for row in A.presentation.relations:
            rel = A.combine(zip(row, A.generator_images))
            assert phi.apply(rel).is_zero()

    def test_generator_matrix_must_respect_relations(self):
        A = G("fg{2, 0; 0, 0}")
        with pytest.raises(IllDefined):
            Endomorphism.from_generator_matrix(A, [[0, 1], [1, 0]])


class TestRing:
    def test_add_scalars(self):
        A = G("Z")
        assert (Endomorphism.scalar(A, 2) + Endomorphism.scalar(A, 3)).structurally_equal(Endomorphism.scalar(A, 5))

    def test_compose_scalars(self):
        A = G("Q[2,3]")
        got = compose(Endomorphism.scalar(A, Fraction(1, 2)), Endomorphism.scalar(A, Fraction(2, 3)))
        assert got.structurally_equal(Endomorphism.scalar(A, Fraction(1, 3)))

    def test_compose_blocks(self):
        A = G("Z(2)^w + Z(3^inf)")
        f = Endomorphism.build(A, {0: 2, 1: 3})
        g = Endomorphism.build(A, {0: 5, 1: 7})
        assert compose(f, g).structurally_equal(Endomorphism.build(A, {0: 10, 1: 21}))

    def test_ambient_mismatch(self):
        with pytest.raises(ValueError):
            Endomorphism.scalar(G("Z"), 1) + Endomorphism.scalar(G("Q"), 1)

    def test_inverse_with_finitary_part(self):
        A = G("Z + Z(3)")
        phi = parse_endo("mult -1 + finitary{1.0 -> 2.0:1}", A)
        inv = inverse(phi)
        x = A.element({(0, 0): 4, (1, 0): 2})
        assert inv.apply(phi.apply(x)) == x and phi.apply(inv.apply(x)) == x


class TestImage:
    def test_zero_map(self):
        assert image_finite(Endomorphism.zero(G("Z(2)^w"))) == Finite(1)

    def test_identity_on_Z(self):
        assert isinstance(image_finite(Endomorphism.identity(G("Z"))), CertifiedInfinite)

    def test_surjective_finitary_table(self):
        A = G("Z + Z(2)")
        assert image_finite(parse_endo("finitary{1.0 -> 2.0:1}", A)) == Finite(2)

    def test_bounded_slot_scalar(self):
        A = G("Z(2^3)^2")
        assert image_finite(Endomorphism.scalar(A, 2)) == Finite(16)


class TestEqualModFinitary:
    def test_same(self):
        phi = Endomorphism.scalar(G("Z"), 2)
        assert equal_mod_finitary(phi, phi) == (True, Finite(1))

    def test_finitary_difference(self):
        A = G("Z + Z(3)")
        f = parse_endo("mult 2", A)
        g = parse_endo("mult 2 + finitary{1.0 -> 2.0:1}", A)
        assert equal_mod_finitary(f, g) == (True, Finite(3))

    def test_different_scalars(self):
        A = G("Z")
        ok, size = equal_mod_finitary(Endomorphism.scalar(A, 2), Endomorphism.scalar(A, 3))
        assert not ok and isinstance(size, CertifiedInfinite)


class TestRestrictQuotient:
    def test_restrict_scalar(self):
        A = G("Z")
        r = restrict(Endomorphism.scalar(A, 2), SubgroupHandle.of(A, A.element({(0, 0): 3})))
        assert r.structurally_equal(Endomorphism.scalar(r.ambient, 2))

    def test_quotient_by_whole_group(self):
        A = G("Q[2]")
        V = SubgroupHandle(A, (), ((A.element({(0, 0): 1}), A.atom(0).pi),))
        q = induced_on_quotient(Endomorphism.scalar(A, Fraction(1, 2)), V)
        assert q.ambient.slots == () and image_finite(q) == Finite(1)

    def test_quotient_mod_3(self):
        A = G("Z")
        q = induced_on_quotient(Endomorphism.scalar(A, 5), SubgroupHandle.of(A, A.element({(0, 0): 3})))
        assert q.ambient == G("Z(3)")
        assert q.structurally_equal(Endomorphism.scalar(q.ambient, 2))

    def test_non_invariant_rejected(self):
        A = G("Z^2")
        phi = parse_endo("matrix{1: [[0,1],[1,0]]}", A)
        with pytest.raises(ValueError):
            restrict(phi, SubgroupHandle.of(A, A.element({(0, 0): 1})))


# ----------------------------------------------------------------- properties


def _sample(seed, n=3):
    rng = np.random.default_rng(seed)
    A = random_group(rng, 3)
    endos = [random_endo(rng, A) for _ in range(n)]
    xs = [random_element(rng, A) for _ in range(3)]
    return A, endos, xs


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_ring_axioms_by_evaluation(seed):
    A, (f, g, h), xs = _sample(seed)
    for x in xs:
        assert (f + g).apply(x) == (g + f).apply(x)
        assert ((f + g) + h).apply(x) == (f + (g + h)).apply(x)
        assert compose(f, g + h).apply(x) == (compose(f, g) + compose(f, h)).apply(x)
        assert compose(f + g, h).apply(x) == (compose(f, h) + compose(g, h)).apply(x)
        assert compose(f, g).apply(x) == f.apply(g.apply(x))
    for e in (f + g, compose(f, g), f - h):
        assert e.is_well_defined()


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_apply_is_additive(seed):
    A, (f,), xs = _sample(seed, 1)
    a, b, _ = xs
    assert f.apply(A.add(a, b)) == A.add(f.apply(a), f.apply(b))


def _finitary(rng, A):
    for _ in range(50):
        e = random_endo(rng, A, finitary=True)
        f = e - Endomorphism(A, e.actions, e.cross)
        if f.finitary:
            return f
    return Endomorphism.zero(A)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_finite_images_form_an_ideal(seed):
    rng = np.random.default_rng(seed)
    A = random_group(rng, 3)
    f, g = _finitary(rng, A), _finitary(rng, A)
    h = random_endo(rng, A)
    sf, sg = image_finite(f), image_finite(g)
    assert isinstance(sf, Finite) and isinstance(sg, Finite)
    s = image_finite(f + g)
    assert isinstance(s, Finite) and s.n <= sf.n * sg.n
    assert isinstance(image_finite(compose(f, h)), Finite)
    assert isinstance(image_finite(compose(h, f)), Finite)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_equal_mod_finitary_is_an_equivalence(seed):
    rng = np.random.default_rng(seed)
    A = random_group(rng, 3)
    base = random_endo(rng, A, finitary=False)
    pool = [base, base + _finitary(rng, A), base + _finitary(rng, A), random_endo(rng, A)]
    rel = [[equal_mod_finitary(a, b)[0] for b in pool] for a in pool]
    for i in range(4):
        assert rel[i][i]
        for j in range(4):
            assert rel[i][j] == rel[j][i]
            for k in range(4):
                if rel[i][j] and rel[j][k]:
                    assert rel[i][k]
