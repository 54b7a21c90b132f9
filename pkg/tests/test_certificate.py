from dataclasses import replace
from fractions import Fraction

import numpy as np
from hypothesis import given, settings, strategies as st

from inertia.certificate import A0Description, CaseA, CaseB, validate_certificate
from inertia.classifier import classify, classify_general, lift_finite_index
from inertia.endo import Endomorphism
from inertia.grammar import parse_endo, parse_group
from inertia.sampling import random_endo, random_group


def G(text):
    return parse_group(text)


class TestA0:
    def test_whole_group(self):
        assert A0Description(()).index(G("Z(2)^w + Q")) == 1

    def test_dropped_cyclic(self):
        A = G("Z(2^2)^2 + Z(3)")
        assert A0Description(((0, "zero"),)).index(A) == 16

    def test_dropped_infinite_slot(self):
        assert A0Description(((0, "zero"),)).index(G("Z(2)^w")) is None

    def test_overrides(self):
        A = G("Z(2^3) + Q[3]")
        a0 = A0Description((), (((0, 0), 2), ((1, 0), 6)))
        # 2Z(8) has index 2, 6 Z[1/3] has index 2 in Z[1/3]
        assert a0.index(A) == 4
        assert a0.scale_of((0, 0)) == 2 and a0.scale_of((1, 1)) == 1


class TestCaseA:
    def test_finitary_identity(self):
        A = G("Z(2)^w + Z(2^2)")
        phi = parse_endo("mult 1 + finitary{2.0 -> 1.0:1}", A)
        cert = classify(A, phi).certificate
        assert isinstance(cert, CaseA) and validate_certificate(cert, A, [phi])
        assert cert.a0.index(A) > 1

    def test_wrong_multiplier(self):
        A = G("Z^w")
        phi = Endomorphism.scalar(A, 3)
        cert = classify(A, phi).certificate
        assert not validate_certificate(replace(cert, multipliers=(2,)), A, [phi])

    def test_wrong_count(self):
        A = G("Z")
        cert = classify(A, Endomorphism.identity(A)).certificate
        assert not validate_certificate(cert, A, [Endomorphism.identity(A)] * 2)

    def test_whole_group_instead_of_A0(self):
        A = G("Z(2)^w + Z(2^2)")
        phi = parse_endo("mult 1 + finitary{2.0 -> 1.0:1}", A)
        cert = classify(A, phi).certificate
        assert not validate_certificate(replace(cert, a0=A0Description(())), A, [phi])


class TestCaseB:
    def setup_method(self):
        self.A = G("Z(3^inf) + Q[2,3]")
        self.phi = parse_endo("block{1: 1/2; 2: 1/2}", self.A)
        self.cert = classify(self.A, self.phi).certificate

    def test_valid(self):
        assert isinstance(self.cert, CaseB)
        assert validate_certificate(self.cert, self.A, [self.phi])

    def test_wrong_scalar(self):
        s = self.cert.scalars[0]
        bad = replace(self.cert, scalars=(replace(s, mn=Fraction(1, 4)),))
        assert not validate_certificate(bad, self.A, [self.phi])

    def test_other_endomorphism(self):
        other = parse_endo("block{1: 5; 2: 1/2}", self.A)
        assert not validate_certificate(self.cert, self.A, [other])

    def test_foreign_group(self):
        B = G("Q[2,3]")
        assert not validate_certificate(self.cert, B, [Endomorphism.identity(B)])


def test_lifted_is_not_standalone():
    A = G("Z")
    v = lift_finite_index(classify(A, Endomorphism.scalar(A, 3)), index=2)
    res = validate_certificate(v.certificate, A, [Endomorphism.scalar(A, 3)])
    assert not res and "Lifted" in res.reason


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_emitted_certificates_validate(seed):
    rng = np.random.default_rng(seed)
    A = random_group(rng)
    fam = [random_endo(rng, A, "inertial") for _ in range(int(rng.integers(1, 3)))]
    v = classify_general(A, fam, K=8)
    if v.rin:
        assert validate_certificate(v.certificate, A, fam, K=8)
