"""Inertiality certificates and their validation.

Two shapes are supported.  ``CaseA`` names a finite-index subgroup ``A0``
on which every endomorphism of the family is multiplication by an integer.
``CaseB`` splits ``A0 = B + D + C`` (bounded part, divisible part with the
minimal condition, and a part containing ``V``, a sum of copies of ``Q^pi``)
and records the multiplications on each piece.

The validator only evaluates the endomorphisms on sample generators of
``A0``; it does not reuse any of the classifier's reasoning.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import List, Optional, Sequence, Tuple

from .endo import Endomorphism
from .groups import (
    OMEGA,
    Cyclic,
    Element,
    GroupDescriptor,
    Localized,
    PrimeSet,
    Prufer,
    prime_factors,
)

Key = Tuple[int, int]


@dataclass(frozen=True)
class A0Description:
    """Finite-index subgroup built copywise.

    Slots whose mode is ``zero`` contribute nothing (allowed for
    finite-multiplicity slots only); ``whole`` slots contribute every copy.
    ``overrides`` replace single copies by ``scale`` times the copy
    (``scale = 0`` drops the copy).
    """

    modes: Tuple[Tuple[int, str], ...]
    overrides: Tuple[Tuple[Key, int], ...] = ()

    def mode(self, s: int) -> str:
        return dict(self.modes).get(s, "whole")

    def scale_of(self, key: Key) -> int:
        ov = dict(self.overrides)
        if key in ov:
            return ov[key]
        return 1 if self.mode(key[0]) == "whole" else 0

    def index(self, A: GroupDescriptor) -> Optional[int]:
        """Index of the subgroup in ``A`` (None when infinite)."""
        idx = 1
        for s, (atom, m) in enumerate(A.slots):
            if self.mode(s) == "zero":
                if m is OMEGA or not isinstance(atom, Cyclic):
                    return None
                idx *= atom.order**m
        for (s, _), v in self.overrides:
            atom = A.atom(s)
            if self.mode(s) == "zero":
                raise ValueError("overrides on a dropped slot")
            if isinstance(atom, Cyclic):
                idx *= gcd(v, atom.order)
            elif v == 0:
                return None
            elif isinstance(atom, Localized):
                idx *= _localized_index(atom, abs(v))
        return idx

    def slot_copies(self, s: int) -> List[Key]:
        return [k for k, _ in self.overrides if k[0] == s]


def _localized_index(atom: Localized, v: int) -> int:
    # index of v*Z_pi in Z_pi is the pi'-part of v
    out = 1
    for p in prime_factors(v):
        if p not in atom.pi:
            while v % p == 0:
                v //= p
                out *= p
    return out


@dataclass(frozen=True)
class CaseA:
    a0: A0Description
    multipliers: Tuple[int, ...]

    kind = "A"


@dataclass(frozen=True)
class EndoScalars:
    """Multiplications of one endomorphism on the pieces of a CaseB split."""

    mn: Fraction
    B: Tuple[Tuple[int, int], ...]
    D: Tuple[Tuple[int, Fraction], ...]
    C: Tuple[Tuple[int, Fraction], ...]


@dataclass(frozen=True)
class CaseB:
    pi: PrimeSet
    pi1: PrimeSet
    B: Tuple[int, ...]
    D: Tuple[int, ...]
    C: Tuple[int, ...]
    V: Tuple[Tuple[Key, int], ...]
    r: int
    scalars: Tuple[EndoScalars, ...]
    a0: A0Description

    kind = "B"


Certificate = object


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    reason: str = ""

    def __bool__(self):
        return self.ok


# ------------------------------------------------------------------ samples


def _sample_copies(A: GroupDescriptor, s: int, endos: Sequence[Endomorphism], a0: A0Description) -> List[int]:
    atom, m = A.slots[s]
    if m is not OMEGA:
        return list(range(min(m, 64)))
    touched = set(c for (t, c) in a0.slot_copies(s))
    ks = [1]
    for phi in endos:
        a = phi.actions[s]
        ks.append(a.k if a else 1)
        for src, tgt, _ in phi.cross:
            for t, c in (src, tgt):
                if t == s:
                    touched.add(c)
        for src, img in phi.finitary:
            if src[0] == s:
                touched.add(src[1])
            for t, c in img.support:
                if t == s:
                    touched.add(c)
    k = max(ks)
    top = max(touched) + 1 if touched else 0
    return sorted(set(range(2 * k)) | touched | set(range(top, top + 2 * k)))


def _sample_generator(A: GroupDescriptor, key: Key, scale: int, K: int) -> Element:
    atom = A.atom(key[0])
    if isinstance(atom, Prufer):
        return A.element({key: Fraction(scale, atom.p**K)})
    return A.element({key: scale})


def _check_scalar(A: GroupDescriptor, phi: Endomorphism, g: Element, q: Fraction) -> bool:
    try:
        target = A.scale(g, q)
    except ValueError:
        return False
    return phi.apply(g) == target


def _a0_samples(A: GroupDescriptor, endos, a0: A0Description, K: int):
    for s in range(A.nslots):
        for c in _sample_copies(A, s, endos, a0):
            sc = a0.scale_of((s, c))
            if sc:
                yield (s, c), _sample_generator(A, (s, c), sc, K)


# --------------------------------------------------------------- validation


def validate_certificate(cert, A: GroupDescriptor, endos: Sequence[Endomorphism], K: int = 20) -> ValidationResult:
    endos = list(endos)
    if any(phi.ambient != A for phi in endos):
        return ValidationResult(False, "endomorphism on a different group")
    if isinstance(cert, CaseA):
        return _validate_a(cert, A, endos, K)
    if isinstance(cert, CaseB):
        return _validate_b(cert, A, endos, K)
    return ValidationResult(False, f"unknown certificate {type(cert).__name__}")


def _validate_a(cert: CaseA, A, endos, K) -> ValidationResult:
    if len(cert.multipliers) != len(endos):
        return ValidationResult(False, "one multiplier per endomorphism expected")
    if cert.a0.index(A) is None:
        return ValidationResult(False, "A0 has infinite index")
    for key, g in _a0_samples(A, endos, cert.a0, K):
        for i, (phi, m) in enumerate(zip(endos, cert.multipliers)):
            if not _check_scalar(A, phi, g, Fraction(m)):
                return ValidationResult(False, f"endomorphism {i} is not {m} on copy {key[0] + 1}.{key[1]}")
    return ValidationResult(True)


def _validate_b(cert: CaseB, A, endos, K) -> ValidationResult:
    fail = lambda msg: ValidationResult(False, msg)  # noqa: E731
    if len(cert.scalars) != len(endos):
        return fail("one scalar record per endomorphism expected")
    if cert.pi.is_all or cert.pi1.is_all or not cert.pi.issubset(cert.pi1):
        return fail("pi must be a finite subset of the finite set pi1")
    dens = 1
    for sc in cert.scalars:
        dens *= sc.mn.denominator
    if PrimeSet.of_number(dens) != cert.pi:
        return fail("pi is not the set of primes of the denominators")
    if cert.a0.index(A) is None:
        return fail("A0 has infinite index")
    infinite = [s for s, (atom, m) in enumerate(A.slots) if not (isinstance(atom, Cyclic) and m is not OMEGA)]
    parts = list(cert.B) + list(cert.D) + list(cert.C)
    if sorted(parts) != sorted(infinite):
        return fail("B, D and C must partition the infinite slots")
    for s in cert.B:
        atom = A.atom(s)
        if not isinstance(atom, Cyclic) or atom.p not in cert.pi1:
            return fail(f"slot {s + 1} is not a bounded pi1-slot")
    for s in cert.D:
        atom, m = A.slots[s]
        if not isinstance(atom, Prufer) or atom.p not in cert.pi1 or atom.p in cert.pi or m is OMEGA:
            return fail(f"slot {s + 1} is not a Prufer slot with the minimal condition")
    for s in cert.C:
        atom = A.atom(s)
        if isinstance(atom, Localized):
            if not cert.pi.issubset(atom.pi):
                return fail(f"slot {s + 1} is not pi-divisible")
        elif atom.p in cert.pi1:
            return fail(f"slot {s + 1} carries pi1-torsion")
    local_copies = [(s, c) for s, (atom, m) in enumerate(A.slots) if isinstance(atom, Localized) for c in range(m if m is not OMEGA else 0)]
    if any(A.mult(s) is OMEGA for s, (atom, _) in enumerate(A.slots) if isinstance(atom, Localized)):
        return fail("V must have finite rank")
    if sorted(k for k, _ in cert.V) != sorted(local_copies) or cert.r != len(local_copies):
        return fail("V must take one copy of Q^pi in each localized copy")
    for (key, v) in cert.V:
        if v == 0 or cert.a0.scale_of(key) == 0 or v % cert.a0.scale_of(key):
            return fail("V is not inside A0")
    for i, (phi, sc) in enumerate(zip(endos, cert.scalars)):
        for key, v in cert.V:
            if not _check_scalar(A, phi, A.element({key: v}), sc.mn):
                return fail(f"endomorphism {i} is not {sc.mn} on V")
        Bs, Ds, Cs = dict(sc.B), dict(sc.D), dict(sc.C)
        for s in cert.D:
            p = A.atom(s).p
            if _quotient_p_infinite(A, cert, p) and Ds.get(s) != sc.mn:
                return fail(f"endomorphism {i}: D-scalar at {p} differs from m/n while (C/V)_{p} is infinite")
        for key, g in _a0_samples(A, endos, cert.a0, K):
            s = key[0]
            atom, m = A.slots[s]
            if isinstance(atom, Cyclic) and m is not OMEGA:
                continue
            if s in Bs:
                q = Fraction(Bs[s])
            elif s in Ds:
                q = Ds[s]
            elif isinstance(atom, Localized):
                q = sc.mn
            elif atom.p in Cs:
                q = Cs[atom.p]
            else:
                return fail(f"endomorphism {i}: no scalar recorded for slot {s + 1}")
            if not _check_scalar(A, phi, g, q):
                return fail(f"endomorphism {i} is not {q} on copy {s + 1}.{key[1]}")
    return ValidationResult(True)


def _quotient_p_infinite(A: GroupDescriptor, cert: CaseB, p: int) -> bool:
    return any(isinstance(A.atom(s), Localized) and p in A.atom(s).pi and p not in cert.pi for s in cert.C)
