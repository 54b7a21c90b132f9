"""Seeded random desk-scale groups, endomorphisms and subgroups."""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Dict, Optional, Sequence

import numpy as np

from .endo import Endomorphism, IllDefined, SlotAction
from .groups import OMEGA, Cyclic, Element, GroupDescriptor, Localized, PrimeSet, Prufer, SubgroupHandle

DESK_PRIMES = (2, 3, 5, 7)
WINDOW = 4


def _choice(rng: np.random.Generator, seq):
    return seq[int(rng.integers(len(seq)))]


def _prime_subset(rng, primes) -> PrimeSet:
    return PrimeSet(frozenset(p for p in primes if rng.random() < 0.4))


def random_atom(rng: np.random.Generator, primes: Sequence[int] = DESK_PRIMES):
    kind = _choice(rng, ("cyclic", "cyclic", "prufer", "localized"))
    p = _choice(rng, primes)
    if kind == "cyclic":
        return Cyclic(p, int(rng.integers(1, 4)))
    if kind == "prufer":
        return Prufer(p)
    if rng.random() < 0.15:
        return Localized(PrimeSet.all())
    return Localized(_prime_subset(rng, primes))


def random_group(
    rng: np.random.Generator,
    max_atoms: int = 4,
    primes: Sequence[int] = DESK_PRIMES,
    ftfr: bool = False,
    need_localized: bool = False,
) -> GroupDescriptor:
    n = int(rng.integers(1, max_atoms + 1))
    atoms = []
    while len(atoms) < n:
        a = random_atom(rng, primes)
        if a not in atoms:
            atoms.append(a)
    if need_localized and not any(isinstance(a, Localized) for a in atoms):
        atoms[-1] = Localized(_prime_subset(rng, primes))
    slots = []
    for a in atoms:
        r = rng.random()
        if isinstance(a, Localized) and ftfr:
            m = 1 if r < 0.7 else 2
        else:
            m = 1 if r < 0.4 else 2 if r < 0.6 else OMEGA
        slots.append((a, m))
    return GroupDescriptor(tuple(slots))


# --------------------------------------------------------------- scalars


def _pi_number(rng, pi: PrimeSet, primes) -> int:
    pool = list(primes) if pi.is_all else pi.sorted()
    out = 1
    for p in pool:
        if rng.random() < 0.3:
            out *= p
    return out


def _coprime(rng, p: int, top: int = 12) -> int:
    while True:
        x = int(rng.integers(1, top))
        if x % p:
            return x


def random_scalar(rng, atom, unit: bool = False, primes=DESK_PRIMES) -> Fraction:
    sign = 1 if rng.random() < 0.6 else -1
    if isinstance(atom, Cyclic):
        if unit:
            return Fraction(sign * _coprime(rng, atom.p))
        return Fraction(sign * int(rng.integers(0, atom.order)))
    if isinstance(atom, Prufer):
        num = _coprime(rng, atom.p) if unit else int(rng.integers(0, 10))
        return Fraction(sign * num, _coprime(rng, atom.p, 6))
    den = _pi_number(rng, atom.pi, primes)
    if unit:
        return Fraction(sign * _pi_number(rng, atom.pi, primes), den)
    return Fraction(sign * int(rng.integers(0, 7)), den)


def _chunk(rng, atom, unit: bool) -> SlotAction:
    while True:
        rows = [[random_scalar(rng, atom, False) for _ in range(2)] for _ in range(2)]
        if not unit:
            return SlotAction.of(rows)
        det = rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
        if det.numerator % atom.p:
            return SlotAction.of(rows)


def _torsion_element(rng, A: GroupDescriptor, avoid: PrimeSet, order_divides: Optional[int] = None) -> Optional[Element]:
    keys = []
    for s, (atom, m) in enumerate(A.slots):
        if isinstance(atom, Cyclic) and atom.p not in avoid:
            if order_divides is None or order_divides % atom.p == 0:
                keys.extend((s, c) for c in range(min(2, m) if m is not OMEGA else 2))
    if not keys:
        return None
    s, c = _choice(rng, keys)
    atom = A.atom(s)
    top = atom.order
    if order_divides is not None:
        top = gcd(top, order_divides)
    return A.element({(s, c): Fraction(int(rng.integers(1, top)) * (atom.order // top)) if top > 1 else 0})


def random_endo(
    rng: np.random.Generator,
    A: GroupDescriptor,
    style: str = "structured",
    finitary: bool = True,
    primes: Sequence[int] = DESK_PRIMES,
) -> Endomorphism:
    """Structured random endomorphism.

    ``style`` is ``structured`` (anything), ``inertial`` (biased towards a
    common rational on the torsion-free part and integers on torsion) or
    ``invertible`` (units on every slot, triangular cross terms, finitary
    maps only from torsion-free copies).
    """
    for _ in range(200):
        try:
            return _attempt(rng, A, style, finitary, primes).require()
        except (IllDefined, ValueError, ZeroDivisionError):
            continue
    raise RuntimeError("could not sample a well-defined endomorphism")


def _attempt(rng, A, style, finitary, primes) -> Endomorphism:
    unit = style == "invertible"
    acts: Dict[int, object] = {}
    local = [s for s, (a, _) in enumerate(A.slots) if isinstance(a, Localized)]
    lam = None
    if style == "inertial" and local:
        common = PrimeSet.all()
        for s in local:
            common = common.intersection(A.atom(s).pi)
        lam = random_scalar(rng, Localized(common), False, primes)
        if rng.random() < 0.5:
            lam = Fraction(lam.numerator)
    for s, (atom, m) in enumerate(A.slots):
        if lam is not None and isinstance(atom, Localized):
            acts[s] = lam
            continue
        chunkable = not isinstance(atom, Localized) and (m is OMEGA or m % 2 == 0)
        if chunkable and rng.random() < (0.08 if style == "inertial" else 0.25):
            acts[s] = _chunk(rng, atom, unit)
            continue
        if style == "inertial" and lam is not None and lam.denominator == 1 and rng.random() < 0.6:
            acts[s] = lam
            continue
        acts[s] = random_scalar(rng, atom, unit, primes)
    cross = []
    lcopies = [(s, c) for s in local for c in range(A.mult(s) if A.mult(s) is not OMEGA else 2)]
    if style != "inertial" and len(lcopies) >= 2 and rng.random() < 0.3:
        i, j = sorted(int(x) for x in rng.choice(len(lcopies), 2, replace=False))
        src, tgt = lcopies[j], lcopies[i]
        # triangular: later copies feed earlier ones
        if A.atom(src[0]).pi.issubset(A.atom(tgt[0]).pi):
            cross.append((src, tgt, Fraction(int(rng.integers(1, 4)))))
    fin = {}
    if finitary and rng.random() < 0.5:
        sources = [(s, c) for s, (a, m) in enumerate(A.slots) for c in range(m if m is not OMEGA else 2)
                   if not isinstance(a, Prufer) and (not unit or isinstance(a, Localized))]
        if sources:
            src = _choice(rng, sources)
            atom = A.atom(src[0])
            if isinstance(atom, Localized):
                img = _torsion_element(rng, A, atom.pi)
            else:
                img = _torsion_element(rng, A, PrimeSet(), atom.order)
            if img is not None and not img.is_zero():
                fin[src] = img
    return Endomorphism.build(A, acts, cross, fin)


def random_inertial_pair(rng, max_atoms: int = 4, tries: int = 200, classify=None):
    """A desk group with two endomorphisms certified right-inertial."""
    from .classifier import classify as _classify

    classify = classify or _classify
    for _ in range(tries):
        A = random_group(rng, max_atoms)
        got = []
        for _ in range(12):
            phi = random_endo(rng, A, "inertial")
            if classify(A, phi).rin:
                got.append(phi)
                if len(got) == 2:
                    return A, got[0], got[1]
    raise RuntimeError("no inertial pair found")


# ------------------------------------------------------------- subgroups


def random_element(rng, A: GroupDescriptor, window: int = WINDOW, primes=DESK_PRIMES) -> Element:
    coords = {}
    for s, (atom, m) in enumerate(A.slots):
        top = window if m is OMEGA else m
        for c in range(top):
            if rng.random() < 0.5:
                continue
            if isinstance(atom, Cyclic):
                coords[(s, c)] = int(rng.integers(0, atom.order))
            elif isinstance(atom, Prufer):
                coords[(s, c)] = Fraction(int(rng.integers(0, 9)), atom.p ** int(rng.integers(0, 4)))
            else:
                coords[(s, c)] = Fraction(int(rng.integers(-6, 7)), _pi_number(rng, atom.pi, primes))
    return A.element(coords)


def random_fg_subgroup(rng, A: GroupDescriptor, max_gens: int = 3, window: int = WINDOW) -> SubgroupHandle:
    n = int(rng.integers(1, max_gens + 1))
    return SubgroupHandle(A, tuple(random_element(rng, A, window) for _ in range(n)), (), "sample")


__all__ = [
    "DESK_PRIMES",
    "random_atom",
    "random_group",
    "random_scalar",
    "random_endo",
    "random_inertial_pair",
    "random_element",
    "random_fg_subgroup",
]
