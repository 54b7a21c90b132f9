"""Named example constructions with their expected verdicts.

Each entry carries a list of checks; :meth:`GalleryEntry.run` re-executes
them and the test suite treats every entry as a golden test.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Sequence, Tuple

from sympy import primerange

from .classifier import automorphism_bridge, classify, classify_general, commutator_check
from .endo import Endomorphism, image_finite, inverse
from .groups import OMEGA, CertifiedInfinite, Cyclic, Finite, GroupDescriptor, Localized, PrimeSet, Prufer, torsion_part
from .witness import free_rank_witness, verify_witness


@dataclass(frozen=True)
class Expected:
    rin: bool
    lin: bool


@dataclass
class GalleryEntry:
    name: str
    group: GroupDescriptor
    endos: List[Endomorphism]
    expected: Expected
    topic: str
    checks: List[Tuple[str, Callable[[], bool]]] = field(default_factory=list)

    def verdict(self):
        return classify_general(self.group, self.endos)

    def run(self) -> Dict[str, bool]:
        v = self.verdict()
        out = {"verdict": (v.rin, v.lin) == (self.expected.rin, self.expected.lin)}
        for name, check in self.checks:
            out[name] = bool(check())
        return out


def q_omega_doubling() -> GalleryEntry:
    """``Q^w`` with multiplication by 2 and by 1/2."""
    A = GroupDescriptor(((Localized(PrimeSet.all()), OMEGA),))
    phi = Endomorphism.scalar(A, 2)
    inv = inverse(phi)

    def inverse_verdict():
        v = classify(A, inv)
        return (v.rin, v.lin) == (False, True)

    def witness():
        return verify_witness(free_rank_witness(Fraction(1, 2), A), inv).ok

    return GalleryEntry(
        "q_omega_doubling",
        A,
        [phi],
        Expected(True, False),
        "automorphism that is right- but not left-inertial",
        [
            ("inverse", inverse_verdict),
            ("bridge", lambda: automorphism_bridge(phi, A).flags == (True, False, False, True)),
            ("free_rank_witness", witness),
        ],
    )


def critical_id_inversion(p: int = 3, d: int = 1, e: int = 1) -> GalleryEntry:
    """``Z(p^e)^w + Z(p^inf)^d`` with 1 on the bounded part and -1 on the divisible part."""
    if p == 2:
        raise ValueError("p must be odd")
    if d < 1 or e < 1:
        raise ValueError("d and e must be positive")
    A = GroupDescriptor(((Cyclic(p, e), OMEGA), (Prufer(p), d)))
    phi = Endomorphism.build(A, {0: 1, 1: -1})
    ident = Endomorphism.identity(A)
    two = Endomorphism.scalar(A, 2)
    return GalleryEntry(
        f"critical_id_inversion(p={p}, d={d}, e={e})",
        A,
        [phi],
        Expected(True, True),
        "periodic inertial automorphism that is not finitary",
        [
            ("square_is_identity", lambda: (phi @ phi).structurally_equal(ident)),
            ("not_finitary", lambda: isinstance(image_finite(phi - ident), CertifiedInfinite)),
            ("commutes_with_doubling", lambda: commutator_check(phi, two) == Finite(1)),
        ],
    )


class TruncatedModel:
    """Truncated model ``A_P = <v, d_p : p <= P>``.

    Inside ``Q + sum_p Z(p^2)`` put ``v = (1; 0)`` and ``d_p = (1/p; u_p)``.
    Then ``t_p = p d_p - v`` has order ``p`` and these are the only
    relations, so ``A_P`` is presented on generators ``v, d_p``.
    """

    def __init__(self, P: int):
        if P < 2:
            raise ValueError("P must be at least 2")
        self.P = P
        self.primes: List[int] = list(primerange(2, P + 1))
        k = len(self.primes)
        self.ngens = k + 1
        rels = []
        for i, p in enumerate(self.primes):
            row = [0] * self.ngens
            row[0] = -p
            row[i + 1] = p * p
            rels.append(row)
        self.relations = rels
        self.group = GroupDescriptor.from_presentation(rels, self.ngens)
        self.ambient = GroupDescriptor(((Localized(PrimeSet.all()), 1),) + tuple((Cyclic(p, 2), 1) for p in self.primes))

    def ambient_generators(self):
        A = self.ambient
        gens = [A.element({(0, 0): 1})]
        for i, p in enumerate(self.primes):
            gens.append(A.element({(0, 0): Fraction(1, p), (i + 1, 0): 1}))
        return gens

    def relations_hold_in_ambient(self) -> bool:
        gens = self.ambient_generators()
        return all(self.ambient.combine(zip(row, gens)).is_zero() for row in self.relations)

    def torsion(self) -> GroupDescriptor:
        return torsion_part(self.group)

    def modulo_torsion(self) -> GroupDescriptor:
        """``A_P / T``: add the relations ``t_p = 0``."""
        extra = []
        for i, p in enumerate(self.primes):
            row = [0] * self.ngens
            row[0] = -1
            row[i + 1] = p
            extra.append(row)
        return GroupDescriptor.from_presentation(self.relations + extra, self.ngens)

    def modulo_v(self) -> GroupDescriptor:
        return GroupDescriptor.from_presentation(self.relations + [[1] + [0] * (self.ngens - 1)], self.ngens)

    def sigma_element(self, s: Sequence[int]) -> Endomorphism:
        """``v -> v``, ``d_p -> d_p + s_p t_p``: identity on ``V + T`` and on ``A/(V+T)``."""
        if len(s) != len(self.primes):
            raise ValueError(f"expected {len(self.primes)} coefficients")
        n = self.ngens
        mat = [[int(i == j) for j in range(n)] for i in range(n)]
        for i, (p, c) in enumerate(zip(self.primes, s)):
            c %= p
            mat[0][i + 1] -= c
            mat[i + 1][i + 1] += p * c
        return Endomorphism.from_generator_matrix(self.group, mat)

    def expected_image(self, s: Sequence[int]) -> int:
        out = 1
        for p, c in zip(self.primes, s):
            if c % p:
                out *= p
        return out

    def entry(self, s: Sequence[int] = ()) -> GalleryEntry:
        s = list(s) or [1] * len(self.primes)
        sigma = self.sigma_element(s)
        ident = Endomorphism.identity(self.group)
        tors = GroupDescriptor(tuple((Cyclic(p, 1), 1) for p in self.primes))
        return GalleryEntry(
            f"proposition_a(P={self.P})",
            self.group,
            [sigma],
            Expected(True, True),
            "stabilizer of a two-step series acting inertially",
            [
                ("relations", self.relations_hold_in_ambient),
                ("torsion", lambda: self.torsion() == tors),
                ("quotient_by_torsion", lambda: self.modulo_torsion().slots == ((Localized(PrimeSet()), 1),)),
                ("quotient_by_v", lambda: all(_p_order(self.modulo_v(), p) == p * p for p in self.primes)),
                ("image", lambda: image_finite(sigma - ident) == Finite(self.expected_image(s))),
            ],
        )


def _p_order(A: GroupDescriptor, p: int) -> int:
    out = 1
    for atom, m in A.slots:
        if isinstance(atom, Cyclic) and atom.p == p:
            out *= atom.order**m
    return out


def proposition_a(P: int = 5) -> TruncatedModel:
    return TruncatedModel(P)


def sigma_element(P: int, s: Sequence[int]) -> Endomorphism:
    return TruncatedModel(P).sigma_element(s)


ENTRIES = {
    "q_omega_doubling": lambda **kw: q_omega_doubling(),
    "critical_id_inversion": lambda **kw: critical_id_inversion(**kw),
    "proposition_a": lambda **kw: proposition_a(**{k: v for k, v in kw.items() if k == "P"}).entry(kw.get("s", ())),
}


def get_entry(name: str, **params) -> GalleryEntry:
    if name not in ENTRIES:
        raise KeyError(f"unknown gallery entry {name!r}; choose from {', '.join(sorted(ENTRIES))}")
    return ENTRIES[name](**params)


__all__ = [
    "Expected",
    "GalleryEntry",
    "TruncatedModel",
    "q_omega_doubling",
    "critical_id_inversion",
    "proposition_a",
    "sigma_element",
    "get_entry",
    "ENTRIES",
]
