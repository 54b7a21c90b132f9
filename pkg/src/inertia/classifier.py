"""Decide right and left inertiality of endomorphism families.

Each endomorphism is reduced to its essential part: the slot actions and
cross entries on infinite-multiplicity cyclic slots, Prufer slots and
localized slots.  Finite cyclic slots and finitary entries never matter.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from sympy.ntheory.modular import crt

from . import witness as W
from .certificate import A0Description, CaseA, CaseB, EndoScalars, validate_certificate
from .endo import Endomorphism, compose, essential_columns, image_finite, inverse
from .groups import (
    OMEGA,
    Cyclic,
    GroupDescriptor,
    Localized,
    PrimeSet,
    Prufer,
    SectionSize,
    SubgroupHandle,
    vp,
)

Key = Tuple[int, int]
DEFAULT_K = 20


class ClassificationError(ValueError):
    pass


@dataclass(frozen=True)
class EndoReport:
    rin: bool
    lin: bool
    reason: str
    scalar: Optional[Fraction] = None


@dataclass(frozen=True)
class Verdict:
    rin: bool
    lin: bool
    certificate: object = None
    witness: Optional[W.NonInertialWitness] = None
    reports: Tuple[EndoReport, ...] = ()

    def __post_init__(self):
        if self.rin and self.certificate is None:
            raise ValueError("a right-inertial verdict needs a certificate")
        if not self.rin and self.witness is None:
            raise ValueError("a verdict that is not right-inertial needs a witness")


# ------------------------------------------------------------- per prime


@dataclass
class _PrimeData:
    p: int
    B: List[Tuple[int, int, int]] = field(default_factory=list)  # (slot, beta mod p^e, e)
    D: List[int] = field(default_factory=list)
    D_min: bool = True
    alpha: Optional[Fraction] = None
    k: int = 0

    def div_scalar(self, lam: Optional[Fraction]) -> Optional[Fraction]:
        if self.D:
            return self.alpha
        if self.k:
            return lam
        return None


@dataclass
class _Analysis:
    phi: Endomorphism
    rin: bool
    lin: bool
    reason: str
    lam: Optional[Fraction] = None
    primes: Dict[int, _PrimeData] = field(default_factory=dict)
    integer: Optional[int] = None
    make_witness: Optional[Callable[[int], W.NonInertialWitness]] = None


def _eq_in(atom, c, q) -> bool:
    """Do ``c`` and ``q`` induce the same map on ``atom``?"""
    c, q = Fraction(c), Fraction(q)
    if isinstance(atom, Cyclic):
        if q.denominator % atom.p == 0 or c.denominator % atom.p == 0:
            return False
        return c == q or vp(c - q, atom.p) >= atom.e
    return c == q


def _as_residue(q: Fraction, n: int) -> int:
    return q.numerator * pow(q.denominator, -1, n) % n


def _clean_local_key(phi: Endomorphism, s: int) -> Key:
    return (s, W.clean_start(phi, s)) if phi.ambient.mult(s) is OMEGA else (s, 0)


def _analyze(phi: Endomorphism) -> _Analysis:
    A = phi.ambient
    phi.require()
    cols = essential_columns(phi)
    local_slots = [s for s, (a, _) in enumerate(A.slots) if isinstance(a, Localized)]

    lam: Optional[Fraction] = None
    if local_slots:
        if W.find_independent(phi) is not None:
            return _Analysis(
                phi, False, False, "not a multiplication modulo torsion", make_witness=lambda K: W.independence_witness(phi, K)
            )
        key = (local_slots[0], 0)
        lam = cols[key].get(key, Fraction(0))
    if A.r0 is OMEGA:
        return _analyze_infinite_rank(phi, cols, lam)
    return _analyze_finite_rank(phi, cols, lam)


def _torsion_keys(A: GroupDescriptor, cols) -> List[Key]:
    return [k for k in cols if not isinstance(A.atom(k[0]), Localized)]


def _acts_as(A: GroupDescriptor, key: Key, col: Dict[Key, Fraction], q: Fraction) -> bool:
    atom = A.atom(key[0])
    if any(t != key for t in col):
        return False
    return _eq_in(atom, col.get(key, Fraction(0)), q)


def _analyze_infinite_rank(phi: Endomorphism, cols, lam: Fraction) -> _Analysis:
    A = phi.ambient
    tkeys = _torsion_keys(A, cols)
    omega_local = next(s for s, (a, m) in enumerate(A.slots) if isinstance(a, Localized) and m is OMEGA)
    lin = lam.numerator in (1, -1) and all(_acts_as(A, k, cols[k], lam) for k in tkeys)
    if lam.denominator != 1:
        return _Analysis(
            phi, False, lin, f"multiplication by {lam} on a free part of infinite rank", lam,
            make_witness=lambda K: W.free_rank_witness_for(phi, omega_local, K),
        )
    m = lam.numerator
    bad = next((k for k in tkeys if not _acts_as(A, k, cols[k], lam)), None)
    if bad is not None:
        atom = A.atom(bad[0])
        if isinstance(atom, Prufer):
            shape = ("prufer", bad, 0)
        else:
            a = phi.actions[bad[0]]
            k = a.k if a else 1
            shape = ("cyclic", (bad[0], W.clean_start(phi, bad[0]) + bad[1] % k), k)
        return _Analysis(
            phi, False, lin, f"torsion part is not multiplication by {m}", lam,
            make_witness=lambda K: W.pairing_witness_for(phi, omega_local, m, shape, K),
        )
    return _Analysis(phi, True, lin, f"multiplication by {m} on the essential part", lam, integer=m)


def _chunk_scalar(a, atom: Cyclic) -> Optional[int]:
    n = atom.order
    if a is None:
        return 0
    for i in range(a.k):
        for j in range(a.k):
            v = _as_residue(a.matrix[i][j], n)
            if i != j and v:
                return None
    diag = {_as_residue(a.matrix[i][i], n) for i in range(a.k)}
    return diag.pop() if len(diag) == 1 else None


def _analyze_finite_rank(phi: Endomorphism, cols, lam: Optional[Fraction]) -> _Analysis:
    A = phi.ambient
    n = lam.denominator if lam is not None else 1
    m = lam.numerator if lam is not None else 0
    primes: Dict[int, _PrimeData] = {}
    for s, (atom, mult) in enumerate(A.slots):
        if isinstance(atom, Localized) or (isinstance(atom, Cyclic) and mult is not OMEGA):
            continue
        pd = primes.setdefault(atom.p, _PrimeData(atom.p))
        if isinstance(atom, Cyclic):
            beta = _chunk_scalar(phi.actions[s], atom)
            if beta is None:
                return _fail(phi, lam, f"non-scalar action on slot {s + 1}", lambda K, s=s: _chunk_witness(phi, s, K))
            pd.B.append((s, beta, atom.e))
        else:
            pd.D.append(s)
            pd.D_min = pd.D_min and mult is not OMEGA
    for p, pd in sorted(primes.items()):
        pd.B.sort(key=lambda t: -t[2])
        for (s1, b1, e1), (s2, b2, e2) in zip(pd.B, pd.B[1:]):
            if (b1 - b2) % p ** min(e1, e2):
                return _fail(
                    phi, lam, f"different multiplications on the bounded {p}-slots",
                    lambda K, s1=s1, s2=s2: _pair_witness(phi, s1, s2, K),
                )
        if pd.D:
            dcols = {k: c for k, c in cols.items() if k[0] in pd.D}
            diag = set()
            for key, col in dcols.items():
                if any(t != key for t in col):
                    diag = None
                    break
                diag.add(col.get(key, Fraction(0)))
            if diag is None or len(diag) > 1:
                return _fail(phi, lam, f"non-scalar action on the {p}-Prufer part",
                             lambda K, p=p: W.prufer_matrix_witness_for(phi, p, K))
            pd.alpha = diag.pop()
        if lam is not None:
            pd.k = sum(
                A.mult(s) for s, (a, _) in enumerate(A.slots)
                if isinstance(a, Localized) and p in a.pi and n % p
            )
            locals_p = [s for s, (a, _) in enumerate(A.slots) if isinstance(a, Localized) and p in a.pi]
            if pd.D and n % p == 0:
                return _fail(phi, lam, f"Prufer {p}-part with {p} dividing the denominator {n}",
                             lambda K, p=p, pd=pd, ls=locals_p: _diag(phi, pd, ls, K))
            if pd.D and pd.k and pd.alpha != lam:
                return _fail(phi, lam, f"Prufer scalar {pd.alpha} differs from {lam} at {p}",
                             lambda K, pd=pd, ls=locals_p: _diag(phi, pd, ls, K))
        if pd.D and not pd.D_min:
            for s, beta, e in pd.B:
                if not _eq_in(Cyclic(p, e), pd.alpha, Fraction(beta)):
                    ds = next(t for t in pd.D if A.mult(t) is OMEGA)
                    return _fail(phi, lam, f"bounded and divisible {p}-parts disagree",
                                 lambda K, s=s, ds=ds, e=e: _bd_witness(phi, s, ds, e, K))
    lin = (lam is None or m != 0) and all(_lin_prime(pd) for pd in primes.values())
    return _Analysis(phi, True, lin, "structural conditions hold", lam, primes)


def _lin_prime(pd: _PrimeData) -> bool:
    if any(beta % pd.p == 0 for _, beta, _ in pd.B):
        return False
    if pd.D:
        if pd.alpha == 0:
            return False
        if not pd.D_min and pd.alpha.numerator % pd.p == 0:
            return False
    return True


def _fail(phi, lam, reason, make) -> _Analysis:
    return _Analysis(phi, False, False, reason, lam, make_witness=make)


def _diag(phi: Endomorphism, pd: _PrimeData, locals_p: List[int], K: int):
    return W.diagonal_witness_for(phi, (pd.D[0], 0), _clean_local_key(phi, locals_p[0]), K)


def _chunk_witness(phi: Endomorphism, s: int, K: int):
    atom = phi.ambient.atom(s)
    a = phi.actions[s]
    k = a.k
    c0 = W.clean_start(phi, s)
    for cand in W._chunk_candidates(k):
        x = [0] * k
        for r, v in cand:
            x[r] = v
        layout = [((s, c0 + r), atom.order) for r in range(k)]
        if W.block_sections(phi, layout, x)[0] > 1:
            return W.copywise_witness_for(phi, [(s, c0 + r, k, x[r]) for r in range(k)], [atom.order] * k, "RIN", K)
    raise W.WitnessRefused("chunk action is scalar")


def _pair_witness(phi: Endomorphism, s1: int, s2: int, K: int):
    A = phi.ambient
    coords = [(s1, W.clean_start(phi, s1), 1, 1), (s2, W.clean_start(phi, s2), 1, 1)]
    return W.copywise_witness_for(phi, coords, [A.atom(s1).order, A.atom(s2).order], "RIN", K)


def _bd_witness(phi: Endomorphism, s: int, ds: int, e: int, K: int):
    p = phi.ambient.atom(s).p
    coords = [(s, W.clean_start(phi, s), 1, 1), (ds, W.clean_start(phi, ds), 1, Fraction(1, p**e))]
    return W.copywise_witness_for(phi, coords, [p**e, p**e], "RIN", K)


# ------------------------------------------------------------ certificates


def _a0(A: GroupDescriptor, endos: Sequence[Endomorphism]) -> A0Description:
    modes = tuple((s, "zero") for s, (a, m) in enumerate(A.slots) if isinstance(a, Cyclic) and m is not OMEGA)
    over: Dict[Key, int] = {}
    for phi in endos:
        for key, img in phi.finitary:
            atom, m = A.slots[key[0]]
            if isinstance(atom, Cyclic) and m is not OMEGA:
                continue
            if isinstance(atom, Localized):
                over[key] = lcm(over.get(key, 1), A.order_of(img))
            else:
                over[key] = 0
    return A0Description(modes, tuple(sorted(over.items())))


def _integer_multiplier(an: _Analysis) -> Optional[int]:
    if an.integer is not None:
        return an.integer
    fixed: Optional[int] = None
    if an.lam is not None:
        if an.lam.denominator != 1:
            return None
        fixed = an.lam.numerator
    for pd in an.primes.values():
        if pd.D:
            if pd.alpha.denominator != 1:
                return None
            if fixed is not None and fixed != pd.alpha.numerator:
                return None
            fixed = pd.alpha.numerator
    congruences = []
    for pd in an.primes.values():
        if pd.B:
            s, beta, e = max(pd.B, key=lambda t: t[2])
            congruences.append((beta, pd.p**e))
    if fixed is not None:
        return fixed if all((fixed - b) % q == 0 for b, q in congruences) else None
    if not congruences:
        return 0
    res = crt([q for _, q in congruences], [b for b, _ in congruences])
    return int(res[0])


def _certificate(A: GroupDescriptor, endos: Sequence[Endomorphism], analyses: Sequence[_Analysis]):
    a0 = _a0(A, endos)
    ms = [_integer_multiplier(an) for an in analyses]
    if all(m is not None for m in ms):
        return CaseA(a0, tuple(ms))
    dens = 1
    for an in analyses:
        if an.lam is not None:
            dens *= an.lam.denominator
    pi = PrimeSet.of_number(dens)
    local_copies = [(s, c) for s, (a, m) in enumerate(A.slots) if isinstance(a, Localized) for c in range(m)]
    critical = set()
    for an in analyses:
        for p, pd in an.primes.items():
            k_family = sum(1 for s, _ in local_copies if p in A.atom(s).pi and p not in pi)
            delta = pd.alpha if pd.D else (an.lam if k_family else None)
            if delta is None:
                continue
            if any(not _eq_in(Cyclic(p, e), delta, Fraction(beta)) for _, beta, e in pd.B):
                critical.add(p)
    pi1 = pi.union(PrimeSet(frozenset(critical)))
    B, D, C = [], [], []
    for s, (atom, m) in enumerate(A.slots):
        if isinstance(atom, Cyclic) and m is not OMEGA:
            continue
        if isinstance(atom, Localized):
            C.append(s)
        elif isinstance(atom, Cyclic):
            (B if atom.p in pi1 else C).append(s)
        else:
            (D if atom.p in pi1 else C).append(s)
    scalars = []
    for an in analyses:
        bs = tuple((s, beta) for pd in an.primes.values() for s, beta, _ in pd.B if s in B)
        ds = tuple((s, pd.alpha) for pd in an.primes.values() for s in pd.D if s in D)
        cs = []
        for p, pd in sorted(an.primes.items()):
            if p in pi1:
                continue
            gamma = pd.div_scalar(an.lam)
            if gamma is None:
                gamma = Fraction(max(pd.B, key=lambda t: t[2])[1])
            cs.append((p, gamma))
        scalars.append(EndoScalars(an.lam if an.lam is not None else Fraction(0), bs, ds, tuple(cs)))
    V = tuple((key, a0.scale_of(key)) for key in local_copies)
    return CaseB(pi, pi1, tuple(B), tuple(D), tuple(C), V, len(local_copies), tuple(scalars), a0)


# ----------------------------------------------------------------- public


def classify_general(A: GroupDescriptor, endos: Sequence[Endomorphism], K: int = DEFAULT_K) -> Verdict:
    """Right and left inertiality of a family of endomorphisms of ``A``.

    ``A`` must have finite torsion-free rank or be any direct sum of the
    supported atoms; every endomorphism must be well defined.
    """
    endos = list(endos)
    if not endos:
        raise ClassificationError("empty family")
    for phi in endos:
        if phi.ambient != A:
            raise ClassificationError("endomorphism of a different group")
    analyses = [_analyze(phi) for phi in endos]
    rin = all(an.rin for an in analyses)
    lin = all(an.lin for an in analyses)
    reports = tuple(EndoReport(an.rin, an.lin, an.reason, an.lam) for an in analyses)
    if rin:
        cert = _certificate(A, endos, analyses)
        return Verdict(True, lin, certificate=cert, reports=reports)
    bad = next(an for an in analyses if not an.rin)
    return Verdict(False, lin, witness=bad.make_witness(K), reports=reports)


def classify(A: GroupDescriptor, phi: Endomorphism, K: int = DEFAULT_K) -> Verdict:
    return classify_general(A, [phi], K)


def classify_multiplication(s, A: GroupDescriptor, K: int = DEFAULT_K) -> Verdict:
    """Verdict for multiplication by the rational ``s``."""
    phi = Endomorphism.scalar(A, Fraction(s))
    ok, why = phi.check()
    if not ok:
        raise ClassificationError(f"multiplication by {s} is not defined: {why}")
    return classify(A, phi, K)


def classify_torsion_free(A: GroupDescriptor, endos: Sequence[Endomorphism], K: int = DEFAULT_K) -> Verdict:
    if not A.is_torsion_free:
        raise ClassificationError("group is not torsion-free")
    return classify_general(A, endos, K)


def classify_periodic(A: GroupDescriptor, endos: Sequence[Endomorphism], K: int = DEFAULT_K) -> Verdict:
    if not A.is_periodic:
        raise ClassificationError("group is not periodic")
    return classify_general(A, endos, K)


def verify_verdict(verdict: Verdict, A: GroupDescriptor, endos: Sequence[Endomorphism], K: int = DEFAULT_K) -> bool:
    if verdict.rin:
        return bool(validate_certificate(verdict.certificate, A, endos, K))
    return bool(W.verify_witness(verdict.witness, K=K))


# ------------------------------------------------------------- derived ops


def common_V(endos: Sequence[Endomorphism], A: GroupDescriptor) -> SubgroupHandle:
    """Invariant subgroup ``V``: one copy of ``Q^pi`` inside each localized copy."""
    if not A.has_ftfr:
        raise ClassificationError("group has infinite torsion-free rank")
    verdict = classify_general(A, endos)
    if not verdict.rin:
        raise ClassificationError("family is not right-inertial")
    dens = 1
    for rep in verdict.reports:
        if rep.scalar is not None:
            dens *= rep.scalar.denominator
    pi = PrimeSet.of_number(dens)
    a0 = _a0(A, endos)
    gens, div = [], []
    for s, (atom, m) in enumerate(A.slots):
        if not isinstance(atom, Localized):
            continue
        for c in range(m):
            g = A.element({(s, c): a0.scale_of((s, c))})
            if len(pi):
                div.append((g, pi))
            else:
                gens.append(g)
    return SubgroupHandle(A, tuple(gens), tuple(div), "V")


@dataclass(frozen=True)
class MFForm:
    """Multiplication by ``alpha`` (per prime) on the finite-index ``a0``."""

    alpha: Tuple[Tuple[int, Fraction], ...]
    a0: A0Description
    index: int


@dataclass(frozen=True)
class FMForm:
    """Multiplication by ``alpha`` (per prime) modulo a finite ``A1``."""

    alpha: Tuple[Tuple[int, Fraction], ...]
    a1_order: int


def _prime_multiplication(phi: Endomorphism, alpha: Dict[int, Fraction]) -> Endomorphism:
    A = phi.ambient
    acts = {}
    for s, (atom, _) in enumerate(A.slots):
        q = alpha.get(atom.p, Fraction(0))
        if isinstance(atom, Cyclic):
            q = Fraction(_as_residue(q, atom.order)) if q.denominator % atom.p else Fraction(0)
        acts[s] = q
    return Endomorphism.build(A, acts)


def convert_mf_fm(phi: Endomorphism, direction: str = "MF->FM"):
    """Translate between the two normal forms of a periodic multiplication-like
    endomorphism: multiplication on a finite-index subgroup (``MF``) and
    multiplication modulo a finite subgroup (``FM``)."""
    A = phi.ambient
    if not A.is_periodic:
        raise ClassificationError("group is not periodic")
    an = _analyze(phi)
    if not an.rin:
        raise ClassificationError("not a multiplication on a finite-index subgroup")
    alpha: Dict[int, Fraction] = {}
    for p, pd in an.primes.items():
        delta = pd.alpha if pd.D else None
        if delta is None:
            delta = Fraction(max(pd.B, key=lambda t: t[2])[1])
        if any(not _eq_in(Cyclic(p, e), delta, Fraction(b)) for _, b, e in pd.B):
            raise ClassificationError(f"no single multiplication on the {p}-component")
        alpha[p] = delta
    mult = _prime_multiplication(phi, alpha)
    a1 = image_finite(phi - mult)
    if not a1.is_finite:
        raise ClassificationError("phi - alpha has infinite image")
    key = tuple(sorted(alpha.items()))
    if direction.upper().replace(" ", "") in ("MF->FM", "FM"):
        return FMForm(key, a1.n)
    if direction.upper().replace(" ", "") in ("FM->MF", "MF"):
        a0 = _a0(A, [phi])
        return MFForm(key, a0, a0.index(A))
    raise ValueError(f"unknown direction {direction}")


def lift_finite_index(verdict: Verdict, index: Optional[int] = None, kernel_order: Optional[int] = None) -> Verdict:
    """Transfer a verdict from a finite-index subgroup (``index``) or from a
    quotient by a finite subgroup (``kernel_order``) to the whole group."""
    for v in (index, kernel_order):
        if v is not None and (not isinstance(v, int) or v < 1):
            raise ClassificationError("index and kernel order must be positive integers")
    if index is None and kernel_order is None:
        raise ClassificationError("give an index or a kernel order")
    cert = verdict.certificate
    if cert is not None:
        cert = LiftedCertificate(cert, index or 1, kernel_order or 1)
    return Verdict(verdict.rin, verdict.lin, cert, verdict.witness, verdict.reports)


@dataclass(frozen=True)
class LiftedCertificate:
    base: object
    index: int
    kernel_order: int
    kind = "lifted"


def commutator_check(phi: Endomorphism, psi: Endomorphism) -> SectionSize:
    """Size of the image of ``phi psi - psi phi`` for right-inertial phi, psi."""
    A = phi.ambient
    for f in (phi, psi):
        if not classify(A, f).rin:
            raise ClassificationError("both endomorphisms must be right-inertial")
    return image_finite(compose(phi, psi) - compose(psi, phi))


@dataclass(frozen=True)
class BridgeResult:
    phi: Verdict
    inverse: Verdict
    rin_iff_inverse_lin: bool
    lin_implies_rin: bool

    @property
    def flags(self) -> Tuple[bool, bool, bool, bool]:
        """``(rin(phi), lin(phi), rin(phi^-1), lin(phi^-1))``."""
        return (self.phi.rin, self.phi.lin, self.inverse.rin, self.inverse.lin)


def automorphism_bridge(phi: Endomorphism, A: GroupDescriptor) -> BridgeResult:
    inv = inverse(phi)
    v, vi = classify(A, phi), classify(A, inv)
    return BridgeResult(v, vi, v.rin == vi.lin, (not v.lin) or v.rin)


__all__ = [
    "Verdict",
    "EndoReport",
    "ClassificationError",
    "classify",
    "classify_general",
    "classify_multiplication",
    "classify_torsion_free",
    "classify_periodic",
    "verify_verdict",
    "common_V",
    "convert_mf_fm",
    "MFForm",
    "FMForm",
    "lift_finite_index",
    "LiftedCertificate",
    "commutator_check",
    "automorphism_bridge",
    "BridgeResult",
]
