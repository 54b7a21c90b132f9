"""Exhaustive ground truth on finite abelian groups.

The heavy loops live in :mod:`inertia._kernels`.  This module wraps them
and also keeps slow pure-Python routes (closure of element sets) used as
independent cross-checks on small groups.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import prod
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels as K
from .groups import (
    Element,
    GroupDescriptor,
    Localized,
    SubgroupHandle,
    fg_index,
    prime_factors,
)
from . import lattice

DEFAULT_CAP = 2**14
DEFAULT_MAX_SUBGROUPS = 2_000_000
LATTICE_CAP = 512


class CapExceeded(ValueError):
    pass


class FiniteAbelianGroup:
    """``Z(q_1) + ... + Z(q_n)`` with prime-power ``q_i``; elements are codes
    ``sum c_i * stride_i``."""

    def __init__(self, orders: Sequence[int]):
        orders = [int(q) for q in orders]
        for q in orders:
            ps = prime_factors(q)
            if q < 2 or len(ps) != 1:
                raise ValueError(f"{q} is not a prime power")
        self.orders = tuple(orders)
        strides = []
        s = 1
        for q in reversed(orders):
            strides.append(s)
            s *= q
        self.strides = tuple(reversed(strides))
        self.order = s

    @classmethod
    def from_descriptor(cls, A: GroupDescriptor) -> "FiniteAbelianGroup":
        if not A.is_finite:
            raise ValueError("group is not finite")
        orders = []
        for atom, m in A.slots:
            orders.extend([atom.order] * m)
        return cls(orders)

    @classmethod
    def parse(cls, text: str) -> "FiniteAbelianGroup":
        from .grammar import parse_group

        return cls.from_descriptor(parse_group(text))

    def __repr__(self):
        return "FiniteAbelianGroup(" + " + ".join(f"Z({q})" for q in self.orders) + ")"

    def __eq__(self, other):
        return isinstance(other, FiniteAbelianGroup) and self.orders == other.orders

    def __hash__(self):
        return hash(self.orders)

    @property
    def n(self) -> int:
        return len(self.orders)

    @property
    def prime(self) -> Optional[int]:
        ps = {prime_factors(q)[0] for q in self.orders}
        return ps.pop() if len(ps) == 1 else None

    def encode(self, coords: Sequence[int]) -> int:
        return sum((c % q) * s for c, q, s in zip(coords, self.orders, self.strides))

    def decode(self, x: int) -> Tuple[int, ...]:
        return tuple((x // s) % q for q, s in zip(self.orders, self.strides))

    def add(self, x: int, y: int) -> int:
        return self.encode([a + b for a, b in zip(self.decode(x), self.decode(y))])

    def unit(self, i: int) -> int:
        return self.strides[i]

    def check_cap(self, cap: int = DEFAULT_CAP):
        if self.order > cap:
            raise CapExceeded(f"|G| = {self.order} exceeds the cap {cap}")

    @cached_property
    def arrays(self):
        mods = np.array(self.orders, dtype=np.int64)
        strides = np.array(self.strides, dtype=np.int64)
        primes = np.array([prime_factors(q)[0] for q in self.orders], dtype=np.int64)
        exps = np.array([round(np.log(q) / np.log(p)) for q, p in zip(self.orders, primes)], dtype=np.int64)
        return mods, strides, primes, exps

    @cached_property
    def addt(self) -> np.ndarray:
        mods, strides, _, _ = self.arrays
        return K.add_table(mods, strides, self.order)


@dataclass(frozen=True)
class FiniteEndo:
    """Endomorphism of a finite abelian group, stored as a full image table."""

    group: FiniteAbelianGroup
    table: Tuple[int, ...]

    @classmethod
    def from_columns(cls, G: FiniteAbelianGroup, columns: Sequence[Sequence[int]]) -> "FiniteEndo":
        """``columns[j]`` holds the coordinates of the image of unit vector ``j``."""
        for j, col in enumerate(columns):
            img = G.encode(col)
            # the image of a unit of order q must have order dividing q
            z = 0
            for _ in range(G.orders[j]):
                z = G.add(z, img)
            if z != 0:
                raise ValueError(f"image of generator {j} has order not dividing {G.orders[j]}")
        mods, strides, _, _ = G.arrays
        cols = np.array([G.encode(c) for c in columns], dtype=np.int64)
        return cls(G, tuple(int(v) for v in K.image_table(mods, strides, G.order, cols)))

    @classmethod
    def from_matrix(cls, G: FiniteAbelianGroup, matrix: Sequence[Sequence[int]]) -> "FiniteEndo":
        """``matrix[i][j]`` is coordinate ``i`` of the image of unit ``j``."""
        n = G.n
        return cls.from_columns(G, [[matrix[i][j] for i in range(n)] for j in range(n)])

    @classmethod
    def multiplication(cls, G: FiniteAbelianGroup, k: int) -> "FiniteEndo":
        return cls.from_matrix(G, [[k if i == j else 0 for j in range(G.n)] for i in range(G.n)])

    @classmethod
    def from_endomorphism(cls, G: FiniteAbelianGroup, phi) -> "FiniteEndo":
        """Convert an :class:`~inertia.endo.Endomorphism` of a finite descriptor."""
        A = phi.ambient
        if FiniteAbelianGroup.from_descriptor(A) != G:
            raise ValueError("group mismatch")
        keys = [(s, c) for s, (atom, m) in enumerate(A.slots) for c in range(m)]
        columns = []
        for key in keys:
            img = phi.apply(A.basis(*key))
            columns.append([int(img.get(k)) for k in keys])
        return cls.from_columns(G, columns)

    def __call__(self, x: int) -> int:
        return self.table[x]

    @cached_property
    def array(self) -> np.ndarray:
        return np.array(self.table, dtype=np.int32)


def random_endo(G: FiniteAbelianGroup, rng: np.random.Generator) -> FiniteEndo:
    """Uniform random endomorphism of a p-group given by its coordinates.

    Entry ``(i, j)`` of the matrix is any multiple of
    ``q_i / gcd(q_i, q_j)`` modulo ``q_i``."""
    n = G.n
    mat = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            qi, qj = G.orders[i], G.orders[j]
            if prime_factors(qi)[0] != prime_factors(qj)[0]:
                continue
            step = qi // min(qi, qj)
            mat[i][j] = step * int(rng.integers(0, qi // step))
    return FiniteEndo.from_matrix(G, mat)


# ------------------------------------------------------------ subgroups


@dataclass(frozen=True)
class FiniteSubgroup:
    group: FiniteAbelianGroup
    elements: FrozenSet[int]
    gens: Tuple[int, ...] = ()

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, x: int) -> bool:
        return x in self.elements

    def __le__(self, other: "FiniteSubgroup") -> bool:
        return self.elements <= other.elements

    def __eq__(self, other):
        return isinstance(other, FiniteSubgroup) and self.elements == other.elements

    def __hash__(self):
        return hash(self.elements)


def span(G: FiniteAbelianGroup, gens: Iterable[int]) -> FiniteSubgroup:
    gens = tuple(gens)
    elems = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = G.add(x, g)
                if y not in elems:
                    elems.add(y)
                    nxt.append(y)
        frontier = nxt
    return FiniteSubgroup(G, frozenset(elems), gens)


@dataclass
class SubgroupTable:
    group: FiniteAbelianGroup
    subgroups: List[FiniteSubgroup]

    def __len__(self):
        return len(self.subgroups)

    @cached_property
    def index(self) -> Dict[FrozenSet[int], int]:
        return {s.elements: i for i, s in enumerate(self.subgroups)}

    def join(self, i: int, j: int) -> int:
        a, b = self.subgroups[i], self.subgroups[j]
        return self.index[span(self.group, a.gens + b.gens).elements]

    def meet(self, i: int, j: int) -> int:
        return self.index[self.subgroups[i].elements & self.subgroups[j].elements]

    def verify_count(self) -> bool:
        """Compare with an independent count (formula for p-groups, else a
        brute-force pass)."""
        return len(self) == count_subgroups_independent(self.group)


def _empty_maps(G: FiniteAbelianGroup):
    maps = np.zeros((0, 1, G.order), dtype=np.int32)
    nmaps = np.zeros(0, dtype=np.int64)
    return maps, nmaps, *_empty_lattice(0, G)


def _empty_lattice(F: int, G: FiniteAbelianGroup):
    W = (G.order + 63) // 64
    return (
        np.full(F, -1, dtype=np.int64),
        np.zeros((F, 1, W), dtype=np.uint64),
        np.zeros((F, 1, 32), dtype=np.int32),
        np.zeros((F, 1), dtype=np.int32),
        np.zeros((F, 1), dtype=np.int64),
    )


def _run(G: FiniteAbelianGroup, families: Sequence[Sequence[FiniteEndo]], check=False, collect=0, use_lattice=True):
    mods, strides, primes, exps = G.arrays
    addt = G.addt
    W = (G.order + 63) // 64
    F = len(families)
    if F == 0:
        maps, nmaps, Lcnt, Lmasks, Lgens, Lng, Lsizes = _empty_maps(G)
    else:
        mx = max(1, max(len(f) for f in families))
        maps = np.zeros((F, mx, G.order), dtype=np.int32)
        nmaps = np.zeros(F, dtype=np.int64)
        for f, fam in enumerate(families):
            nmaps[f] = len(fam)
            for t, phi in enumerate(fam):
                if phi.group != G:
                    raise ValueError("endomorphism of a different group")
                maps[f, t] = phi.array
        Lcnt = np.full(F, -1, dtype=np.int64)
        lat = []
        for f in range(F):
            if use_lattice:
                cnt, masks, gens, ng, sizes = K.build_lattice(addt, G.order, maps[f], nmaps[f], W, LATTICE_CAP)
            else:
                cnt = -1
            lat.append((cnt, masks, gens, ng, sizes) if cnt >= 0 else None)
            Lcnt[f] = cnt
        L = max([x[0] for x in lat if x is not None], default=1)
        Lmasks = np.zeros((F, L, W), dtype=np.uint64)
        Lgens = np.zeros((F, L, 32), dtype=np.int32)
        Lng = np.zeros((F, L), dtype=np.int32)
        Lsizes = np.zeros((F, L), dtype=np.int64)
        for f, x in enumerate(lat):
            if x is None:
                continue
            cnt, masks, gens, ng, sizes = x
            Lmasks[f, :cnt] = masks[:cnt]
            Lgens[f, :cnt] = gens[:cnt]
            Lng[f, :cnt] = ng[:cnt]
            Lsizes[f, :cnt] = sizes[:cnt]
    return K.enumerate_kernel(
        mods, strides, primes, exps, G.order, addt, maps, nmaps, Lcnt, Lmasks, Lgens, Lng, Lsizes,
        check, collect > 0, max(collect, 1),
    )


def count_subgroups(G: FiniteAbelianGroup, cap: int = DEFAULT_CAP) -> int:
    G.check_cap(cap)
    return int(_run(G, [])[0])


def enumerate_subgroups(
    G: FiniteAbelianGroup, cap: int = DEFAULT_CAP, max_subgroups: int = DEFAULT_MAX_SUBGROUPS
) -> SubgroupTable:
    """Every subgroup of ``G`` exactly once, with generators and elements."""
    G.check_cap(cap)
    total = count_subgroups(G, cap)
    if total > max_subgroups:
        raise CapExceeded(f"{total} subgroups exceed the table limit {max_subgroups}")
    coll = _run(G, [], collect=total)[5]
    subs = []
    for row in coll[:total]:
        gens = tuple(int(g) for g in row if g >= 0)
        subs.append(span(G, gens))
    return SubgroupTable(G, subs)


# ---------------------------------------------------- independent counts


def brute_force_subgroups(G: FiniteAbelianGroup, cap: int = 256) -> List[FiniteSubgroup]:
    """All subgroups by closing under one extra element at a time."""
    G.check_cap(cap)
    seen = {frozenset([0]): FiniteSubgroup(G, frozenset([0]))}
    frontier = list(seen.values())
    while frontier:
        nxt = []
        for S in frontier:
            for g in range(G.order):
                if g in S.elements:
                    continue
                T = span(G, S.gens + (g,))
                if T.elements not in seen:
                    seen[T.elements] = T
                    nxt.append(T)
        frontier = nxt
    return list(seen.values())


def _gaussian(n: int, k: int, p: int) -> int:
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= p ** (n - i) - 1
        den *= p ** (i + 1) - 1
    return num // den


def _conjugate(part: Sequence[int]) -> List[int]:
    return [sum(1 for x in part if x > i) for i in range(max(part, default=0))]


def _subpartitions(part: Sequence[int]):
    def rec(i, prev):
        if i == len(part):
            yield []
            return
        for x in range(min(prev, part[i]), -1, -1):
            for rest in rec(i + 1, x):
                yield [x] + rest

    for mu in rec(0, max(part, default=0)):
        yield [x for x in mu if x]


def count_subgroups_formula(part: Sequence[int], p: int) -> int:
    """Number of subgroups of the p-group of type ``part`` (sum over
    subgroup types of products of Gaussian binomials)."""
    part = sorted(part, reverse=True)
    lc = _conjugate(part)
    total = 0
    for mu in _subpartitions(part):
        mc = _conjugate(mu) + [0] * (len(lc) + 1)
        term = 1
        for i, a in enumerate(lc):
            b, c = mc[i], mc[i + 1]
            term *= p ** (c * (a - b)) * _gaussian(a - c, b - c, p)
        total += term
    return total


def count_subgroups_independent(G: FiniteAbelianGroup) -> int:
    by_prime: Dict[int, List[int]] = {}
    for q in G.orders:
        p = prime_factors(q)[0]
        e = 0
        while q > 1:
            q //= p
            e += 1
        by_prime.setdefault(p, []).append(e)
    return prod(count_subgroups_formula(part, p) for p, part in by_prime.items())


# -------------------------------------------------------------- closures


def _as_family(phi, G: Optional[FiniteAbelianGroup] = None) -> List[FiniteEndo]:
    if phi is None:
        return []
    if isinstance(phi, FiniteEndo) or hasattr(phi, "ambient"):
        phi = [phi]
    out = []
    for f in phi:
        if not isinstance(f, FiniteEndo):
            f = FiniteEndo.from_endomorphism(G or FiniteAbelianGroup.from_descriptor(f.ambient), f)
        out.append(f)
    return out


def phi_closure_up(X: FiniteSubgroup, Phi) -> FiniteSubgroup:
    """Smallest Phi-invariant subgroup containing X (direct iteration)."""
    G = X.group
    fam = _as_family(Phi, G)
    gens = list(X.gens) or sorted(X.elements)
    cur = span(G, gens)
    while True:
        new = [f(x) for f in fam for x in cur.elements if f(x) not in cur.elements]
        if not new:
            return cur
        cur = span(G, tuple(cur.gens) + (new[0],))


def phi_closure_down(X: FiniteSubgroup, Phi) -> FiniteSubgroup:
    """Largest Phi-invariant subgroup inside X (intersect with preimages)."""
    G = X.group
    fam = _as_family(Phi, G)
    cur = set(X.elements)
    while True:
        nxt = {x for x in cur if all(f(x) in cur for f in fam)}
        if nxt == cur:
            return FiniteSubgroup(G, frozenset(cur), tuple(sorted(cur)))
        cur = nxt


# --------------------------------------------------------------- bounds


@dataclass(frozen=True)
class ClosureBound:
    m: int
    worst: int
    holds: bool

    def __iter__(self):
        return iter((self.m, self.worst, self.holds))


def _log(n: int, p: int) -> int:
    e = 0
    while n > 1:
        if n % p:
            raise ArithmeticError(f"{n} is not a power of {p}")
        n //= p
        e += 1
    return e


def closure_bounds(
    G: FiniteAbelianGroup, endos: Sequence[FiniteEndo], cap: int = DEFAULT_CAP, check: bool = False
) -> List[ClosureBound]:
    """One enumeration pass; a :class:`ClosureBound` per endomorphism."""
    G.check_cap(cap)
    endos = _as_family(endos, G)
    p = G.prime
    if p is None:
        raise ValueError("closure bound needs a p-group")
    count, down, up, fs, mism, _ = _run(G, [[e] for e in endos], check=check)
    if check and mism.any():
        raise AssertionError(f"closure routes disagree: {mism.tolist()}")
    out = []
    for d, u in zip(down, up):
        m, w = _log(int(d), p), _log(int(u), p)
        out.append(ClosureBound(m, w, w <= m * m))
    return out


def check_closure_bound(G: FiniteAbelianGroup, phi: FiniteEndo, cap: int = DEFAULT_CAP) -> ClosureBound:
    """``m = max log_p |X/X_phi|``, ``worst = max log_p |X^phi/X|`` over all X."""
    return closure_bounds(G, _as_family(phi, G), cap)[0]


def fs_bounds(
    G: FiniteAbelianGroup, families: Sequence[Sequence[FiniteEndo]], cap: int = DEFAULT_CAP, check: bool = False
) -> List[int]:
    G.check_cap(cap)
    fams = [_as_family(f, G) for f in families]
    count, down, up, fs, mism, _ = _run(G, fams, check=check)
    if check and mism.any():
        raise AssertionError(f"closure routes disagree: {mism.tolist()}")
    return [int(x) for x in fs]


def fs_bound(G: FiniteAbelianGroup, Phi, cap: int = DEFAULT_CAP, check: bool = False) -> int:
    """Exact maximum of ``|X^Phi / X_Phi|`` over all subgroups X."""
    fam = _as_family(Phi, G)
    if not fam:
        G.check_cap(cap)
        return 1
    return fs_bounds(G, [fam], cap, check)[0]


# ---------------------------------------------------------- cyclic module


@dataclass(frozen=True)
class CyclicModule:
    handle: object
    finite: bool
    order: Optional[int]
    rank: int
    torsion_order: int
    steps: int


def cyclic_module(a, phi, cap: int = 64) -> CyclicModule:
    """``<a>^phi``: the subgroup spanned by ``a, phi a, phi^2 a, ...``.

    ``a`` is an element code with a :class:`FiniteEndo`, or an
    :class:`~inertia.groups.Element` with an endomorphism of a descriptor.
    Raises :class:`CapExceeded` when the span has not stabilized after
    ``cap`` steps.
    """
    if isinstance(phi, FiniteEndo):
        G = phi.group
        X = span(G, [a])
        for step in range(cap):
            if all(phi(x) in X.elements for x in X.gens):
                return CyclicModule(X, True, X.order, 0, X.order, step)
            X = span(G, X.gens + (phi(X.gens[-1]),))
        raise CapExceeded(f"cyclic module did not stabilize within {cap} steps")
    A: GroupDescriptor = phi.ambient
    gens = [a]
    for step in range(cap):
        nxt = phi.apply(gens[-1])
        gap, idx = fg_index(A, gens, [nxt])
        if gap == 0 and idx == 1:
            return _mixed_module(A, gens, step)
        gens.append(nxt)
    raise CapExceeded(f"cyclic module did not stabilize within {cap} steps")


def _mixed_module(A: GroupDescriptor, gens: List[Element], steps: int) -> CyclicModule:
    keys = sorted({k for g in gens for k in g.support if isinstance(A.atom(k[0]), Localized)})
    den = 1
    for g in gens:
        for k in keys:
            den = den * Fraction(g.get(k)).denominator // _gcd(den, Fraction(g.get(k)).denominator)
    free = [[int(Fraction(g.get(k)) * den) for k in keys] for g in gens]
    n = len(gens)
    aug = [row + [int(i == j) for j in range(n)] for i, row in enumerate(free)]
    ech = lattice.echelon(aug, len(keys) + n)
    rank = sum(1 for col, _ in ech if col < len(keys))
    kernel = [row[len(keys):] for col, row in ech if col >= len(keys)]
    torsion = [A.combine(zip(c, gens)) for c in kernel]
    _, t_order = fg_index(A, [], torsion)
    handle = SubgroupHandle(A, tuple(gens), (), "cyclic module")
    finite = rank == 0
    return CyclicModule(handle, finite, t_order if finite else None, rank, t_order, steps)


def _gcd(a: int, b: int) -> int:
    from math import gcd

    return gcd(a, b)


__all__ = [
    "FiniteAbelianGroup",
    "FiniteEndo",
    "FiniteSubgroup",
    "SubgroupTable",
    "CapExceeded",
    "random_endo",
    "span",
    "enumerate_subgroups",
    "count_subgroups",
    "brute_force_subgroups",
    "count_subgroups_formula",
    "count_subgroups_independent",
    "phi_closure_up",
    "phi_closure_down",
    "check_closure_bound",
    "closure_bounds",
    "fs_bound",
    "fs_bounds",
    "cyclic_module",
    "CyclicModule",
    "ClosureBound",
]
