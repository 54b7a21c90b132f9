"""Constructive abelian groups.

A group is an ordered list of slots ``(atom, multiplicity)`` where an atom is
``Z(p^e)``, ``Z(p^inf)`` or ``Q^pi`` (rationals with pi-number denominators)
and the multiplicity is a positive integer or ``OMEGA``.  Finitely presented
groups are reduced once to this form.

Elements are finite-support maps ``(slot, copy) -> coordinate``:

* ``Z(p^e)``: an int in ``[0, p^e)``;
* ``Z(p^inf)``: a ``Fraction`` in ``[0, 1)`` with a p-power denominator;
* ``Q^pi``: a ``Fraction`` whose denominator is a pi-number.

>>> A = GroupDescriptor.parse("Z(2^2) + Z(3^inf) + Q[2]")
>>> str(torsion_part(A))
'Z(2^2) + Z(3^inf)'
>>> x = A.element({(1, 0): Fraction(1, 3)})
>>> A.scale(x, Fraction(1, 2)).coords
(((1, 0), Fraction(2, 3)),)
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from sympy import factorint, isprime
from sympy import prime as nth_prime

from . import lattice

DEFAULT_PRECISION = 20
DEFAULT_THRESHOLD = 10**4


class _Omega:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "OMEGA"

    def __reduce__(self):
        return (_Omega, ())


OMEGA = _Omega()
Multiplicity = Union[int, _Omega]


def prime_factors(n: int) -> List[int]:
    n = abs(n)
    if n <= 1:
        return []
    return sorted(factorint(n))


def vp(n: Union[int, Fraction], p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    q = Fraction(n)
    if q == 0:
        raise ValueError("valuation of zero")
    v = 0
    a, b = q.numerator, q.denominator
    while a % p == 0:
        a //= p
        v += 1
    while b % p == 0:
        b //= p
        v -= 1
    return v


def mod_inverse(a: int, m: int) -> int:
    return pow(a, -1, m) if m > 1 else 0


# --------------------------------------------------------------------- primes


@dataclass(frozen=True)
class PrimeSet:
    """A finite set of primes, or every prime when ``primes is None``."""

    primes: Optional[frozenset] = frozenset()

    def __post_init__(self):
        if self.primes is not None:
            ps = frozenset(int(p) for p in self.primes)
            for p in ps:
                if not isprime(p):
                    raise ValueError(f"{p} is not prime")
            object.__setattr__(self, "primes", ps)

    @classmethod
    def all(cls) -> "PrimeSet":
        return cls(None)

    @classmethod
    def of(cls, *ps: int) -> "PrimeSet":
        return cls(frozenset(ps))

    @classmethod
    def of_number(cls, n: int) -> "PrimeSet":
        return cls(frozenset(prime_factors(n)))

    @property
    def is_all(self) -> bool:
        return self.primes is None

    def __contains__(self, p: int) -> bool:
        return self.primes is None or p in self.primes

    def __iter__(self) -> Iterator[int]:
        if self.primes is None:
            raise ValueError("cannot iterate over every prime")
        return iter(sorted(self.primes))

    def __len__(self):
        if self.primes is None:
            raise ValueError("infinite prime set")
        return len(self.primes)

    def sorted(self) -> List[int]:
        return list(self)

    def issubset(self, other: "PrimeSet") -> bool:
        if other.is_all:
            return True
        if self.is_all:
            return False
        return self.primes <= other.primes

    def union(self, other: "PrimeSet") -> "PrimeSet":
        if self.is_all or other.is_all:
            return PrimeSet.all()
        return PrimeSet(self.primes | other.primes)

    def intersection(self, other: "PrimeSet") -> "PrimeSet":
        if self.is_all:
            return other
        if other.is_all:
            return self
        return PrimeSet(self.primes & other.primes)

    def admits(self, n: Union[int, Fraction]) -> bool:
        """True when ``n`` (an integer or a denominator) is a pi-number."""
        return all(p in self for p in prime_factors(int(n)))

    def __str__(self):
        if self.is_all:
            return "ALL"
        return "{" + ",".join(map(str, self.sorted())) + "}"


# ---------------------------------------------------------------------- atoms


@dataclass(frozen=True)
class Cyclic:
    p: int
    e: int

    def __post_init__(self):
        if not isprime(self.p) or self.e < 1:
            raise ValueError(f"bad cyclic atom Z({self.p}^{self.e})")

    @property
    def order(self) -> int:
        return self.p**self.e

    def __str__(self):
        return f"Z({self.p}^{self.e})"


@dataclass(frozen=True)
class Prufer:
    p: int

    def __post_init__(self):
        if not isprime(self.p):
            raise ValueError(f"{self.p} is not prime")

    def __str__(self):
        return f"Z({self.p}^inf)"


@dataclass(frozen=True)
class Localized:
    pi: PrimeSet

    def __str__(self):
        if self.pi.is_all:
            return "Q"
        if not self.pi.primes:
            return "Z"
        return "Q[" + ",".join(map(str, self.pi.sorted())) + "]"


Atom = Union[Cyclic, Prufer, Localized]


def is_torsion_atom(atom: Atom) -> bool:
    return not isinstance(atom, Localized)


def _mult_str(m: Multiplicity) -> str:
    if m is OMEGA:
        return "^w"
    return "" if m == 1 else f"^{m}"


# ------------------------------------------------------------------- elements


class Element:
    """Immutable finite-support coordinate map; build through a group."""

    __slots__ = ("coords",)

    def __init__(self, coords: Iterable[Tuple[Tuple[int, int], object]] = ()):
        object.__setattr__(self, "coords", tuple(sorted(coords)))

    def __setattr__(self, *_):
        raise AttributeError("Element is immutable")

    def __eq__(self, other):
        return isinstance(other, Element) and self.coords == other.coords

    def __hash__(self):
        return hash(self.coords)

    def __repr__(self):
        body = ", ".join(f"{s}.{c}:{v}" for (s, c), v in self.coords)
        return f"Element({body})"

    def get(self, key: Tuple[int, int], default=0):
        for k, v in self.coords:
            if k == key:
                return v
        return default

    def as_dict(self) -> Dict[Tuple[int, int], object]:
        return dict(self.coords)

    @property
    def support(self) -> List[Tuple[int, int]]:
        return [k for k, _ in self.coords]

    def is_zero(self) -> bool:
        return not self.coords


# --------------------------------------------------------------------- groups


@dataclass(frozen=True)
class FgPresentation:
    """Relation matrix over ``ngens`` free generators (one relation per row)."""

    relations: Tuple[Tuple[int, ...], ...]
    ngens: int

    def __post_init__(self):
        for row in self.relations:
            if len(row) != self.ngens:
                raise ValueError("relation row length does not match generator count")


@dataclass(frozen=True)
class GroupDescriptor:
    slots: Tuple[Tuple[Atom, Multiplicity], ...]
    presentation: Optional[FgPresentation] = None
    generator_images: Tuple[Element, ...] = ()

    def __post_init__(self):
        for atom, m in self.slots:
            if not (m is OMEGA or (isinstance(m, int) and m >= 1)):
                raise ValueError(f"bad multiplicity {m!r}")

    # construction -----------------------------------------------------------

    @classmethod
    def of(cls, *slots) -> "GroupDescriptor":
        out = []
        for s in slots:
            if isinstance(s, tuple):
                out.append(s)
            else:
                out.append((s, 1))
        return cls(tuple(out))

    @classmethod
    def parse(cls, text: str) -> "GroupDescriptor":
        from .grammar import parse_group

        return parse_group(text)

    @classmethod
    def from_presentation(cls, relations: Sequence[Sequence[int]], ngens: int) -> "GroupDescriptor":
        """Normalize a finitely presented group to cyclic-decomposition form."""
        pres = FgPresentation(tuple(tuple(int(x) for x in r) for r in relations), ngens)
        rows = [list(r) for r in pres.relations]
        u, d, v = lattice.smith_normal_form(rows, ngens)
        diag = [d[i][i] if i < len(d) else 0 for i in range(ngens)]
        # a row vector x of generator coefficients maps to x @ v, which
        # identifies the group with the direct sum of Z/d_j
        factor_parts: List[List[Atom]] = []
        for dj in diag:
            if dj == 1:
                factor_parts.append([])
            elif dj == 0:
                factor_parts.append([Localized(PrimeSet())])
            else:
                factor_parts.append([Cyclic(p, k) for p, k in sorted(factorint(dj).items())])
        atoms: List[Atom] = sorted({a for parts in factor_parts for a in parts}, key=_atom_key)
        slot_of = {a: i for i, a in enumerate(atoms)}
        count = {a: 0 for a in atoms}
        placement: List[List[Tuple[int, int]]] = []
        for parts in factor_parts:
            here = []
            for a in parts:
                here.append((slot_of[a], count[a]))
                count[a] += 1
            placement.append(here)
        slots = tuple((a, count[a]) for a in atoms)
        group = cls(slots, pres)
        images = []
        for i in range(ngens):
            coords: Dict[Tuple[int, int], object] = {}
            for j in range(ngens):
                coef = v[i][j]
                if coef:
                    # Z/d_j splits by CRT; 1 maps to 1 in each prime-power factor
                    for key in placement[j]:
                        coords[key] = coords.get(key, 0) + coef
            images.append(group.element(coords))
        return cls(slots, pres, tuple(images))

    # derived quantities -----------------------------------------------------

    def __str__(self):
        if not self.slots:
            return "0"
        return " + ".join(f"{a}{_mult_str(m)}" for a, m in self.slots)

    def atom(self, s: int) -> Atom:
        return self.slots[s][0]

    def mult(self, s: int) -> Multiplicity:
        return self.slots[s][1]

    @property
    def nslots(self) -> int:
        return len(self.slots)

    @property
    def r0(self) -> Multiplicity:
        """Torsion-free rank."""
        total = 0
        for a, m in self.slots:
            if isinstance(a, Localized):
                if m is OMEGA:
                    return OMEGA
                total += m
        return total

    @property
    def has_ftfr(self) -> bool:
        return self.r0 is not OMEGA

    @property
    def is_periodic(self) -> bool:
        return all(is_torsion_atom(a) for a, _ in self.slots)

    @property
    def is_torsion_free(self) -> bool:
        return not any(is_torsion_atom(a) for a, _ in self.slots)

    @property
    def is_finite(self) -> bool:
        return all(isinstance(a, Cyclic) and m is not OMEGA for a, m in self.slots)

    @property
    def order(self) -> Optional[int]:
        if not self.is_finite:
            return None
        n = 1
        for a, m in self.slots:
            n *= a.order**m
        return n

    @property
    def torsion_primes(self) -> List[int]:
        return sorted({a.p for a, _ in self.slots if is_torsion_atom(a)})

    @property
    def exponent(self) -> Optional[int]:
        """Exponent when the group is bounded, else None."""
        e = 1
        for a, _ in self.slots:
            if not isinstance(a, Cyclic):
                return None
            e = lcm(e, a.order)
        return e

    def has_min(self) -> bool:
        """Minimal condition for a periodic group: finitely many Prufer copies
        and finite total order of cyclic slots."""
        return all(m is not OMEGA for a, m in self.slots if is_torsion_atom(a)) and self.is_periodic

    def sub(self, indices: Iterable[int]) -> "GroupDescriptor":
        return GroupDescriptor(tuple(self.slots[i] for i in indices))

    def copies(self, s: int, limit: int) -> range:
        m = self.mult(s)
        return range(limit if m is OMEGA else min(m, limit))

    # element arithmetic -----------------------------------------------------

    def _norm(self, s: int, v) -> object:
        atom = self.atom(s)
        if isinstance(atom, Cyclic):
            q = Fraction(v)
            if q.denominator % atom.p == 0:
                raise ValueError(f"{v} is not defined in {atom}")
            return q.numerator * mod_inverse(q.denominator, atom.order) % atom.order
        if isinstance(atom, Prufer):
            q = Fraction(v)
            if q.denominator != atom.p ** _plog(q.denominator, atom.p):
                raise ValueError(f"{v} is not a p-power fraction for {atom}")
            return q - (q.numerator // q.denominator)
        q = Fraction(v)
        if not atom.pi.admits(q.denominator):
            raise ValueError(f"{v} is not in {atom}")
        return q

    def element(self, coords: Mapping[Tuple[int, int], object] = ()) -> Element:
        out = []
        items = coords.items() if isinstance(coords, Mapping) else coords
        for (s, c), v in items:
            if not 0 <= s < self.nslots:
                raise ValueError(f"slot {s} out of range")
            m = self.mult(s)
            if c < 0 or (m is not OMEGA and c >= m):
                raise ValueError(f"copy {c} out of range for slot {s}")
            nv = self._norm(s, v)
            if nv != 0:
                out.append(((s, c), nv))
        return Element(out)

    def zero(self) -> Element:
        return Element()

    def basis(self, s: int, c: int) -> Element:
        """Canonical generator of copy ``c`` of slot ``s`` (``1/p`` for Prufer)."""
        atom = self.atom(s)
        if isinstance(atom, Prufer):
            return self.element({(s, c): Fraction(1, atom.p)})
        return self.element({(s, c): 1})

    def add(self, x: Element, y: Element) -> Element:
        d: Dict[Tuple[int, int], object] = dict(x.coords)
        for k, v in y.coords:
            d[k] = d.get(k, 0) + v
        return self.element(d)

    def neg(self, x: Element) -> Element:
        return self.element({k: -v for k, v in x.coords})

    def sub_el(self, x: Element, y: Element) -> Element:
        return self.add(x, self.neg(y))

    def scale_coord(self, s: int, v, q: Fraction):
        """Multiply one coordinate by a rational, where that is well defined."""
        atom = self.atom(s)
        q = Fraction(q)
        if isinstance(atom, Cyclic):
            if q.denominator % atom.p == 0:
                raise ValueError(f"{q} is not defined on {atom}")
            return self._norm(s, v * q.numerator * mod_inverse(q.denominator, atom.order))
        if isinstance(atom, Prufer):
            if q.denominator % atom.p == 0:
                raise ValueError(f"{q} is not defined on {atom}")
            v = Fraction(v)
            mod = v.denominator
            return self._norm(s, Fraction(v.numerator * q.numerator * mod_inverse(q.denominator, mod) % mod, mod))
        if not atom.pi.admits(q.denominator):
            raise ValueError(f"{q} is not defined on {atom}")
        return Fraction(v) * q

    def scale(self, x: Element, q) -> Element:
        return self.element({(s, c): self.scale_coord(s, v, q) for (s, c), v in x.coords})

    def combine(self, terms: Iterable[Tuple[object, Element]]) -> Element:
        d: Dict[Tuple[int, int], object] = {}
        for q, x in terms:
            for (s, c), v in x.coords:
                d[(s, c)] = d.get((s, c), 0) + self.scale_coord(s, v, q)
        return self.element(d)

    def order_of(self, x: Element) -> Optional[int]:
        """Order of an element, or None when it has infinite order."""
        n = 1
        for (s, _), v in x.coords:
            atom = self.atom(s)
            if isinstance(atom, Cyclic):
                n = lcm(n, atom.order // gcd(v, atom.order))
            elif isinstance(atom, Prufer):
                n = lcm(n, Fraction(v).denominator)
            else:
                return None
        return n

    def contains(self, x: Element) -> bool:
        try:
            return self.element(x.coords) == x
        except ValueError:
            return False

    def divide(self, x: Element, n: int) -> Element:
        """Canonical quotient ``x / n`` used for divisible closures.

        Prufer coordinates ``a/p^i`` divided by ``p^k u`` become
        ``a u^{-1} / p^{i+k}``, so repeated division yields a coherent tower.
        """
        out = {}
        for (s, c), v in x.coords:
            atom = self.atom(s)
            if isinstance(atom, Cyclic):
                if n % atom.p == 0:
                    raise ValueError(f"cannot divide a nonzero {atom} coordinate by {n}")
                out[(s, c)] = v * mod_inverse(n % atom.order, atom.order)
            elif isinstance(atom, Prufer):
                v = Fraction(v)
                k = 0
                u = n
                while u % atom.p == 0:
                    u //= atom.p
                    k += 1
                mod = v.denominator * atom.p**k
                out[(s, c)] = Fraction(v.numerator * mod_inverse(u % mod, mod) % mod, mod)
            else:
                if not atom.pi.admits(n):
                    raise ValueError(f"cannot divide a {atom} coordinate by {n}")
                out[(s, c)] = Fraction(v) / n
        return self.element(out)


def _plog(n: int, p: int) -> int:
    k = 0
    while n % p == 0 and n > 1:
        n //= p
        k += 1
    return k


def _atom_key(a: Atom):
    if isinstance(a, Cyclic):
        return (0, a.p, a.e)
    if isinstance(a, Prufer):
        return (1, a.p, 0)
    return (2, 0 if a.pi.is_all else len(a.pi), tuple(() if a.pi.is_all else a.pi.sorted()))


# ----------------------------------------------------------- canonical parts


def torsion_part(A: GroupDescriptor) -> GroupDescriptor:
    return GroupDescriptor(tuple((a, m) for a, m in A.slots if is_torsion_atom(a)))


def component(A: GroupDescriptor, pi: PrimeSet) -> GroupDescriptor:
    return GroupDescriptor(tuple((a, m) for a, m in A.slots if is_torsion_atom(a) and a.p in pi))


def n_socle(A: GroupDescriptor, n: int) -> GroupDescriptor:
    if n < 1:
        raise ValueError("n must be positive")
    out = []
    for a, m in A.slots:
        if isinstance(a, Localized):
            continue
        k = _plog(n, a.p)
        if isinstance(a, Cyclic):
            k = min(k, a.e)
        if k > 0:
            out.append((Cyclic(a.p, k), m))
    return GroupDescriptor(tuple(out))


def divisible_part(A: GroupDescriptor) -> GroupDescriptor:
    return GroupDescriptor(
        tuple((a, m) for a, m in A.slots if isinstance(a, Prufer) or (isinstance(a, Localized) and a.pi.is_all))
    )


# ------------------------------------------------------------- section sizes


@dataclass(frozen=True)
class Finite:
    n: int

    is_finite = True

    def __str__(self):
        return f"Finite({self.n})"


@dataclass(frozen=True)
class AtLeast:
    threshold: int
    note: str = ""

    is_finite = False

    def __str__(self):
        return f"AtLeast({self.threshold})"


@dataclass(frozen=True)
class CertifiedInfinite:
    growth: str
    witness: Optional[str] = None

    is_finite = False

    def __str__(self):
        return f"CertifiedInfinite({self.growth})"


SectionSize = Union[Finite, AtLeast, CertifiedInfinite]


# ---------------------------------------------------------------- subgroups


@dataclass(frozen=True)
class SubgroupHandle:
    """Subgroup generated by ``generators`` together with, for each pair
    ``(g, pi)`` in ``divisible``, every canonical quotient ``g/N`` by a
    pi-number ``N``."""

    ambient: GroupDescriptor
    generators: Tuple[Element, ...] = ()
    divisible: Tuple[Tuple[Element, PrimeSet], ...] = ()
    label: str = ""

    def __post_init__(self):
        for g in self.generators:
            if not self.ambient.contains(g):
                raise ValueError(f"{g} is not in the ambient group")
        for g, pi in self.divisible:
            if not self.ambient.contains(g):
                raise ValueError(f"{g} is not in the ambient group")
            for (s, _), v in g.coords:
                atom = self.ambient.atom(s)
                if isinstance(atom, Cyclic) and atom.p in pi:
                    raise ValueError("divisible closure through a cyclic coordinate")
                if isinstance(atom, Localized) and not pi.issubset(atom.pi):
                    raise ValueError(f"{atom} is not {pi}-divisible")

    @classmethod
    def of(cls, ambient: GroupDescriptor, *gens: Element, label: str = "") -> "SubgroupHandle":
        return cls(ambient, tuple(gens), (), label)

    def is_finitely_generated(self) -> bool:
        return not self.divisible

    def truncate(self, level: int) -> List[Element]:
        """Finite generating set approximating the handle at a truncation level."""
        gens = list(self.generators)
        for g, pi in self.divisible:
            gens.append(self.ambient.divide(g, _level_divisor(pi, level, _relevant_primes(self.ambient, g))))
        return gens

    def image(self, f) -> "SubgroupHandle":
        """Image under a map ``f`` on elements (f.g. handles only)."""
        if self.divisible:
            raise ValueError("image of a divisible closure is not supported")
        return SubgroupHandle(self.ambient, tuple(f(g) for g in self.generators), (), self.label)

    def join(self, other: "SubgroupHandle") -> "SubgroupHandle":
        _same_ambient(self, other)
        return SubgroupHandle(self.ambient, self.generators + other.generators, self.divisible + other.divisible)


def _relevant_primes(A: GroupDescriptor, g: Element) -> List[int]:
    ps = set()
    for (s, _), v in g.coords:
        atom = A.atom(s)
        if isinstance(atom, Prufer):
            ps.add(atom.p)
        ps.update(prime_factors(Fraction(v).denominator))
    return sorted(ps)


def _level_divisor(pi: PrimeSet, level: int, relevant: Sequence[int]) -> int:
    if pi.is_all:
        ps = set(relevant) | {int(nth_prime(k)) for k in range(1, level + 1)}
    else:
        ps = set(pi.primes)
    n = 1
    for p in ps:
        n *= p**level
    return n


def _same_ambient(X: SubgroupHandle, Y: SubgroupHandle):
    if X.ambient != Y.ambient:
        raise ValueError("subgroups live in different ambient groups")


def _coordinate_embedding(A: GroupDescriptor, elements: Sequence[Element]):
    """Integer coordinates for the subgroup generated by ``elements``.

    Returns ``(keys, scale, moduli)``: the map ``x -> [x_k * scale_k]`` is an
    injective homomorphism of the relevant finite-rank part into ``Z^n``
    modulo ``moduli`` (zero meaning no modulus).
    """
    keys = sorted({k for e in elements for k in e.support})
    scale = {}
    moduli = {}
    for key in keys:
        s = key[0]
        atom = A.atom(s)
        vals = [Fraction(e.get(key)) for e in elements]
        if isinstance(atom, Cyclic):
            scale[key] = 1
            moduli[key] = atom.order
        elif isinstance(atom, Prufer):
            top = max(v.denominator for v in vals)
            scale[key] = top
            moduli[key] = top
        else:
            scale[key] = reduce(lcm, (v.denominator for v in vals), 1)
            moduli[key] = 0
    return keys, scale, moduli


def _rows(elements, keys, scale) -> List[List[int]]:
    rows = []
    for e in elements:
        row = []
        for key in keys:
            v = Fraction(e.get(key)) * scale[key]
            row.append(int(v))
        rows.append(row)
    return rows


def _components(keys, rows) -> List[List[int]]:
    parent = list(range(len(keys)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for row in rows:
        nz = [i for i, x in enumerate(row) if x]
        for i in nz[1:]:
            a, b = find(nz[0]), find(i)
            if a != b:
                parent[a] = b
    groups: Dict[int, List[int]] = {}
    for i in range(len(keys)):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def fg_index(A: GroupDescriptor, sub: Sequence[Element], sup_extra: Sequence[Element]) -> Tuple[int, int]:
    """``(rank_gap, index)`` of ``<sub>`` inside ``<sub, sup_extra>``."""
    elements = list(sub) + list(sup_extra)
    keys, scale, moduli = _coordinate_embedding(A, elements)
    rows_sub = _rows(sub, keys, scale)
    rows_extra = _rows(sup_extra, keys, scale)
    gap, index = 0, 1
    for comp in _components(keys, rows_sub + rows_extra):
        mods = []
        for j in comp:
            if moduli[keys[j]]:
                r = [0] * len(comp)
                r[comp.index(j)] = moduli[keys[j]]
                mods.append(r)
        rs = [[r[j] for j in comp] for r in rows_sub]
        re_ = [[r[j] for j in comp] for r in rows_extra]
        g, i = lattice.relative_index(rs + mods, rs + re_ + mods, len(comp))
        gap += g
        if not g:
            index *= i
    return gap, index


def section_rank(X: SubgroupHandle, Y: SubgroupHandle, level: int = 1) -> int:
    """Torsion-free rank of ``(X+Y)/X`` (exact; truncation does not change ranks)."""
    _same_ambient(X, Y)
    gap, _ = fg_index(X.ambient, X.truncate(level), Y.truncate(level))
    return gap


def section_order(
    X: SubgroupHandle,
    Y: SubgroupHandle,
    K: int = DEFAULT_PRECISION,
    threshold: int = DEFAULT_THRESHOLD,
) -> SectionSize:
    """Order of ``(X+Y)/X``."""
    _same_ambient(X, Y)
    if K < 1:
        raise ValueError("precision must be at least 1")
    A = X.ambient
    if X.is_finitely_generated() and Y.is_finitely_generated():
        gap, index = fg_index(A, X.generators, Y.generators)
        if gap:
            return AtLeast(threshold, f"torsion-free rank {gap}")
        return Finite(index)
    depth = _depth(A, list(X.generators) + list(Y.generators) + [g for g, _ in X.divisible + Y.divisible])
    previous = None
    value = None
    for level in range(1, K + 1):
        gap, value = fg_index(A, X.truncate(depth + level), Y.truncate(depth + level))
        if gap:
            return AtLeast(threshold, f"torsion-free rank {gap}")
        if value == previous:
            return Finite(value)
        if value > threshold and Y.divisible:
            return AtLeast(threshold, "threshold exceeded before stabilizing")
        previous = value
    return AtLeast(max(value, 1), "precision exhausted")


def _depth(A: GroupDescriptor, elements: Sequence[Element]) -> int:
    d = 0
    for e in elements:
        for (s, _), v in e.coords:
            den = Fraction(v).denominator
            for p in prime_factors(den):
                d = max(d, _plog(den, p))
    return d


def is_commensurable(
    X: SubgroupHandle,
    Y: SubgroupHandle,
    K: int = DEFAULT_PRECISION,
    threshold: int = DEFAULT_THRESHOLD,
) -> Tuple[bool, SectionSize, SectionSize]:
    """Returns ``(commensurable, |(X+Y)/X|, |(X+Y)/Y|)``.

    The two sizes equal ``|Y/(X∩Y)|`` and ``|X/(X∩Y)|`` respectively.
    """
    _same_ambient(X, Y)
    a = section_order(X, Y, K, threshold)
    b = section_order(Y, X, K, threshold)
    return (a.is_finite and b.is_finite), a, b
