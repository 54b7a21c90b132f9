"""Structured endomorphisms of constructive abelian groups.

An endomorphism is the sum of three parts:

* a slot action per slot: a ``k x k`` rational matrix applied to each chunk
  of ``k`` consecutive copies (``k = 1`` is a scalar block);
* cross entries ``(s, c) -> (t, d)`` with a rational coefficient, linking
  copies of Prufer atoms of the same prime or copies of localized atoms;
* a finitary table sending a basis copy of a cyclic or localized slot to a
  torsion element.

The matrix convention is by columns: the image of copy ``r`` of a chunk is
``sum_i M[i][r] e_i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .groups import (
    OMEGA,
    CertifiedInfinite,
    Cyclic,
    Element,
    Finite,
    GroupDescriptor,
    Localized,
    Prufer,
    SectionSize,
    SubgroupHandle,
    fg_index,
    mod_inverse,
    section_order,
)

Key = Tuple[int, int]


@dataclass(frozen=True)
class SlotAction:
    k: int
    matrix: Tuple[Tuple[Fraction, ...], ...]

    @classmethod
    def scalar(cls, q) -> "SlotAction":
        return cls(1, ((Fraction(q),),))

    @classmethod
    def of(cls, rows: Sequence[Sequence[object]]) -> "SlotAction":
        k = len(rows)
        if any(len(r) != k for r in rows):
            raise ValueError("slot action matrix must be square")
        return cls(k, tuple(tuple(Fraction(x) for x in r) for r in rows))

    def entry(self, i: int, j: int) -> Fraction:
        return self.matrix[i][j]

    def expand(self, k: int) -> "SlotAction":
        if k % self.k:
            raise ValueError("chunk size must be a multiple")
        rows = []
        for i in range(k):
            row = []
            for j in range(k):
                if i // self.k == j // self.k:
                    row.append(self.matrix[i % self.k][j % self.k])
                else:
                    row.append(Fraction(0))
            rows.append(tuple(row))
        return SlotAction(k, tuple(rows))

    def scalar_value(self) -> Optional[Fraction]:
        d = self.matrix[0][0]
        for i in range(self.k):
            for j in range(self.k):
                if self.matrix[i][j] != (d if i == j else 0):
                    return None
        return d

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.matrix for x in r)


def _combine_actions(a: Optional[SlotAction], b: Optional[SlotAction], op) -> Optional[SlotAction]:
    if a is None and b is None:
        return None
    ka = a.k if a else 1
    kb = b.k if b else 1
    k = lcm(ka, kb)
    ea = a.expand(k) if a else SlotAction(k, tuple(tuple(Fraction(0) for _ in range(k)) for _ in range(k)))
    eb = b.expand(k) if b else SlotAction(k, tuple(tuple(Fraction(0) for _ in range(k)) for _ in range(k)))
    return op(ea, eb)


def _madd(a: SlotAction, b: SlotAction) -> SlotAction:
    return SlotAction(a.k, tuple(tuple(x + y for x, y in zip(r, s)) for r, s in zip(a.matrix, b.matrix)))


def _mmul(a: SlotAction, b: SlotAction) -> SlotAction:
    k = a.k
    return SlotAction(
        k,
        tuple(tuple(sum((a.matrix[i][l] * b.matrix[l][j] for l in range(k)), Fraction(0)) for j in range(k)) for i in range(k)),
    )


class IllDefined(ValueError):
    pass


@dataclass(frozen=True)
class Endomorphism:
    ambient: GroupDescriptor
    actions: Tuple[Optional[SlotAction], ...]
    cross: Tuple[Tuple[Key, Key, Fraction], ...] = ()
    finitary: Tuple[Tuple[Key, Element], ...] = ()

    # construction ---------------------------------------------------------

    @classmethod
    def build(
        cls,
        ambient: GroupDescriptor,
        actions: Optional[Mapping[int, object]] = None,
        cross: Iterable[Tuple[Key, Key, object]] = (),
        finitary: Optional[Mapping[Key, Element]] = None,
    ) -> "Endomorphism":
        acts: List[Optional[SlotAction]] = [None] * ambient.nslots
        for s, a in (actions or {}).items():
            if not 0 <= s < ambient.nslots:
                raise ValueError(f"slot {s} out of range")
            if not isinstance(a, SlotAction):
                a = SlotAction.of(a) if isinstance(a, (list, tuple)) else SlotAction.scalar(a)
            acts[s] = a
        cr: Dict[Tuple[Key, Key], Fraction] = {}
        for src, tgt, q in cross:
            cr[(tuple(src), tuple(tgt))] = cr.get((tuple(src), tuple(tgt)), Fraction(0)) + Fraction(q)
        fin: Dict[Key, Element] = {}
        for src, img in (finitary or {}).items():
            src = tuple(src)
            fin[src] = ambient.add(fin[src], img) if src in fin else img
        return cls._normalized(ambient, acts, cr, fin)

    @classmethod
    def _normalized(cls, ambient, acts, cr, fin) -> "Endomorphism":
        out_acts = []
        for s, a in enumerate(acts):
            atom = ambient.atom(s)
            if a is not None and isinstance(atom, Cyclic):
                a = _reduce_cyclic(a, atom)
            if a is not None and a.is_zero():
                a = None
            if a is not None:
                a = _shrink(a)
            out_acts.append(a)
        cross = tuple(sorted((s, t, q) for (s, t), q in cr.items() if q != 0))
        finitary = tuple(sorted((s, e) for s, e in fin.items() if not e.is_zero()))
        return cls(ambient, tuple(out_acts), cross, finitary)

    @classmethod
    def scalar(cls, A: GroupDescriptor, q) -> "Endomorphism":
        return cls.build(A, {s: q for s in range(A.nslots)})

    @classmethod
    def identity(cls, A: GroupDescriptor) -> "Endomorphism":
        return cls.scalar(A, 1)

    @classmethod
    def zero(cls, A: GroupDescriptor) -> "Endomorphism":
        return cls(A, (None,) * A.nslots)

    @classmethod
    def blocks(cls, A: GroupDescriptor, scalars: Mapping[int, object]) -> "Endomorphism":
        return cls.build(A, dict(scalars))

    @classmethod
    def from_generator_matrix(cls, A: GroupDescriptor, matrix: Sequence[Sequence[int]]) -> "Endomorphism":
        """Endomorphism of a finitely presented group given on its generators.

        ``matrix[j][i]`` is the coefficient of generator ``j`` in the image of
        generator ``i``.
        """
        pres = A.presentation
        if pres is None:
            raise ValueError("ambient has no presentation")
        n = pres.ngens
        images = []
        for i in range(n):
            images.append(A.combine((matrix[j][i], A.generator_images[j]) for j in range(n)))
        for row in pres.relations:
            if not A.combine((r, im) for r, im in zip(row, images)).is_zero():
                raise IllDefined("generator images do not respect the relations")
        basis = _presentation_basis(A)
        return cls.from_images(A, {key: A.combine((x, im) for x, im in zip(coefs, images)) for key, coefs in basis.items()})

    @classmethod
    def from_images(cls, A: GroupDescriptor, images: Mapping[Key, Element]) -> "Endomorphism":
        """Endomorphism given by the images of all basis copies.

        Only for ambients with finitely many copies and no Prufer atoms.
        """
        cr: List[Tuple[Key, Key, Fraction]] = []
        fin: Dict[Key, Element] = {}
        for s, (atom, m) in enumerate(A.slots):
            if isinstance(atom, Prufer) or m is OMEGA:
                raise ValueError("images of basis copies do not determine this endomorphism")
            for c in range(m):
                img = images.get((s, c), A.zero())
                tors = {}
                for key, v in img.coords:
                    if isinstance(A.atom(key[0]), Localized):
                        cr.append(((s, c), key, Fraction(v)))
                    else:
                        tors[key] = v
                if isinstance(atom, Localized):
                    if tors:
                        fin[(s, c)] = A.element(tors)
                elif img.coords:
                    fin[(s, c)] = img
        return cls.build(A, {}, cr, fin)

    # structure --------------------------------------------------------------

    def action(self, s: int) -> Optional[SlotAction]:
        return self.actions[s]

    def finitary_map(self) -> Dict[Key, Element]:
        return dict(self.finitary)

    def has_finitary(self) -> bool:
        return bool(self.finitary)

    def action_column(self, key: Key) -> Dict[Key, Fraction]:
        s, c = key
        a = self.actions[s]
        out: Dict[Key, Fraction] = {}
        if a is not None:
            j, r = divmod(c, a.k)
            for i in range(a.k):
                q = a.matrix[i][r]
                if q:
                    out[(s, j * a.k + i)] = q
        return out

    def linear_column(self, key: Key) -> Dict[Key, Fraction]:
        """Coefficients of the action plus cross entries from one copy."""
        out = self.action_column(key)
        for src, tgt, q in self.cross:
            if src == key:
                out[tgt] = out.get(tgt, Fraction(0)) + q
        return {k: v for k, v in out.items() if v != 0}

    # well-definedness -------------------------------------------------------

    def check(self) -> Tuple[bool, str]:
        A = self.ambient
        for s, a in enumerate(self.actions):
            if a is None:
                continue
            atom, m = A.slots[s]
            if m is not OMEGA and m % a.k:
                return False, f"slot {s + 1}: chunk size {a.k} does not divide multiplicity {m}"
            for row in a.matrix:
                for q in row:
                    ok, why = _scalar_ok(atom, q)
                    if not ok:
                        return False, f"slot {s + 1} ({atom}): {why}"
        for src, tgt, q in self.cross:
            for key in (src, tgt):
                if not _key_ok(A, key):
                    return False, f"cross entry copy {key} out of range"
            sa, ta = A.atom(src[0]), A.atom(tgt[0])
            if isinstance(sa, Prufer) and isinstance(ta, Prufer):
                if sa.p != ta.p:
                    return False, f"cross entry {src}->{tgt}: Prufer primes differ"
                if q.denominator % sa.p == 0:
                    return False, f"cross entry {src}->{tgt}: {q} is not {sa.p}-integral"
            elif isinstance(sa, Localized) and isinstance(ta, Localized):
                if not sa.pi.issubset(ta.pi):
                    return False, f"cross entry {src}->{tgt}: {sa} does not map nontrivially into {ta}"
                if not ta.pi.admits(q.denominator):
                    return False, f"cross entry {src}->{tgt}: {q} not defined on {ta}"
            else:
                return False, f"cross entry {src}->{tgt}: unsupported atom pair {sa} -> {ta}"
        for src, img in self.finitary:
            if not _key_ok(A, src):
                return False, f"finitary source {src} out of range"
            atom = A.atom(src[0])
            order = A.order_of(img)
            if order is None:
                return False, f"finitary image of {src} is not torsion"
            if isinstance(atom, Prufer):
                return False, f"finitary image of a Prufer copy {src} must vanish"
            if isinstance(atom, Cyclic) and atom.order % order:
                return False, f"finitary image of {src} has order {order} not dividing {atom.order}"
            if isinstance(atom, Localized) and any(p in atom.pi for p in _primes_of(order)):
                return False, f"finitary image of {src} has order {order} not coprime to {atom.pi}"
        return True, ""

    def is_well_defined(self) -> bool:
        return self.check()[0]

    def require(self) -> "Endomorphism":
        ok, why = self.check()
        if not ok:
            raise IllDefined(why)
        return self

    # evaluation -------------------------------------------------------------

    def apply_linear(self, x: Element) -> Element:
        A = self.ambient
        out: Dict[Key, object] = {}
        cross_from: Dict[Key, List[Tuple[Key, Fraction]]] = {}
        for src, tgt, q in self.cross:
            cross_from.setdefault(src, []).append((tgt, q))
        for key, v in x.coords:
            s = key[0]
            for tgt, q in self.action_column(key).items():
                out[tgt] = out.get(tgt, 0) + A.scale_coord(s, v, q)
            for tgt, q in cross_from.get(key, ()):
                out[tgt] = out.get(tgt, 0) + A.scale_coord(tgt[0], v, q)
        return A.element(out)

    def apply_finitary(self, x: Element) -> Element:
        A = self.ambient
        fin = dict(self.finitary)
        terms = []
        for key, v in x.coords:
            if key in fin:
                terms.append((v, fin[key]))
        return A.combine(terms)

    def __call__(self, x: Element) -> Element:
        return self.apply(x)

    def apply(self, x: Element) -> Element:
        self.require()
        if not self.ambient.contains(x):
            raise ValueError("element is not in the ambient group")
        return self.ambient.add(self.apply_linear(x), self.apply_finitary(x))

    # ring operations ----------------------------------------------------------

    def _same(self, other: "Endomorphism"):
        if self.ambient != other.ambient:
            raise ValueError("endomorphisms of different groups")

    def __add__(self, other: "Endomorphism") -> "Endomorphism":
        return add(self, other)

    def __neg__(self) -> "Endomorphism":
        return scale(self, -1)

    def __sub__(self, other: "Endomorphism") -> "Endomorphism":
        return add(self, -other)

    def __matmul__(self, other: "Endomorphism") -> "Endomorphism":
        return compose(self, other)

    def structurally_equal(self, other: "Endomorphism") -> bool:
        return is_zero(self - other)


def _primes_of(n: int) -> List[int]:
    from .groups import prime_factors

    return prime_factors(n)


def _key_ok(A: GroupDescriptor, key: Key) -> bool:
    s, c = key
    if not 0 <= s < A.nslots:
        return False
    m = A.mult(s)
    return c >= 0 and (m is OMEGA or c < m)


def _scalar_ok(atom, q: Fraction) -> Tuple[bool, str]:
    if isinstance(atom, (Cyclic, Prufer)):
        if q.denominator % atom.p == 0:
            return False, f"{q} is not defined ({atom.p} divides the denominator)"
        return True, ""
    if not atom.pi.admits(q.denominator):
        return False, f"{q} is not defined (slot is not {q.denominator}-divisible)"
    return True, ""


def _reduce_cyclic(a: SlotAction, atom: Cyclic) -> SlotAction:
    n = atom.order
    rows = []
    for r in a.matrix:
        row = []
        for q in r:
            if q.denominator % atom.p == 0:
                return a
            row.append(Fraction(q.numerator * mod_inverse(q.denominator, n) % n))
        rows.append(tuple(row))
    return SlotAction(a.k, tuple(rows))


def _shrink(a: SlotAction) -> SlotAction:
    """Smallest chunk size describing the same periodic action."""
    for d in range(1, a.k):
        if a.k % d:
            continue
        base = SlotAction(d, tuple(tuple(a.matrix[i][j] for j in range(d)) for i in range(d)))
        if base.expand(a.k) == a:
            return base
    return a


def _presentation_basis(A: GroupDescriptor) -> Dict[Key, List[Fraction]]:
    """Generator coefficients of each normalized basis copy."""
    # solve for combinations of generator images equal to each basis copy
    keys = [(s, c) for s, (atom, m) in enumerate(A.slots) for c in range(m)]
    out: Dict[Key, List[Fraction]] = {}
    # integrality is handled by the cyclic moduli
    vecs = []
    for g in A.generator_images:
        vecs.append([g.get(k) for k in keys])
    mods = []
    for idx, (s, c) in enumerate(keys):
        atom = A.atom(s)
        if isinstance(atom, Cyclic):
            r = [0] * len(keys)
            r[idx] = atom.order
            mods.append(r)
    for idx, key in enumerate(keys):
        target = [0] * len(keys)
        target[idx] = 1
        x = _solve_integer(vecs, mods, target)
        out[key] = x
    return out


def _solve_integer(vecs: List[List[int]], mods: List[List[int]], target: List[int]) -> List[int]:
    """Integer x with sum x_i vecs_i = target modulo the rows of ``mods``."""
    from . import lattice

    rows = [list(map(int, v)) for v in vecs] + mods
    m = len(rows)
    n = len(target)
    # augment with identity to track combinations
    aug = [rows[i] + [int(i == j) for j in range(m)] for i in range(m)]
    basis = lattice.echelon(aug, n)
    # reduce target against the echelon basis
    t = list(target) + [0] * m
    for col, row in basis:
        if t[col] % row[col]:
            raise ValueError("basis copy is not in the span of the generators")
        f = t[col] // row[col]
        t = [a - f * b for a, b in zip(t, row)]
    if any(t[:n]):
        raise ValueError("basis copy is not in the span of the generators")
    coefs = [-x for x in t[n:]]
    return coefs[: len(vecs)]


# ------------------------------------------------------------ ring operations


def add(phi: Endomorphism, psi: Endomorphism) -> Endomorphism:
    phi._same(psi)
    A = phi.ambient
    acts = [_combine_actions(a, b, _madd) for a, b in zip(phi.actions, psi.actions)]
    cr: Dict[Tuple[Key, Key], Fraction] = {}
    for src, tgt, q in phi.cross + psi.cross:
        cr[(src, tgt)] = cr.get((src, tgt), Fraction(0)) + q
    fin: Dict[Key, Element] = dict(phi.finitary)
    for src, img in psi.finitary:
        fin[src] = A.add(fin[src], img) if src in fin else img
    return Endomorphism._normalized(A, acts, cr, fin)


def scale(phi: Endomorphism, q) -> Endomorphism:
    """Multiply every part by an integer (or an admissible rational)."""
    q = Fraction(q)
    A = phi.ambient
    acts = []
    for a in phi.actions:
        if a is None:
            acts.append(None)
        else:
            acts.append(SlotAction(a.k, tuple(tuple(x * q for x in r) for r in a.matrix)))
    cr = {(s, t): x * q for s, t, x in phi.cross}
    fin = {s: A.scale(e, q) for s, e in phi.finitary}
    return Endomorphism._normalized(A, acts, cr, fin)


def compose(phi: Endomorphism, psi: Endomorphism) -> Endomorphism:
    """``phi o psi`` (apply ``psi`` first)."""
    phi._same(psi)
    A = phi.ambient
    acts = [_combine_actions(a, b, _mmul) for a, b in zip(phi.actions, psi.actions)]
    cr: Dict[Tuple[Key, Key], Fraction] = {}

    def add_cross(src, tgt, q):
        if q:
            cr[(src, tgt)] = cr.get((src, tgt), Fraction(0)) + q

    # phi_action o psi_cross
    for src, mid, q in psi.cross:
        for tgt, r in phi.action_column(mid).items():
            add_cross(src, tgt, r * q)
    # phi_cross o psi_action and phi_cross o psi_cross
    psi_cross_into: Dict[Key, List[Tuple[Key, Fraction]]] = {}
    for src, mid, q in psi.cross:
        psi_cross_into.setdefault(mid, []).append((src, q))
    for mid, tgt, q in phi.cross:
        for src, r in _action_row(psi, mid).items():
            add_cross(src, tgt, q * r)
        for src, r in psi_cross_into.get(mid, ()):
            add_cross(src, tgt, q * r)
    linear = Endomorphism._normalized(A, acts, cr, {})
    # finitary remainder lives on finitely many basis copies
    sources = set(k for k, _ in psi.finitary)
    for mid, _ in phi.finitary:
        sources.update(_action_row(psi, mid))
        sources.update(s for s, _ in psi_cross_into.get(mid, ()))
    fin: Dict[Key, Element] = {}
    for key in sources:
        if isinstance(A.atom(key[0]), Prufer):
            continue
        e = A.basis(*key)
        rem = A.sub_el(phi.apply_linear(psi.apply_linear(e)), linear.apply_linear(e))
        rem = A.add(rem, phi.apply_finitary(psi.apply_linear(e)))
        rem = A.add(rem, A.add(phi.apply_linear(psi.apply_finitary(e)), phi.apply_finitary(psi.apply_finitary(e))))
        if not rem.is_zero():
            fin[key] = rem
    return Endomorphism._normalized(A, list(linear.actions), {(s, t): q for s, t, q in linear.cross}, fin)


def _action_row(phi: Endomorphism, key: Key) -> Dict[Key, Fraction]:
    """Copies whose action column hits ``key``, with the coefficients."""
    s, c = key
    a = phi.actions[s]
    out = {}
    if a is None:
        return out
    j, i = divmod(c, a.k)
    for r in range(a.k):
        q = a.matrix[i][r]
        if q:
            out[(s, j * a.k + r)] = q
    return out


def inverse(phi: Endomorphism, max_terms: int = 64) -> Endomorphism:
    """Structural inverse.

    With ``D`` the slot actions and ``M = (phi - D) D^-1``, the inverse is
    ``D^-1 (1 - M + M^2 - ...)``; this needs ``M`` nilpotent, which holds
    for triangular cross terms and finitary maps out of torsion-free copies.
    """
    d_inv = _slot_inverse(phi)
    if not phi.cross and not phi.finitary:
        return d_inv
    A = phi.ambient
    diag = Endomorphism(A, phi.actions)
    m = compose(phi - diag, d_inv)
    total = Endomorphism.identity(A)
    term = Endomorphism.identity(A)
    for i in range(1, max_terms + 1):
        term = compose(term, m)
        if is_zero(term):
            break
        total = total - term if i % 2 else total + term
    else:
        raise ValueError("off-diagonal part is not nilpotent")
    out = compose(d_inv, total).require()
    ident = Endomorphism.identity(A)
    if not (compose(phi, out).structurally_equal(ident) and compose(out, phi).structurally_equal(ident)):
        raise ValueError("endomorphism is not invertible")
    return out


def _slot_inverse(phi: Endomorphism) -> Endomorphism:
    A = phi.ambient
    acts = {}
    for s, (atom, _) in enumerate(A.slots):
        a = phi.actions[s]
        if a is None:
            raise ValueError(f"slot {s + 1} is not invertible")
        inv = _matrix_inverse(a, atom)
        if inv is None:
            raise ValueError(f"slot {s + 1} is not invertible")
        acts[s] = inv
    return Endomorphism.build(A, acts).require()


def _matrix_inverse(a: SlotAction, atom) -> Optional[SlotAction]:
    from sympy import Matrix, Rational

    m = Matrix([[Rational(x.numerator, x.denominator) for x in r] for r in a.matrix])
    det = m.det()
    if det == 0:
        return None
    det = Fraction(int(det.p), int(det.q))
    if isinstance(atom, Cyclic):
        if det.numerator % atom.p == 0:
            return None
        n = atom.order
        mi = m.inv_mod(n) if a.k > 1 else Matrix([[mod_inverse(int(det.numerator * mod_inverse(det.denominator, n)) % n, n)]])
        return SlotAction.of([[Fraction(int(x)) for x in mi.row(i)] for i in range(a.k)])
    if isinstance(atom, Prufer):
        if det.numerator % atom.p == 0:
            return None
    else:
        if not atom.pi.admits(det.numerator):
            return None
    mi = m.inv()
    return SlotAction.of([[Fraction(int(x.p), int(x.q)) for x in mi.row(i)] for i in range(a.k)])


def is_zero(phi: Endomorphism) -> bool:
    return all(a is None for a in phi.actions) and not phi.cross and not phi.finitary


# ------------------------------------------------------------ finite images


def essential_columns(phi: Endomorphism) -> Dict[Key, Dict[Key, Fraction]]:
    """Linear columns of every copy that can carry an infinite image.

    Checks each slot's first chunk, one chunk beyond every cross support, and
    every copy touched by a cross entry.
    """
    A = phi.ambient
    keys = set()
    touched = set()
    for src, tgt, _ in phi.cross:
        touched.add(src)
        touched.add(tgt)
    for s, (atom, m) in enumerate(A.slots):
        if isinstance(atom, Cyclic) and m is not OMEGA:
            continue
        a = phi.actions[s]
        k = a.k if a else 1
        used = [c for (t, c) in touched if t == s]
        beyond = (max(used) // k + 1) * k if used else 0
        for c in range(k):
            for base in (0, beyond):
                if _key_ok(A, (s, base + c)):
                    keys.add((s, base + c))
        for c in used:
            keys.add((s, c))
    return {key: phi.linear_column(key) for key in sorted(keys)}


def image_generators(phi: Endomorphism) -> List[Element]:
    """Generators of the image, assuming the essential part vanishes."""
    A = phi.ambient
    gens = []
    for s, (atom, m) in enumerate(A.slots):
        if isinstance(atom, Cyclic) and m is not OMEGA:
            for c in range(m):
                gens.append(phi.apply(A.basis(s, c)))
    for key, img in phi.finitary:
        atom, m = A.slots[key[0]]
        if isinstance(atom, Cyclic) and m is not OMEGA:
            continue
        gens.append(phi.apply(A.basis(*key)))
    return [g for g in gens if not g.is_zero()]


def image_finite(phi: Endomorphism) -> SectionSize:
    phi.require()
    A = phi.ambient
    for key, col in essential_columns(phi).items():
        atom, m = A.slots[key[0]]
        nonzero = any(_coef_nonzero(A, tgt, q) for tgt, q in col.items())
        if nonzero:
            return CertifiedInfinite(f"nonzero linear part on copy {key[0] + 1}.{key[1]} of {atom}")
    gens = image_generators(phi)
    _, order = fg_index(A, [], gens)
    return Finite(order)


def _coef_nonzero(A: GroupDescriptor, tgt: Key, q: Fraction) -> bool:
    atom = A.atom(tgt[0])
    if isinstance(atom, Cyclic):
        return Fraction(q).numerator * mod_inverse(Fraction(q).denominator, atom.order) % atom.order != 0
    return q != 0


def equal_mod_finitary(phi: Endomorphism, psi: Endomorphism) -> Tuple[bool, SectionSize]:
    phi._same(psi)
    size = image_finite(phi - psi)
    return size.is_finite, size


# ----------------------------------------------------- restriction, quotient


def _single_copy(A: GroupDescriptor, g: Element) -> Key:
    if len(g.coords) != 1:
        raise ValueError("only handles generated by single-copy elements are supported")
    return g.coords[0][0]


def restrict(phi: Endomorphism, A0: SubgroupHandle) -> Endomorphism:
    """Restriction to a subgroup generated by single-copy elements.

    Each generator (or divisible closure) becomes one slot of the derived
    ambient.
    """
    from .groups import Cyclic as _C, PrimeSet

    A = phi.ambient
    if A0.ambient != A:
        raise ValueError("subgroup of a different group")
    parts = [(g, None) for g in A0.generators] + [(g, pi) for g, pi in A0.divisible]
    keys = [_single_copy(A, g) for g, _ in parts]
    if len(set(keys)) != len(keys):
        raise ValueError("generators must sit on distinct copies")
    slots = []
    for (g, pi), key in zip(parts, keys):
        atom = A.atom(key[0])
        if isinstance(atom, Localized):
            slots.append((Localized(pi if pi is not None else PrimeSet()), 1))
        elif pi is not None:
            slots.append((Prufer(atom.p), 1))
        else:
            order = A.order_of(g)
            e = 0
            while order > 1:
                order //= atom.p
                e += 1
            slots.append((_C(atom.p, e), 1))
    B = GroupDescriptor(tuple(slots))
    # invariance and coordinates of phi(g) in terms of the generators
    acts: Dict[int, Fraction] = {}
    cross: List[Tuple[Key, Key, Fraction]] = []
    fin: Dict[Key, Element] = {}
    for j, ((g, pi), key) in enumerate(zip(parts, keys)):
        img = phi.apply(g)
        coords = {}
        for k2, w in img.coords:
            if k2 not in keys:
                raise ValueError("subgroup is not invariant")
            i = keys.index(k2)
            coords[i] = _ratio(A, k2, w, parts[i][0].coords[0][1])
        for i, q in coords.items():
            src_atom, tgt_atom = B.atom(j), B.atom(i)
            if i == j:
                acts[j] = q
            elif isinstance(src_atom, Localized) and isinstance(tgt_atom, Localized):
                cross.append(((j, 0), (i, 0), q))
            elif isinstance(src_atom, Prufer) and isinstance(tgt_atom, Prufer):
                cross.append(((j, 0), (i, 0), q))
            else:
                fin[(j, 0)] = B.add(fin.get((j, 0), B.zero()), B.scale(B.basis(i, 0), q))
    out = Endomorphism.build(B, acts, cross, fin)
    # spot-check invariance on the generators through the ambient
    X = SubgroupHandle(A, A0.generators, A0.divisible)
    for g, _ in parts:
        Y = SubgroupHandle.of(A, phi.apply(g))
        if section_order(X, Y) != Finite(1):
            raise ValueError("subgroup is not invariant")
    return out.require()


def _ratio(A: GroupDescriptor, key: Key, w, v) -> Fraction:
    atom = A.atom(key[0])
    if isinstance(atom, Localized):
        return Fraction(w) / Fraction(v)
    if isinstance(atom, Cyclic):
        n = atom.order
        g = gcd(int(v), n)
        if int(w) % g:
            raise ValueError("subgroup is not invariant")
        return Fraction((int(w) // g) * mod_inverse((int(v) // g) % (n // g), n // g) % (n // g))
    w, v = Fraction(w), Fraction(v)
    n = max(w.denominator, v.denominator)
    wi, vi = int(w * n), int(v * n)
    g = gcd(vi, n)
    if wi % g:
        raise ValueError("subgroup is not invariant")
    return Fraction((wi // g) * mod_inverse((vi // g) % (n // g), n // g) % (n // g))


def induced_on_quotient(phi: Endomorphism, V: SubgroupHandle) -> Endomorphism:
    """Induced endomorphism on ``A/V`` for scalar slot actions and a ``V``
    generated by single-copy elements on finite-multiplicity slots."""
    A = phi.ambient
    if V.ambient != A:
        raise ValueError("subgroup of a different group")
    if phi.cross:
        raise ValueError("cross entries are not supported here")
    parts = {}
    for g in V.generators:
        parts[_single_copy(A, g)] = (g.coords[0][1], None)
    for g, pi in V.divisible:
        parts[_single_copy(A, g)] = (g.coords[0][1], pi)
    fin_src = {k for k, _ in phi.finitary}
    for key, (v, pi) in parts.items():
        a = phi.actions[key[0]]
        q = a.scalar_value() if a else Fraction(0)
        if q is None:
            raise ValueError("slot action must be scalar on copies meeting V")
        if key in fin_src:
            raise ValueError("finitary entries on copies meeting V are not supported")
        if A.mult(key[0]) is OMEGA:
            raise ValueError("V must live on finite-multiplicity slots")
        # invariance: q*V <= V
        g = A.element({key: v})
        img = A.scale(g, q)
        if section_order(V, SubgroupHandle.of(A, img)) != Finite(1):
            raise ValueError("V is not invariant")
    slots = []
    scalars: Dict[int, Fraction] = {}
    place: Dict[Key, Key] = {}
    for s, (atom, m) in enumerate(A.slots):
        free = [c for c in range(m if m is not OMEGA else 0) if (s, c) not in parts]
        keep = m if m is OMEGA else len(free)
        if keep:
            slots.append((atom, keep))
            ns = len(slots) - 1
            if phi.actions[s] is not None:
                scalars[ns] = phi.actions[s]
            for i, c in enumerate(free if m is not OMEGA else []):
                place[(s, c)] = (ns, i)
        for c in range(m if m is not OMEGA else 0):
            if (s, c) not in parts:
                continue
            v, pi = parts[(s, c)]
            a = phi.actions[s]
            q = a.scalar_value() if a else Fraction(0)
            for qa in _quotient_atoms(atom, v, pi):
                slots.append((qa, 1))
                if q:
                    scalars[len(slots) - 1] = q
    B = GroupDescriptor(tuple(slots))
    fin = {}
    for key, img in phi.finitary:
        if any(k2 in parts for k2 in img.support):
            raise ValueError("finitary images meeting V are not supported")
        if key in place:
            coords = {}
            for k2, w in img.coords:
                if k2 in place:
                    coords[place[k2]] = w
            fin[place[key]] = B.element(coords)
    out = Endomorphism.build(B, {s: a for s, a in scalars.items()}, (), fin)
    return out.require()


def _quotient_atoms(atom, v, pi):
    from .groups import Cyclic as _C, PrimeSet, vp, prime_factors

    if isinstance(atom, Cyclic):
        if pi is not None:
            return []
        k = min(vp(int(v), atom.p), atom.e) if int(v) % atom.order else atom.e
        return [_C(atom.p, k)] if k else []
    if isinstance(atom, Prufer):
        return [] if pi is not None else [atom]
    pi = pi if pi is not None else PrimeSet()
    x = Fraction(v)
    out = []
    if atom.pi.is_all and not pi.is_all:
        raise ValueError("quotient of Q by a localization has infinitely many components")
    extra = [] if atom.pi.is_all else [p for p in atom.pi.sorted() if p not in pi]
    for p in extra:
        out.append(Prufer(p))
    for p in prime_factors(x.numerator):
        if p not in atom.pi:
            out.append(_C(p, vp(x, p)))
    return sorted(out, key=lambda a: (isinstance(a, Prufer), a.p))
