"""Non-inertiality witnesses.

A witness is an indexed family ``X_i`` of finitely generated subgroups,
written as generator templates in the index ``i``, together with a claimed
growth of the section ``|(X_i + phi X_i)/X_i|`` (mode RIN) or
``|X_i/(X_i ∩ phi X_i)|`` (mode LIN).

Constructors derive the growth in closed form (or by brute force on a finite
block); :func:`verify_witness` recomputes every section through
``section_order`` on integer lattices.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import product as iproduct
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple

from .endo import Endomorphism, essential_columns
from .groups import (
    OMEGA,
    Cyclic,
    Element,
    Finite,
    GroupDescriptor,
    Localized,
    PrimeSet,
    Prufer,
    SubgroupHandle,
    prime_factors,
    section_order,
    section_rank,
    vp,
)

Key = Tuple[int, int]
DEFAULT_K = 20


class WitnessRefused(ValueError):
    """The parameters describe an inertial situation; there is no witness."""


@dataclass(frozen=True)
class CoordTemplate:
    """Coordinate ``num / base^(e0 + ei*i + ek*k)`` at slot ``s0 + ds*k``,
    copy ``c0 + dc*k``."""

    slot: Tuple[int, int]
    copy: Tuple[int, int]
    num: int
    base: int = 1
    exp: Tuple[int, int, int] = (0, 0, 0)

    def at(self, i: int, k: int) -> Tuple[Key, Fraction]:
        s = self.slot[0] + self.slot[1] * k
        c = self.copy[0] + self.copy[1] * k
        e = self.exp[0] + self.exp[1] * i + self.exp[2] * k
        return (s, c), Fraction(self.num) / Fraction(self.base) ** e


@dataclass(frozen=True)
class GenTemplate:
    coords: Tuple[CoordTemplate, ...]
    repeat: bool = False
    min_index: int = 1

    def elements(self, A: GroupDescriptor, i: int) -> List[Element]:
        out = []
        if i < self.min_index:
            return out
        for k in range(i) if self.repeat else (0,):
            d: Dict[Key, Fraction] = {}
            for ct in self.coords:
                key, v = ct.at(i, k)
                d[key] = d.get(key, 0) + v
            out.append(A.element(d))
        return out


@dataclass(frozen=True)
class Growth:
    """``power``: coeff * base^max(0, slope*i + offset);
    ``product``: prod(factors[:i]); ``rank``: torsion-free rank at least ``rank``."""

    kind: str
    coeff: Fraction = Fraction(1)
    base: int = 1
    slope: int = 0
    offset: int = 0
    factors: Tuple[int, ...] = ()
    rank: int = 0

    def value(self, i: int):
        if self.kind == "power":
            v = self.coeff * self.base ** max(0, self.slope * i + self.offset)
            return int(v) if v.denominator == 1 else v
        if self.kind == "product":
            out = 1
            for f in self.factors[:i]:
                out *= f
            return out
        if self.kind == "rank":
            return self.rank
        raise ValueError(f"unknown growth kind {self.kind}")

    def describe(self) -> str:
        if self.kind == "power":
            c = "" if self.coeff == 1 else f"{self.coeff}*"
            off = f"{self.offset:+d}" if self.offset else ""
            return f"{c}{self.base}^max(0,{self.slope}i{off})"
        if self.kind == "product":
            return "prod(" + ",".join(map(str, self.factors)) + ")[:i]"
        return f"rank>={self.rank}"


@dataclass(frozen=True)
class NonInertialWitness:
    kind: str
    mode: str
    endo: Endomorphism
    generators: Tuple[GenTemplate, ...]
    growth: Growth
    exact: bool = True
    verified_to: int = 0
    max_index: Optional[int] = None
    note: str = ""

    @property
    def ambient(self) -> GroupDescriptor:
        return self.endo.ambient

    def member(self, i: int) -> SubgroupHandle:
        gens: List[Element] = []
        for t in self.generators:
            gens.extend(t.elements(self.ambient, i))
        return SubgroupHandle(self.ambient, tuple(gens), (), f"X_{i}")


@dataclass(frozen=True)
class VerifyResult:
    ok: bool
    first_bad: Optional[int] = None
    detail: str = ""

    def __bool__(self):
        return self.ok


def verify_witness(w: NonInertialWitness, phi: Optional[Endomorphism] = None, K: int = DEFAULT_K) -> VerifyResult:
    """Recompute the section order at every index ``1..K``."""
    phi = phi if phi is not None else w.endo
    if phi.ambient != w.ambient:
        return VerifyResult(False, None, "ambient mismatch")
    top = K if w.max_index is None else min(K, w.max_index)
    for i in range(1, top + 1):
        X = w.member(i)
        Y = X.image(phi.apply)
        if w.growth.kind == "rank":
            r = section_rank(X, Y) if w.mode == "RIN" else section_rank(Y, X)
            if r < w.growth.rank:
                return VerifyResult(False, i, f"rank {r} < {w.growth.rank}")
            continue
        size = section_order(X, Y) if w.mode == "RIN" else section_order(Y, X)
        claim = w.growth.value(i)
        if isinstance(size, Finite):
            if w.exact and size.n != claim:
                return VerifyResult(False, i, f"section {size.n} != claimed {claim}")
            if size.n < claim:
                return VerifyResult(False, i, f"section {size.n} < claimed {claim}")
        elif w.exact:
            return VerifyResult(False, i, f"section {size} is not the exact claim {claim}")
    return VerifyResult(True)


def _self_verify(w: NonInertialWitness, K: int) -> NonInertialWitness:
    if K <= 0:
        return w
    res = verify_witness(w, K=K)
    if not res:
        raise AssertionError(f"witness {w.kind} failed its own verification at i={res.first_bad}: {res.detail}")
    top = K if w.max_index is None else min(K, w.max_index)
    return replace(w, verified_to=top)


# ------------------------------------------------------------------ helpers


def _column(phi: Endomorphism, key: Key) -> Dict[Key, Fraction]:
    return phi.linear_column(key)


def _finitary_order(phi: Endomorphism, key: Key) -> int:
    img = dict(phi.finitary).get(key)
    if img is None:
        return 1
    return phi.ambient.order_of(img)


def _touched(phi: Endomorphism) -> Dict[int, int]:
    """Largest copy index touched by cross or finitary entries, per slot."""
    out: Dict[int, int] = {}
    keys = [k for s, t, _ in phi.cross for k in (s, t)] + [k for k, _ in phi.finitary]
    for _, img in phi.finitary:
        keys.extend(img.support)
    for s, c in keys:
        out[s] = max(out.get(s, -1), c)
    return out


def clean_start(phi: Endomorphism, s: int) -> int:
    """First copy index of slot ``s`` past every cross or finitary support,
    aligned to the slot's chunk size."""
    a = phi.actions[s]
    k = a.k if a else 1
    last = _touched(phi).get(s, -1)
    return (last // k + 1) * k if last >= 0 else 0


# ---------------------------------------------------------------- diagonal


def diagonal_witness_for(
    phi: Endomorphism, prufer_key: Key, local_key: Key, K: int = DEFAULT_K
) -> NonInertialWitness:
    """Family ``H_i = < (p^-i on the Prufer copy, o * p^-i on the localized copy) >``.

    With ``phi = alpha`` on the Prufer copy and ``m/n`` on the localized copy,
    ``|(H_i + phi H_i)/H_i| = |n| p^max(0, i - v)`` where ``v = v_p(n alpha - m)``.
    """
    A = phi.ambient
    patom, latom = A.atom(prufer_key[0]), A.atom(local_key[0])
    if not isinstance(patom, Prufer) or not isinstance(latom, Localized):
        raise ValueError("diagonal witness pairs a Prufer copy with a localized copy")
    p = patom.p
    if p not in latom.pi:
        raise ValueError(f"localized slot is not {p}-divisible")
    pcol, lcol = _column(phi, prufer_key), _column(phi, local_key)
    alpha = pcol.get(prufer_key, Fraction(0))
    lam = lcol.get(local_key, Fraction(0))
    if set(pcol) - {prufer_key} or set(lcol) - {local_key}:
        raise ValueError("diagonal witness needs scalar columns on both copies")
    m, n = lam.numerator, lam.denominator
    gap = n * alpha - m
    if gap == 0:
        raise WitnessRefused("m - n*alpha vanishes: the pair is inertial")
    if n == 1 and m == 0 and alpha == 0:
        raise WitnessRefused("zero map")
    v = vp(gap, p)
    o = _finitary_order(phi, local_key)
    tmpl = GenTemplate(
        (
            CoordTemplate((prufer_key[0], 0), (prufer_key[1], 0), 1, p, (0, 1, 0)),
            CoordTemplate((local_key[0], 0), (local_key[1], 0), o, p, (0, 1, 0)),
        )
    )
    w = NonInertialWitness(
        "diagonal",
        "RIN",
        phi,
        (tmpl,),
        Growth("power", Fraction(abs(n)), p, 1, -v),
        note=f"p={p} alpha={alpha} m/n={lam}",
    )
    return _self_verify(w, K)


def diagonal_witness(p: int, alpha, mn, K: int = DEFAULT_K) -> NonInertialWitness:
    """Diagonal family on ``Z(p^inf) + Q^pi`` with ``phi = alpha + m/n``;
    ``pi`` is ``{p}`` together with the primes of ``n``."""
    alpha, mn = Fraction(alpha), Fraction(mn)
    if mn.denominator * alpha - mn.numerator == 0:
        raise WitnessRefused("alpha equals m/n: the pair is inertial")
    pi = PrimeSet(frozenset([p] + prime_factors(mn.denominator)))
    A = GroupDescriptor(((Prufer(p), 1), (Localized(pi), 1)))
    phi = Endomorphism.build(A, {0: alpha, 1: mn}).require()
    return diagonal_witness_for(phi, (0, 0), (1, 0), K)


def prufer_matrix_witness_for(phi: Endomorphism, p: int, K: int = DEFAULT_K) -> NonInertialWitness:
    """Non-scalar action on the Prufer copies of a prime: ``X_i = <p^-i w>``."""
    A = phi.ambient
    cols = {
        key: {t: q for t, q in col.items() if isinstance(A.atom(t[0]), Prufer)}
        for key, col in essential_columns(phi).items()
        if isinstance(A.atom(key[0]), Prufer) and A.atom(key[0]).p == p
    }
    for key, col in cols.items():
        off = {t: q for t, q in col.items() if t != key and q != 0}
        if off:
            v = min(vp(q, p) for q in off.values())
            tmpl = GenTemplate((CoordTemplate((key[0], 0), (key[1], 0), 1, p, (0, 1, 0)),))
            w = NonInertialWitness("prufer_matrix", "RIN", phi, (tmpl,), Growth("power", Fraction(1), p, 1, -v))
            return _self_verify(w, K)
    diag = [(key, col.get(key, Fraction(0))) for key, col in cols.items()]
    for (k1, a1), (k2, a2) in iproduct(diag, diag):
        if a1 != a2:
            v = vp(a2 - a1, p)
            tmpl = GenTemplate(
                (
                    CoordTemplate((k1[0], 0), (k1[1], 0), 1, p, (0, 1, 0)),
                    CoordTemplate((k2[0], 0), (k2[1], 0), 1, p, (0, 1, 0)),
                )
            )
            w = NonInertialWitness("prufer_matrix", "RIN", phi, (tmpl,), Growth("power", Fraction(1), p, 1, -v))
            return _self_verify(w, K)
    raise WitnessRefused(f"the {p}-Prufer part carries a single multiplication")


# --------------------------------------------------------------- free rank


def free_rank_witness_for(phi: Endomorphism, slot: int, K: int = DEFAULT_K) -> NonInertialWitness:
    A = phi.ambient
    atom, mult = A.slots[slot]
    if not isinstance(atom, Localized) or mult is not OMEGA:
        raise ValueError("free-rank witness needs a localized slot of infinite multiplicity")
    a = phi.actions[slot]
    lam = a.scalar_value() if a else Fraction(0)
    if lam is None:
        raise ValueError("slot action is not scalar")
    if lam.denominator == 1:
        raise WitnessRefused("integer multiplication")
    c0 = clean_start(phi, slot)
    tmpl = GenTemplate((CoordTemplate((slot, 0), (c0, 1), 1),), repeat=True)
    w = NonInertialWitness(
        "free_rank", "RIN", phi, (tmpl,), Growth("power", Fraction(1), lam.denominator, 1, 0), note=f"scalar {lam}"
    )
    return _self_verify(w, K)


def free_rank_witness(mn, A: Optional[GroupDescriptor] = None, K: int = DEFAULT_K) -> NonInertialWitness:
    mn = Fraction(mn)
    if mn.denominator == 1:
        raise WitnessRefused("integer multiplication")
    if A is None:
        A = GroupDescriptor(((Localized(PrimeSet.of_number(mn.denominator)), OMEGA),))
    slot = next((s for s, (a, m) in enumerate(A.slots) if isinstance(a, Localized) and m is OMEGA), None)
    if slot is None:
        raise ValueError("no localized slot of infinite multiplicity")
    phi = Endomorphism.scalar(A, mn).require()
    return free_rank_witness_for(phi, slot, K)


# ------------------------------------------------------------ independence


def _localized_part(A: GroupDescriptor, col: Dict[Key, Fraction]) -> Dict[Key, Fraction]:
    return {t: q for t, q in col.items() if isinstance(A.atom(t[0]), Localized) and q != 0}


def find_independent(phi: Endomorphism) -> Optional[Dict[Key, int]]:
    """A combination ``a`` of localized copies with ``phi(a)`` not a rational
    multiple of ``a`` modulo torsion, or None when phi is scalar there."""
    A = phi.ambient
    cols = {
        key: _localized_part(A, col)
        for key, col in essential_columns(phi).items()
        if isinstance(A.atom(key[0]), Localized)
    }
    diag = []
    for key, col in cols.items():
        if set(col) - {key}:
            return {key: 1}
        diag.append((key, col.get(key, Fraction(0))))
    for (k1, a1), (k2, a2) in iproduct(diag, diag):
        if a1 != a2:
            return {k1: 1, k2: 1}
    return None


def independence_witness(phi: Endomorphism, K: int = DEFAULT_K) -> NonInertialWitness:
    combo = find_independent(phi)
    if combo is None:
        raise WitnessRefused("no independent generator: phi is a multiplication modulo torsion")
    # rank of <a, phi a> over <a> modulo torsion, by direct linear algebra
    A = phi.ambient
    a = A.element(combo)
    image = phi.apply_linear(a)
    va = {k: Fraction(v) for k, v in a.coords if isinstance(A.atom(k[0]), Localized)}
    vb = {k: Fraction(v) for k, v in image.coords if isinstance(A.atom(k[0]), Localized)}
    keys = sorted(set(va) | set(vb))
    ratio = None
    dependent = True
    for k in keys:
        x, y = va.get(k, 0), vb.get(k, 0)
        if x == 0 and y != 0:
            dependent = False
            break
        if x != 0:
            r = Fraction(y) / x
            if ratio is None:
                ratio = r
            elif r != ratio:
                dependent = False
                break
    if dependent:
        raise WitnessRefused("candidate generator is an eigenvector")
    tmpl = GenTemplate(tuple(CoordTemplate((s, 0), (c, 0), v) for (s, c), v in sorted(combo.items())))
    w = NonInertialWitness("independence", "RIN", phi, (tmpl,), Growth("rank", rank=1), exact=False, max_index=1)
    return _self_verify(w, min(K, 1))


# --------------------------------------------------- copywise (finite blocks)


def _block_model(phi: Endomorphism, layout: Sequence[Tuple[Key, int]]):
    """Finite model of a phi-stable block: each entry ``(key, modulus)`` is a
    cyclic coordinate (copy of ``Z(p^e)``) or the ``p^-e`` layer of a Prufer
    copy.  Returns the images of the unit vectors as integer tuples."""
    A = phi.ambient
    units = []
    for key, mod in layout:
        atom = A.atom(key[0])
        val = Fraction(1, mod) if isinstance(atom, Prufer) else 1
        units.append(A.element({key: val}))
    images = []
    for u in units:
        img = phi.apply(u)
        vec = []
        for key, mod in layout:
            v = img.get(key)
            atom = A.atom(key[0])
            vec.append(int(Fraction(v) * mod) % mod if isinstance(atom, Prufer) else int(v) % mod)
        stray = set(img.support) - {k for k, _ in layout}
        if stray:
            raise ValueError("block is not stable under phi")
        images.append(tuple(vec))
    return images


def _span(gens: Sequence[Tuple[int, ...]], mods: Sequence[int]) -> set:
    zero = tuple(0 for _ in mods)
    seen = {zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = tuple((a + b) % m for a, b, m in zip(x, g, mods))
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return seen


def _apply_block(images, x, mods):
    out = [0] * len(mods)
    for coef, img in zip(x, images):
        if coef:
            for j, v in enumerate(img):
                out[j] = (out[j] + coef * v) % mods[j]
    return tuple(out)


def block_sections(phi: Endomorphism, layout: Sequence[Tuple[Key, int]], x: Sequence[int]) -> Tuple[int, int]:
    """``(|<x, phi x>/<x>|, |<x>/(<x> ∩ <phi x>)|)`` on a finite block."""
    mods = [m for _, m in layout]
    images = _block_model(phi, layout)
    x = tuple(v % m for v, m in zip(x, mods))
    fx = _apply_block(images, x, mods)
    X = _span([x], mods)
    FX = _span([fx], mods)
    XF = _span([x, fx], mods)
    return len(XF) // len(X), len(X) // len(X & FX)


def copywise_witness_for(
    phi: Endomorphism,
    coords: Sequence[Tuple[int, int, int, Fraction]],
    layout_mods: Sequence[int],
    mode: str = "RIN",
    K: int = DEFAULT_K,
) -> NonInertialWitness:
    """Family ``X_i = <x_0, ..., x_{i-1}>`` of shifted copies of one block element.

    ``coords`` lists ``(slot, first copy, copy step, value)``; block ``k`` uses
    copy ``first + step*k`` of each slot.  The growth is ``s^i`` with ``s`` the
    section of one block, found by enumerating the block.
    """
    layout = []
    x = []
    for (s, c0, _, v), mod in zip(coords, layout_mods):
        layout.append(((s, c0), mod))
        atom = phi.ambient.atom(s)
        x.append(int(Fraction(v) * mod) if isinstance(atom, Prufer) else int(v))
    s_rin, s_lin = block_sections(phi, layout, x)
    s = s_rin if mode == "RIN" else s_lin
    if s <= 1:
        raise WitnessRefused("block element is invariant")
    tmpl_coords = []
    for s_, c0, step, v in coords:
        v = Fraction(v)
        tmpl_coords.append(_value_template(s_, c0, step, v))
    tmpl = GenTemplate(tuple(tmpl_coords), repeat=True)
    w = NonInertialWitness("copywise", mode, phi, (tmpl,), Growth("power", Fraction(1), s, 1, 0))
    return _self_verify(w, K)


def _value_template(s: int, c0: int, step: int, v: Fraction) -> CoordTemplate:
    if v.denominator == 1:
        return CoordTemplate((s, 0), (c0, step), v.numerator)
    ps = prime_factors(v.denominator)
    if len(ps) != 1:
        raise ValueError("block values must have prime-power denominators")
    p = ps[0]
    e = vp(v.denominator, p)
    return CoordTemplate((s, 0), (c0, step), v.numerator, p, (e, 0, 0))


# --------------------------------------------------- mixed pairing (rank ω)


def pairing_witness_for(
    phi: Endomorphism,
    local_slot: int,
    m: int,
    torsion: Tuple[str, Key, int],
    K: int = DEFAULT_K,
) -> NonInertialWitness:
    """``X_i = <e_k + t_k : k < i>`` with ``e_k`` free copies on which phi is
    exactly ``m``, and torsion partners ``t_k`` on which ``phi - m`` grows.

    ``torsion`` is ``("prufer", key, 0)`` (``t_k = p^-(k+1)`` on one copy) or
    ``("cyclic", first_key, chunk)`` (one basis copy per chunk).
    """
    A = phi.ambient
    c0 = clean_start(phi, local_slot)
    kind, key, chunk = torsion
    e_t = CoordTemplate((local_slot, 0), (c0, 1), 1)
    if kind == "prufer":
        p = A.atom(key[0]).p
        col = dict(_column(phi, key))
        col[key] = col.get(key, Fraction(0)) - m
        col = {t: q for t, q in col.items() if q != 0}
        if not col:
            raise WitnessRefused("phi equals m on this Prufer copy")
        v = min(vp(q, p) for q in col.values())
        t_t = CoordTemplate((key[0], 0), (key[1], 0), 1, p, (1, 0, 1))
        growth = Growth("power", Fraction(1), p, 1, -v)
    else:
        atom = A.atom(key[0])
        col = dict(_column(phi, key))
        col[key] = col.get(key, Fraction(0)) - m
        n = atom.order
        vals = [int(q.numerator * pow(q.denominator, -1, n)) % n for q in col.values()]
        vals = [x for x in vals if x]
        if not vals:
            raise WitnessRefused("phi equals m on this cyclic copy")
        order = max(n // gcd(x, n) for x in vals)
        t_t = CoordTemplate((key[0], 0), (key[1], chunk), 1)
        growth = Growth("power", Fraction(1), order, 1, 0)
    tmpl = GenTemplate((e_t, t_t), repeat=True)
    w = NonInertialWitness("pairing", "RIN", phi, (tmpl,), growth, note=f"m={m}")
    return _self_verify(w, K)


# ------------------------------------------------------------- primary LIN


def primary_lin_witness(phi: Endomorphism, K: int = DEFAULT_K) -> NonInertialWitness:
    """LIN failure on a periodic group across infinitely many components.

    Uses an infinite-multiplicity cyclic slot whose chunk action is not an
    invertible multiplication, or else the finite cyclic slots at distinct
    primes on which phi is not an invertible multiplication (a truncated
    family of components).
    """
    A = phi.ambient
    if not A.is_periodic:
        raise ValueError("primary LIN witness needs a periodic group")
    for s, (atom, m) in enumerate(A.slots):
        if not isinstance(atom, Cyclic) or m is not OMEGA:
            continue
        a = phi.actions[s]
        k = a.k if a else 1
        c0 = clean_start(phi, s)
        for cand in _chunk_candidates(k):
            layout = [((s, c0 + r), atom.order) for r in range(k)]
            x = [0] * k
            for r, v in cand:
                x[r] = v
            _, s_lin = block_sections(phi, layout, x)
            if s_lin > 1:
                full = [(s, c0 + r, k, x[r]) for r in range(k)]
                return copywise_witness_for(phi, full, [atom.order] * k, "LIN", K)
    bad = []
    for s, (atom, m) in enumerate(A.slots):
        if not isinstance(atom, Cyclic) or m is OMEGA:
            continue
        for c in range(m):
            _, s_lin = block_sections(phi, [((s, c), atom.order)], [1]) if _slot_closed(phi, s, c) else (1, 1)
            if s_lin > 1:
                bad.append((s, c, atom.p, s_lin))
                break
    primes = [p for _, _, p, _ in bad]
    if len(bad) < 2 or len(set(primes)) != len(primes):
        raise WitnessRefused("fewer than two bad primary components")
    gens = tuple(
        GenTemplate((CoordTemplate((s, 0), (c, 0), 1),), min_index=j + 1) for j, (s, c, _, _) in enumerate(bad)
    )
    w = NonInertialWitness(
        "primary_lin",
        "LIN",
        phi,
        (),
        Growth("product", factors=tuple(f for *_, f in bad)),
        max_index=len(bad),
    )
    return _self_verify(replace(w, generators=gens), K)


def _slot_closed(phi: Endomorphism, s: int, c: int) -> bool:
    img = phi.apply(phi.ambient.basis(s, c))
    return set(img.support) <= {(s, c)}


def _chunk_candidates(k: int):
    for r in range(k):
        yield [(r, 1)]
    for r in range(k):
        for l in range(r + 1, k):
            yield [(r, 1), (l, 1)]
