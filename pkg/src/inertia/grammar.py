"""Text syntax for groups and endomorphisms.

Groups::

    Z(2^3)^2 + Z(3^inf) + Q[2] + Z^w + Q
    fg{2, 0; 0, 0}

Endomorphisms (slots are numbered from 1, copies from 0)::

    mult 2
    block{1: local(2:1); 2: 1/2}
    blocks{slots=1,2: 3/2; slots=3: local(5: 2/3)}
    matrix{1: [[1,1],[0,1]]; 1.0 -> 2.0: 3}
    finitary{1.0 -> 2.0:1/4, 3.1:1}

Terms are joined with ``+``.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from sympy import factorint

from .endo import Endomorphism, SlotAction
from .groups import OMEGA, Cyclic, GroupDescriptor, Localized, PrimeSet, Prufer


class ParseError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{message} at line {line}, column {col}")
        self.line = line
        self.column = col


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self, s: str) -> bool:
        self.skip()
        return self.text.startswith(s, self.pos)

    def eat(self, s: str) -> bool:
        if self.peek(s):
            self.pos += len(s)
            return True
        return False

    def expect(self, s: str):
        if not self.eat(s):
            self.fail(f"expected '{s}'")

    def match(self, pattern: str) -> Optional[str]:
        self.skip()
        m = re.compile(pattern).match(self.text, self.pos)
        if not m:
            return None
        self.pos = m.end()
        return m.group(0)

    def integer(self) -> int:
        tok = self.match(r"[+-]?\d+")
        if tok is None:
            self.fail("expected an integer")
        return int(tok)

    def done(self) -> bool:
        self.skip()
        return self.pos >= len(self.text)

    def fail(self, message: str):
        raise ParseError(message, self.text, self.pos)


# ------------------------------------------------------------------ groups


def parse_group(text: str) -> GroupDescriptor:
    sc = _Scanner(text)
    if sc.eat("fg{"):
        rows = _matrix_rows(sc, "}")
        if not sc.done():
            sc.fail("trailing input")
        ngens = len(rows[0]) if rows else 0
        if any(len(r) != ngens for r in rows):
            sc.fail("ragged relation matrix")
        return GroupDescriptor.from_presentation(rows, ngens)
    if sc.eat("0") and sc.done():
        return GroupDescriptor(())
    sc.pos = 0
    slots = []
    while True:
        start = sc.pos
        try:
            atoms = _atoms(sc)
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(str(exc), text, start) from None
        mult = 1
        if sc.eat("^"):
            if sc.eat("w") or sc.eat("omega"):
                mult = OMEGA
            else:
                mult = sc.integer()
                if mult < 1:
                    sc.fail("multiplicity must be positive")
        slots.extend((atom, mult) for atom in atoms)
        if sc.done():
            break
        sc.expect("+")
    return GroupDescriptor(tuple(slots))


def _atoms(sc: _Scanner):
    if sc.eat("Z("):
        n = sc.integer()
        if not sc.eat("^"):
            # Z(n) splits into its primary parts
            sc.expect(")")
            if n < 2:
                sc.fail("cyclic order must be at least 2")
            return [Cyclic(p, k) for p, k in sorted(factorint(n).items())]
        if sc.eat("inf"):
            sc.expect(")")
            return [Prufer(n)]
        e = sc.integer()
        sc.expect(")")
        return [Cyclic(n, e)]
    if sc.eat("Q["):
        ps = []
        if not sc.peek("]"):
            ps.append(sc.integer())
            while sc.eat(","):
                ps.append(sc.integer())
        sc.expect("]")
        return [Localized(PrimeSet(frozenset(ps)))]
    if sc.eat("Z"):
        return [Localized(PrimeSet())]
    if sc.eat("Q"):
        return [Localized(PrimeSet.all())]
    sc.fail("expected an atom")


def _matrix_rows(sc: _Scanner, close: str) -> List[List[int]]:
    rows: List[List[int]] = []
    row: List[int] = []
    while True:
        if sc.eat(close):
            if row:
                rows.append(row)
            return rows
        if sc.eat(";"):
            rows.append(row)
            row = []
            continue
        if sc.eat(","):
            continue
        row.append(sc.integer())


# ---------------------------------------------------------- endomorphisms


def parse_scalar(text: str) -> Fraction:
    sc = _Scanner(text)
    q = _scalar(sc)
    if not sc.done():
        sc.fail("trailing input")
    return q


def _scalar(sc: _Scanner) -> Fraction:
    if sc.eat("local("):
        p = sc.integer()
        sc.expect(":")
        q = _rational(sc)
        sc.expect(")")
        if q.denominator % p == 0:
            sc.fail(f"local scalar denominator divisible by {p}")
        return q
    return _rational(sc)


def _rational(sc: _Scanner) -> Fraction:
    tok = sc.match(r"[+-]?\d+(\s*/\s*\d+)?")
    if tok is None:
        sc.fail("expected a rational number")
    num, _, den = tok.replace(" ", "").partition("/")
    if den and int(den) == 0:
        sc.fail("zero denominator")
    return Fraction(int(num), int(den) if den else 1)


def _key(sc: _Scanner, A: GroupDescriptor) -> Tuple[int, int]:
    tok = sc.match(r"\d+\.\d+")
    if tok is None:
        sc.fail("expected slot.copy")
    s, c = tok.split(".")
    s = int(s) - 1
    if not 0 <= s < A.nslots:
        sc.fail(f"slot {s + 1} out of range")
    return s, int(c)


def _slot(sc: _Scanner, A: GroupDescriptor) -> int:
    s = sc.integer() - 1
    if not 0 <= s < A.nslots:
        sc.fail(f"slot {s + 1} out of range")
    return s


def parse_endo(text: str, A: GroupDescriptor) -> Endomorphism:
    sc = _Scanner(text)
    total: Optional[Endomorphism] = None
    while True:
        term = _endo_term(sc, A)
        total = term if total is None else total + term
        if sc.done():
            return total
        sc.expect("+")


def _endo_term(sc: _Scanner, A: GroupDescriptor) -> Endomorphism:
    if sc.eat("mult"):
        return Endomorphism.scalar(A, _scalar(sc))
    if sc.eat("id"):
        return Endomorphism.identity(A)
    if sc.eat("zero"):
        return Endomorphism.zero(A)
    if sc.eat("blocks{") or sc.eat("block{"):
        acts: Dict[int, Fraction] = {}
        while not sc.eat("}"):
            sc.eat("slots=")
            slots = [_slot(sc, A)]
            while sc.eat(","):
                slots.append(_slot(sc, A))
            sc.expect(":")
            q = _scalar(sc)
            for s in slots:
                if s in acts:
                    sc.fail(f"slot {s + 1} named twice")
                acts[s] = q
            if not sc.eat(";") and not sc.peek("}"):
                sc.fail("expected ';' or '}'")
        return Endomorphism.build(A, acts)
    if sc.eat("matrix{"):
        acts2: Dict[int, SlotAction] = {}
        cross = []
        while not sc.eat("}"):
            if _looks_like_key(sc):
                src = _key(sc, A)
                sc.expect("->")
                tgt = _key(sc, A)
                sc.expect(":")
                cross.append((src, tgt, _scalar(sc)))
            else:
                s = _slot(sc, A)
                sc.expect(":")
                rows = _bracket_matrix(sc)
                acts2[s] = SlotAction.of(rows)
            if not sc.eat(";") and not sc.peek("}"):
                sc.fail("expected ';' or '}'")
        return Endomorphism.build(A, acts2, cross)
    if sc.eat("finitary{"):
        fin = {}
        while not sc.eat("}"):
            src = _key(sc, A)
            sc.expect("->")
            coords = {}
            while True:
                tgt = _key(sc, A)
                sc.expect(":")
                coords[tgt] = _rational(sc)
                if not sc.eat(","):
                    break
            try:
                fin[src] = A.element(coords)
            except ValueError as exc:
                sc.fail(str(exc))
            if not sc.eat(";") and not sc.peek("}"):
                sc.fail("expected ';' or '}'")
        return Endomorphism.build(A, {}, (), fin)
    sc.fail("expected an endomorphism term")


def _looks_like_key(sc: _Scanner) -> bool:
    sc.skip()
    return re.compile(r"\d+\.\d+\s*->").match(sc.text, sc.pos) is not None


def _bracket_matrix(sc: _Scanner) -> List[List[Fraction]]:
    sc.expect("[")
    rows = []
    while True:
        sc.expect("[")
        row = [_scalar(sc)]
        while sc.eat(","):
            row.append(_scalar(sc))
        sc.expect("]")
        rows.append(row)
        if sc.eat("]"):
            return rows
        sc.expect(",")
