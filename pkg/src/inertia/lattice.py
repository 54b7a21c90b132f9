"""Exact integer matrix reduction.

Everything here works on lists of Python ints, so entries never overflow.
Two reductions are provided: an echelon form (enough to compare lattices of
equal rank) and the Smith normal form with unimodular transforms (used to put
finitely presented groups into cyclic-decomposition form).
"""

from __future__ import annotations

from math import gcd, prod
from typing import List, Sequence, Tuple

Matrix = List[List[int]]


def _xgcd(a: int, b: int) -> Tuple[int, int, int]:
    """Return (g, s, t) with s*a + t*b == g == gcd(a, b) >= 0."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        return -a, -s0, -t0
    return a, s0, t0


def echelon(rows: Sequence[Sequence[int]], ncols: int) -> List[Tuple[int, List[int]]]:
    """Row-echelon basis of the lattice spanned by ``rows``.

    Returns a list of ``(pivot_column, row)`` with strictly increasing pivot
    columns and positive pivot entries.  The rows form a Z-basis of the
    lattice.
    """
    work = [list(r) for r in rows if any(r)]
    basis: List[Tuple[int, List[int]]] = []
    col = 0
    while work and col < ncols:
        nz = [r for r in work if r[col] != 0]
        if not nz:
            col += 1
            continue
        rest = [r for r in work if r[col] == 0]
        pivot = nz[0]
        for other in nz[1:]:
            a, b = pivot[col], other[col]
            g, s, t = _xgcd(a, b)
            new_pivot = [s * x + t * y for x, y in zip(pivot, other)]
            reduced = [(b // g) * x - (a // g) * y for x, y in zip(pivot, other)]
            pivot = new_pivot
            if any(reduced):
                rest.append(reduced)
        if pivot[col] < 0:
            pivot = [-x for x in pivot]
        basis.append((col, pivot))
        work = [r for r in rest if any(r)]
        col += 1
    return basis


def lattice_rank_and_volume(rows: Sequence[Sequence[int]], ncols: int) -> Tuple[int, int]:
    """Rank of the lattice and the product of its echelon pivots."""
    basis = echelon(rows, ncols)
    return len(basis), prod(r[c] for c, r in basis)


def relative_index(sub_rows, sup_rows, ncols: int) -> Tuple[int, int]:
    """Compare lattices ``L_sub <= L_sup``.

    Returns ``(rank_gap, index)``; ``index`` is meaningful only when the
    rank gap is zero.  Lattices of equal rank share their rational span, so
    the echelon pivot columns coincide and the index is a ratio of pivot
    products.
    """
    r_sub, v_sub = lattice_rank_and_volume(sub_rows, ncols)
    r_sup, v_sup = lattice_rank_and_volume(sup_rows, ncols)
    if r_sup != r_sub:
        return r_sup - r_sub, 0
    if v_sub % v_sup:
        raise ArithmeticError("sub-lattice is not contained in the super-lattice")
    return 0, v_sub // v_sup


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def smith_normal_form(a: Sequence[Sequence[int]], ncols: int | None = None):
    """Smith normal form ``U @ A @ V == D``.

    Args:
      a: integer matrix (list of rows).
      ncols: number of columns; needed when ``a`` has no rows.

    Returns:
      ``(U, D, V)`` with U, V unimodular and D diagonal, nonnegative, with
      each diagonal entry dividing the next.
    """
    m = len(a)
    n = len(a[0]) if m else (ncols or 0)
    d = [list(r) for r in a]
    u = identity(m)
    v = identity(n)

    def swap_rows(i, j):
        d[i], d[j] = d[j], d[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in d:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    t = 0
    while t < min(m, n):
        # pick the smallest nonzero entry in the trailing block as pivot
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if d[i][j] and (best is None or abs(d[i][j]) < abs(d[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        done = False
        while not done:
            done = True
            for i in range(t + 1, m):
                if d[i][t] and d[i][t] % d[t][t] == 0:
                    q = d[i][t] // d[t][t]
                    d[i] = [y - q * x for x, y in zip(d[t], d[i])]
                    u[i] = [y - q * x for x, y in zip(u[t], u[i])]
                elif d[i][t]:
                    g, s, r = _xgcd(d[t][t], d[i][t])
                    at, ai = d[t][t] // g, d[i][t] // g
                    rt, ri = d[t], d[i]
                    d[t] = [s * x + r * y for x, y in zip(rt, ri)]
                    d[i] = [at * y - ai * x for x, y in zip(rt, ri)]
                    ut, ui = u[t], u[i]
                    u[t] = [s * x + r * y for x, y in zip(ut, ui)]
                    u[i] = [at * y - ai * x for x, y in zip(ut, ui)]
            for j in range(t + 1, n):
                if d[t][j] and d[t][j] % d[t][t] == 0:
                    q = d[t][j] // d[t][t]
                    for row in d:
                        row[j] -= q * row[t]
                    for row in v:
                        row[j] -= q * row[t]
                elif d[t][j]:
                    done = False
                    g, s, r = _xgcd(d[t][t], d[t][j])
                    at, aj = d[t][t] // g, d[t][j] // g
                    for row in d:
                        x, y = row[t], row[j]
                        row[t], row[j] = s * x + r * y, at * y - aj * x
                    for row in v:
                        x, y = row[t], row[j]
                        row[t], row[j] = s * x + r * y, at * y - aj * x
            if any(d[i][t] for i in range(t + 1, m)):
                done = False
        if d[t][t] < 0:
            d[t] = [-x for x in d[t]]
            u[t] = [-x for x in u[t]]
        # divisibility: fold any trailing entry not divisible by the pivot
        bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                    if d[i][j] % d[t][t]), None)
        if bad is not None:
            i = bad[0]
            d[t] = [x + y for x, y in zip(d[t], d[i])]
            u[t] = [x + y for x, y in zip(u[t], u[i])]
            continue
        t += 1
    return u, d, v


def diagonal(d: Matrix) -> List[int]:
    return [d[i][i] for i in range(min(len(d), len(d[0]) if d else 0))]


def matmul(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> Matrix:
    cols = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in cols] for row in a]


def content(values: Sequence[int]) -> int:
    g = 0
    for x in values:
        g = gcd(g, x)
    return g
