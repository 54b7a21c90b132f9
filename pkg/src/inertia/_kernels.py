"""Numba kernels for exhaustive work on finite abelian groups.

Elements are integer codes in mixed radix (coordinate ``i`` has modulus
``mods[i]`` and stride ``strides[i]``).  Subgroups are carried as an element
list plus a bitmask of ``W = ceil(|G|/64)`` words.
"""

from __future__ import annotations

import numpy as np
from numba import njit

ONE = np.uint64(1)


@njit(cache=True)
def _has(mask, x):
    return (mask[x >> 6] >> np.uint64(x & 63)) & ONE


@njit(cache=True)
def _set(mask, x):
    mask[x >> 6] |= ONE << np.uint64(x & 63)


@njit(cache=True)
def add_table(mods, strides, order):
    n = mods.shape[0]
    out = np.empty((order, order), dtype=np.int32)
    for x in range(order):
        for y in range(order):
            z = 0
            for i in range(n):
                a = (x // strides[i]) % mods[i]
                b = (y // strides[i]) % mods[i]
                z += ((a + b) % mods[i]) * strides[i]
            out[x, y] = z
    return out


@njit(cache=True)
def image_table(mods, strides, order, columns):
    """``columns[j]`` is the code of the image of the j-th unit vector."""
    n = mods.shape[0]
    out = np.empty(order, dtype=np.int32)
    for x in range(order):
        coords = np.zeros(n, dtype=np.int64)
        for j in range(n):
            c = (x // strides[j]) % mods[j]
            if c == 0:
                continue
            col = columns[j]
            for i in range(n):
                coords[i] += c * ((col // strides[i]) % mods[i])
        z = 0
        for i in range(n):
            z += (coords[i] % mods[i]) * strides[i]
        out[x] = z
    return out


@njit(cache=True)
def _join(addt, out, cur, outmask, h):
    """Add the cyclic subgroup of ``h`` to the subgroup held in ``out``."""
    base = cur
    k = h
    while not _has(outmask, k):
        for r in range(base):
            z = addt[out[r], k]
            out[cur] = z
            cur += 1
            _set(outmask, z)
        k = addt[k, h]
    return cur


@njit(cache=True)
def _close_up(addt, elems, size, mask, gens, ngens, maps, nmaps, out, outmask, W):
    """Smallest subgroup containing ``elems`` and ``gens`` invariant under
    ``maps``, where ``elems`` lists a subgroup.

    Result written to ``out``/``outmask``; returns its size."""
    for w in range(W):
        outmask[w] = mask[w]
    for r in range(size):
        out[r] = elems[r]
    cur = size
    gl = np.empty(128, dtype=np.int32)
    ng = 0
    for q in range(ngens):
        cur = _join(addt, out, cur, outmask, gens[q])
        gl[ng] = gens[q]
        ng += 1
    q = 0
    while q < ng:
        g = gl[q]
        q += 1
        for t in range(nmaps):
            h = maps[t, g]
            if _has(outmask, h):
                continue
            cur = _join(addt, out, cur, outmask, h)
            if ng < 128:
                gl[ng] = h
                ng += 1
    return cur


@njit(cache=True)
def _close_down(elems, size, mask, maps, nmaps, out, outmask, W):
    """Largest subgroup inside ``elems`` invariant under ``maps``."""
    for w in range(W):
        outmask[w] = mask[w]
    for r in range(size):
        out[r] = elems[r]
    cur = size
    tmp = np.empty(size, dtype=np.int32)
    while True:
        nxt = 0
        for r in range(cur):
            y = out[r]
            ok = True
            for t in range(nmaps):
                if not _has(outmask, maps[t, y]):
                    ok = False
                    break
            if ok:
                tmp[nxt] = y
                nxt += 1
        if nxt == cur:
            return cur
        for w in range(W):
            outmask[w] = np.uint64(0)
        for r in range(nxt):
            out[r] = tmp[r]
            _set(outmask, tmp[r])
        cur = nxt


@njit(cache=True)
def _hash(mask, W):
    h = np.uint64(1469598103934665603)
    for w in range(W):
        h = (h ^ mask[w]) * np.uint64(1099511628211)
    return h


@njit(cache=True)
def build_lattice(addt, order, maps, nmaps, W, cap):
    """All subgroups invariant under ``maps``, as sums of cyclic submodules.

    Returns ``(count, masks, gens, ngens, sizes)`` sorted by size, or a count
    of -1 when more than ``cap`` exist."""
    zero_el = np.zeros(1, dtype=np.int32)
    zero_mask = np.zeros(W, dtype=np.uint64)
    _set(zero_mask, 0)
    buf = np.empty(order, dtype=np.int32)
    bufmask = np.empty(W, dtype=np.uint64)
    one = np.empty(1, dtype=np.int32)
    # distinct cyclic submodules
    cyc_masks = np.empty((order, W), dtype=np.uint64)
    cyc_hash = np.empty(order, dtype=np.uint64)
    cyc_gen = np.empty(order, dtype=np.int32)
    ncyc = 0
    for x in range(1, order):
        one[0] = x
        _close_up(addt, zero_el, 1, zero_mask, one, 1, maps, nmaps, buf, bufmask, W)
        h = _hash(bufmask, W)
        dup = False
        for c in range(ncyc):
            if cyc_hash[c] == h:
                same = True
                for w in range(W):
                    if cyc_masks[c, w] != bufmask[w]:
                        same = False
                        break
                if same:
                    dup = True
                    break
        if not dup:
            for w in range(W):
                cyc_masks[ncyc, w] = bufmask[w]
            cyc_hash[ncyc] = h
            cyc_gen[ncyc] = x
            ncyc += 1
    masks = np.zeros((cap, W), dtype=np.uint64)
    elems = np.zeros((cap, order), dtype=np.int32)
    sizes = np.zeros(cap, dtype=np.int64)
    hashes = np.zeros(cap, dtype=np.uint64)
    gens = np.zeros((cap, 32), dtype=np.int32)
    ngens = np.zeros(cap, dtype=np.int32)
    for w in range(W):
        masks[0, w] = zero_mask[w]
    elems[0, 0] = 0
    sizes[0] = 1
    hashes[0] = _hash(zero_mask, W)
    cnt = 1
    idx = 0
    while idx < cnt:
        for c in range(ncyc):
            g = cyc_gen[c]
            if _has(masks[idx], g):
                continue
            one[0] = g
            sz = _close_up(addt, elems[idx], sizes[idx], masks[idx], one, 1, maps, nmaps, buf, bufmask, W)
            h = _hash(bufmask, W)
            dup = False
            for j in range(cnt):
                if hashes[j] == h and sizes[j] == sz:
                    same = True
                    for w in range(W):
                        if masks[j, w] != bufmask[w]:
                            same = False
                            break
                    if same:
                        dup = True
                        break
            if dup:
                continue
            if cnt == cap:
                return -1, masks, gens, ngens, sizes
            for w in range(W):
                masks[cnt, w] = bufmask[w]
            for r in range(sz):
                elems[cnt, r] = buf[r]
            sizes[cnt] = sz
            hashes[cnt] = h
            ng = ngens[idx]
            for r in range(ng):
                gens[cnt, r] = gens[idx, r]
            gens[cnt, ng] = g
            ngens[cnt] = ng + 1
            cnt += 1
        idx += 1
    order_idx = np.argsort(sizes[:cnt], kind="mergesort")
    return cnt, masks[order_idx], gens[order_idx], ngens[order_idx], sizes[order_idx]


@njit(cache=True)
def _process(
    addt, order, W, elems, size, mask, xgens, nxg,
    maps, nmaps, Lcnt, Lmasks, Lgens, Lng, Lsizes,
    worst_down, worst_up, worst_fs, mismatches, check, buf, bufmask,
):
    F = maps.shape[0]
    for f in range(F):
        nm = nmaps[f]
        inv = True
        for q in range(nxg):
            for t in range(nm):
                if not _has(mask, maps[f, t, xgens[q]]):
                    inv = False
                    break
            if not inv:
                break
        if inv:
            down = size
            up = size
        elif Lcnt[f] >= 0:
            up = -1
            for j in range(Lcnt[f]):
                if Lsizes[f, j] < size:
                    continue
                ok = True
                for q in range(nxg):
                    if not _has(Lmasks[f, j], xgens[q]):
                        ok = False
                        break
                if ok:
                    up = Lsizes[f, j]
                    break
            down = -1
            for j in range(Lcnt[f] - 1, -1, -1):
                if Lsizes[f, j] > size:
                    continue
                ok = True
                for w in range(W):
                    if Lmasks[f, j, w] & ~mask[w]:
                        ok = False
                        break
                if ok:
                    down = Lsizes[f, j]
                    break
        else:
            up = _close_up(addt, elems, size, mask, xgens, nxg, maps[f], nm, buf, bufmask, W)
            down = _close_down(elems, size, mask, maps[f], nm, buf, bufmask, W)
        if check and not inv:
            u2 = _close_up(addt, elems, size, mask, xgens, nxg, maps[f], nm, buf, bufmask, W)
            # X inside X^Phi
            for r in range(size):
                if not _has(bufmask, elems[r]):
                    mismatches[f] += 1
                    break
            # X^Phi invariant
            for r in range(u2):
                y = buf[r]
                for t in range(nm):
                    if not _has(bufmask, maps[f, t, y]):
                        mismatches[f] += 1
                        break
            d2 = _close_down(elems, size, mask, maps[f], nm, buf, bufmask, W)
            # X_Phi inside X and invariant
            for r in range(d2):
                y = buf[r]
                if not _has(mask, y):
                    mismatches[f] += 1
                for t in range(nm):
                    if not _has(bufmask, maps[f, t, y]):
                        mismatches[f] += 1
                        break
            if u2 != up or d2 != down:
                mismatches[f] += 1
        r_down = size // down
        r_up = up // size
        r_fs = up // down
        if r_down > worst_down[f]:
            worst_down[f] = r_down
        if r_up > worst_up[f]:
            worst_up[f] = r_up
        if r_fs > worst_fs[f]:
            worst_fs[f] = r_fs


@njit(cache=True)
def enumerate_kernel(
    mods, strides, primes, exps, order, addt, maps, nmaps, Lcnt, Lmasks, Lgens, Lng, Lsizes, check, collect, collect_cap
):
    """Visit every subgroup once through echelon generator rows.

    Row ``i`` has pivot ``d_i | mods[i]`` in coordinate ``i`` and a tail on the
    later coordinates reduced modulo the later pivots.  The row set is valid
    when ``(mods[i]/d_i) * row_i`` lies in the span of the later rows.
    """
    n = mods.shape[0]
    W = (order + 63) // 64
    F = maps.shape[0]
    worst_down = np.ones(F, dtype=np.int64)
    worst_up = np.ones(F, dtype=np.int64)
    worst_fs = np.ones(F, dtype=np.int64)
    mismatches = np.zeros(F, dtype=np.int64)
    buf = np.empty(order, dtype=np.int32)
    bufmask = np.empty(W, dtype=np.uint64)
    # stack of subgroups: level n is the trivial subgroup
    st_el = np.zeros((n + 1, order), dtype=np.int32)
    st_mask = np.zeros((n + 1, W), dtype=np.uint64)
    st_size = np.zeros(n + 1, dtype=np.int64)
    st_el[n, 0] = 0
    _set(st_mask[n], 0)
    st_size[n] = 1
    piv_idx = np.zeros(n, dtype=np.int64)
    pivot = np.ones(n, dtype=np.int64)
    tail = np.zeros((n, n), dtype=np.int64)
    gen = np.full(n, -1, dtype=np.int32)
    xgens = np.empty(n, dtype=np.int32)
    coll = np.full((collect_cap, n), -1, dtype=np.int32)
    count = 0
    if n == 0:
        _process(addt, order, W, st_el[0], 1, st_mask[0], xgens, 0, maps, nmaps, Lcnt, Lmasks, Lgens, Lng,
                 Lsizes, worst_down, worst_up, worst_fs, mismatches, check, buf, bufmask)
        return 1, worst_down, worst_up, worst_fs, mismatches, coll
    i = n - 1
    piv_idx[i] = 0
    for j in range(n):
        tail[i, j] = 0
    while True:
        d = primes[i] ** piv_idx[i]
        valid = True
        if d == mods[i]:
            for j in range(i + 1, n):
                if tail[i, j] != 0:
                    valid = False
            g = -1
        else:
            g = d * strides[i]
            for j in range(i + 1, n):
                g += tail[i, j] * strides[j]
            # (mods[i]/d) * g must lie in the parent subgroup
            k = mods[i] // d
            z = 0
            for _ in range(k):
                z = addt[z, g]
            valid = _has(st_mask[i + 1], z) == ONE
        if valid:
            psize = st_size[i + 1]
            for r in range(psize):
                st_el[i, r] = st_el[i + 1, r]
            for w in range(W):
                st_mask[i, w] = st_mask[i + 1, w]
            cur = psize
            if g >= 0:
                kg = g
                while not _has(st_mask[i], kg):
                    for r in range(psize):
                        z = addt[st_el[i + 1, r], kg]
                        st_el[i, cur] = z
                        cur += 1
                        _set(st_mask[i], z)
                    kg = addt[kg, g]
            st_size[i] = cur
            pivot[i] = d
            gen[i] = g
            if i == 0:
                nxg = 0
                for j in range(n):
                    if gen[j] >= 0:
                        xgens[nxg] = gen[j]
                        nxg += 1
                if collect and count < collect_cap:
                    for q in range(nxg):
                        coll[count, q] = xgens[q]
                count += 1
                _process(addt, order, W, st_el[0], cur, st_mask[0], xgens, nxg, maps, nmaps, Lcnt, Lmasks,
                         Lgens, Lng, Lsizes, worst_down, worst_up, worst_fs, mismatches, check, buf, bufmask)
            else:
                i -= 1
                piv_idx[i] = 0
                for j in range(n):
                    tail[i, j] = 0
                continue
        # advance the choice at level i, popping exhausted levels
        while True:
            advanced = False
            if piv_idx[i] < exps[i]:
                for j in range(n - 1, i, -1):
                    tail[i, j] += 1
                    if tail[i, j] < pivot[j]:
                        advanced = True
                        break
                    tail[i, j] = 0
            if not advanced:
                piv_idx[i] += 1
                if piv_idx[i] <= exps[i]:
                    advanced = True
            if advanced:
                break
            i += 1
            if i == n:
                return count, worst_down, worst_up, worst_fs, mismatches, coll
