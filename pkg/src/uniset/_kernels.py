"""Bit-packed set kernels, each in two flavors: numba-jitted and pure numpy.

Id-sets over a universe of m partitions are packed little-endian into
ceil(m/64) uint64 words (bit j of word w is id 64*w + j).  The environment
variable UNISET_BACKEND ("numba" or "numpy") selects the implementation;
the default is numba when it imports, numpy otherwise.  Both flavors are
exact and produce identical words, so everything downstream is
backend-independent — see benchmarks/bench_kernels.py for the speed gap.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


U64 = np.uint64
_ONE = U64(1)
_ZERO = U64(0)


def active_backend() -> str:
    choice = os.environ.get("UNISET_BACKEND", "").strip().lower()
    if choice in ("numba", "numpy"):
        if choice == "numba" and not HAS_NUMBA:
            raise RuntimeError("UNISET_BACKEND=numba but numba is not importable")
        return choice
    return "numba" if HAS_NUMBA else "numpy"


def _pick(backend: str | None) -> str:
    return backend if backend in ("numba", "numpy") else active_backend()


def words_needed(m: int) -> int:
    return (m + 63) >> 6


def full_row(m: int) -> np.ndarray:
    """All m ids set, high bits of the last word clear."""
    w = words_needed(m)
    row = np.full(w, ~np.uint64(0), dtype=U64)
    tail = m & 63
    if tail:
        row[w - 1] = (_ONE << U64(tail)) - _ONE
    return row


def int_to_words(x: int, w: int) -> np.ndarray:
    return np.frombuffer(x.to_bytes(w * 8, "little"), dtype=U64).copy()

def words_to_int(arr) -> int:
    return int.from_bytes(np.ascontiguousarray(arr, dtype=U64).tobytes(), "little")


def popcount_rows(rows) -> np.ndarray:
    return np.bitwise_count(rows).sum(axis=-1, dtype=np.int64)


# ---------------------------------------------------------------------------
# relation rows: ball(i) = ids sharing >= t blocks with item i


@njit(cache=True, nogil=True)
def _nb_ball_words(blocks, t, w):
    m, k = blocks.shape
    out = np.zeros((m, w), dtype=np.uint64)
    for i in range(m):
        for j in range(m):
            cnt = 0
            for a in range(k):
                ba = blocks[i, a]
                for b in range(k):
                    if ba == blocks[j, b]:
                        cnt += 1
                        break
            if cnt >= t:
                out[i, j >> 6] |= np.uint64(1) << np.uint64(j & 63)
    return out


def _np_ball_words(blocks, t, w):
    m, k = blocks.shape
    padded = np.zeros((m, w * 64), dtype=bool)
    chunk = max(1, (1 << 22) // max(1, m * k * k))
    for lo in range(0, m, chunk):
        hi = min(m, lo + chunk)
        eq = blocks[lo:hi, :, None, None] == blocks[None, None, :, :]
        # eq: (chunk, k, m, k) -> shared-block count per (i, j)
        counts = eq.any(axis=3).sum(axis=1)
        padded[lo:hi, :m] = counts >= t
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view(U64).reshape(m, w)


def ball_words(blocks, t: int, backend: str | None = None) -> np.ndarray:
    """(m, w) uint64 rows of the 'shares >= t blocks' relation."""
    blocks = np.ascontiguousarray(blocks, dtype=U64)
    w = words_needed(blocks.shape[0])
    if _pick(backend) == "numba":
        return _nb_ball_words(blocks, t, w)
    return _np_ball_words(blocks, t, w)


# ---------------------------------------------------------------------------
# closure = AND-reduce of the ball rows selected by an id-set


@njit(cache=True, nogil=True)
def _nb_closure_words(balls, sel, out):
    w = balls.shape[1]
    for wi in range(w):
        word = sel[wi]
        for b in range(64):
            if word >> np.uint64(b) & np.uint64(1):
                row = balls[(wi << 6) + b]
                for x in range(w):
                    out[x] &= row[x]
    return out


def _sel_bool(sel, m: int) -> np.ndarray:
    return np.unpackbits(
        np.ascontiguousarray(sel, dtype=U64).view(np.uint8), bitorder="little", count=m
    ).astype(bool)


def _np_closure_words(balls, sel, out, m):
    chosen = balls[_sel_bool(sel, m)]
    if len(chosen):
        np.bitwise_and.reduce(chosen, axis=0, out=out)
    return out


def closure_words(balls, sel, m: int, backend: str | None = None) -> np.ndarray:
    """AND of the rows in sel; the empty selection closes to all m ids."""
    out = full_row(m)
    if _pick(backend) == "numba":
        return _nb_closure_words(balls, np.ascontiguousarray(sel, dtype=U64), out)
    return _np_closure_words(balls, sel, out, m)


# ---------------------------------------------------------------------------
# all-subsets closure table (tiny universes, m <= 20: one word per id-set)


@njit(cache=True, nogil=True)
def _nb_subset_closure_table(balls0, m):
    size = 1 << m
    full = (np.uint64(1) << np.uint64(m)) - np.uint64(1) if m < 64 else ~np.uint64(0)
    tab = np.empty(size, dtype=np.uint64)
    tab[0] = full
    for h in range(1, size):
        low = h & -h
        b = 0
        while low > 1:
            low >>= 1
            b += 1
        tab[h] = tab[h & (h - 1)] & balls0[b]
    return tab


def _np_subset_closure_table(balls0, m):
    size = 1 << m
    full = (1 << m) - 1
    tab = np.empty(size, dtype=U64)
    tab[0] = full
    rows = [int(x) for x in balls0]
    out = tab.tolist()
    for h in range(1, size):
        out[h] = out[h & (h - 1)] & rows[(h & -h).bit_length() - 1]
    return np.array(out, dtype=U64)


def subset_closure_table(balls, m: int, backend: str | None = None) -> np.ndarray:
    """closure_table[h] = cl(h) for every id-set h of a <=20-item universe.

    Built by one dynamic-programming sweep: cl(h) = cl(h minus its lowest
    id) AND ball(lowest id).  Indexing the table by another id-set then
    gives cl of that set, so cl(cl(h)) is two lookups.
    """
    if m > 20:
        raise ValueError(f"subset table wants m <= 20, got {m}")
    balls0 = np.ascontiguousarray(balls[:, 0], dtype=U64)
    if _pick(backend) == "numba":
        return _nb_subset_closure_table(balls0, m)
    return _np_subset_closure_table(balls0, m)


# ---------------------------------------------------------------------------
# one NextClosure step of the composite operator A -> cl(cl(A))


@njit(cache=True, nogil=True)
def _nb_next_closed(balls, a, m, full):
    w = balls.shape[1]
    cur = a.copy()
    g = np.empty(w, dtype=np.uint64)
    f = np.empty(w, dtype=np.uint64)
    for i in range(m - 1, -1, -1):
        wi = i >> 6
        bit = np.uint64(1) << np.uint64(i & 63)
        if cur[wi] & bit:
            cur[wi] &= ~bit
            continue
        for x in range(w):
            g[x] = full[x]
        for wj in range(w):
            word = cur[wj]
            if wj == wi:
                word |= bit
            if word == np.uint64(0):
                continue
            for b in range(64):
                if word >> np.uint64(b) & np.uint64(1):
                    row = balls[(wj << 6) + b]
                    for x in range(w):
                        g[x] &= row[x]
        for x in range(w):
            f[x] = full[x]
        for wj in range(w):
            word = g[wj]
            if word == np.uint64(0):
                continue
            for b in range(64):
                if word >> np.uint64(b) & np.uint64(1):
                    row = balls[(wj << 6) + b]
                    for x in range(w):
                        f[x] &= row[x]
        ok = True
        for wj in range(wi):
            if f[wj] & ~cur[wj]:
                ok = False
                break
        if ok and (f[wi] & ~cur[wi]) & (bit - np.uint64(1)):
            ok = False
        if ok:
            return True, f
    return False, cur


def _np_next_closed(balls, a, m, full):
    w = balls.shape[1]
    cur = a.copy()
    for i in range(m - 1, -1, -1):
        wi = i >> 6
        bit = U64(1) << U64(i & 63)
        if cur[wi] & bit:
            cur[wi] = cur[wi] & ~bit
            continue
        cand = cur.copy()
        cand[wi] |= bit
        g = _np_closure_words(balls, cand, full.copy(), m)
        f = _np_closure_words(balls, g, full.copy(), m)
        new = f & ~cur
        below_ok = not new[:wi].any() and not (new[wi] & (bit - _ONE))
        if below_ok:
            return True, f
    return False, cur


def next_closed(balls, a, m: int, backend: str | None = None):
    """Smallest closed id-set after `a` in lectic order, or (False, _)."""
    full = full_row(m)
    a = np.ascontiguousarray(a, dtype=U64)
    if _pick(backend) == "numba":
        return _nb_next_closed(balls, a, m, full)
    return _np_next_closed(balls, a, m, full)


# ---------------------------------------------------------------------------
# exhaustive orbit scan: |sigma(U) cap U| in {0, 1, |U|} for all sigma


@njit(cache=True, nogil=True)
def _nb_orbit_scan(blocks, n, keys_sorted, ids_sorted, u_flags, u_ids, u_size):
    # lexicographic enumeration so both backends visit the same witness first
    k = blocks.shape[1]
    perm = np.arange(n)
    pb = np.empty(k, dtype=np.uint64)
    checked = 0
    while True:
        cnt = 0
        for ui in range(u_ids.shape[0]):
            idx = u_ids[ui]
            for j in range(k):
                b = blocks[idx, j]
                nb = np.uint64(0)
                for e in range(n):
                    if b >> np.uint64(e) & np.uint64(1):
                        nb |= np.uint64(1) << np.uint64(perm[e])
                pb[j] = nb
            for a2 in range(1, k):
                x = pb[a2]
                xl = x & (np.uint64(0) - x)
                bp = a2 - 1
                while bp >= 0 and (pb[bp] & (np.uint64(0) - pb[bp])) > xl:
                    pb[bp + 1] = pb[bp]
                    bp -= 1
                pb[bp + 1] = x
            key = np.uint64(0)
            for j in range(k):
                key |= pb[j] << np.uint64(j * n)
            lo = 0
            hi = keys_sorted.shape[0]
            while lo < hi:
                mid = (lo + hi) >> 1
                if keys_sorted[mid] < key:
                    lo = mid + 1
                else:
                    hi = mid
            if u_flags[ids_sorted[lo]]:
                cnt += 1
        checked += 1
        if cnt != 0 and cnt != 1 and cnt != u_size:
            return False, checked, perm
        i = n - 2
        while i >= 0 and perm[i] >= perm[i + 1]:
            i -= 1
        if i < 0:
            return True, checked, perm
        j = n - 1
        while perm[j] <= perm[i]:
            j -= 1
        tmp = perm[i]
        perm[i] = perm[j]
        perm[j] = tmp
        lo = i + 1
        hi = n - 1
        while lo < hi:
            tmp = perm[lo]
            perm[lo] = perm[hi]
            perm[hi] = tmp
            lo += 1
            hi -= 1


def _np_orbit_scan(blocks, n, keys_sorted, ids_sorted, u_flags, u_ids, u_size):
    from itertools import permutations

    k = blocks.shape[1]
    sub = blocks[u_ids]
    bits = (sub[:, :, None] >> np.arange(n, dtype=U64)[None, None, :]) & _ONE
    checked = 0
    for sigma in permutations(range(n)):
        weights = (_ONE << np.array(sigma, dtype=U64))[None, None, :]
        permuted = (bits * weights).sum(axis=2, dtype=U64)
        low = permuted & (np.zeros_like(permuted) - permuted)
        order = np.argsort(low, axis=1, kind="stable")
        rows = np.take_along_axis(permuted, order, axis=1)
        keys = np.zeros(len(u_ids), dtype=U64)
        for j in range(k):
            keys |= rows[:, j] << U64(j * n)
        pos = np.searchsorted(keys_sorted, keys)
        cnt = int(u_flags[ids_sorted[pos]].sum())
        checked += 1
        if cnt not in (0, 1, u_size):
            return False, checked, np.array(sigma)
    return True, checked, np.arange(n)


def orbit_scan(blocks, n: int, u_flags, backend: str | None = None):
    """Run |sigma(U) cap U| in {0,1,|U|} over every ground-set permutation.

    blocks must pack into single uint64 keys: k*n <= 64.  Returns
    (ok, permutations_checked, witness_permutation) where the witness is
    only meaningful when ok is False.
    """
    blocks = np.ascontiguousarray(blocks, dtype=U64)
    m, k = blocks.shape
    if k * n > 64:
        raise ValueError(f"packed keys need k*n <= 64, got {k}*{n}")
    keys = np.zeros(m, dtype=U64)
    for j in range(k):
        keys |= blocks[:, j] << U64(j * n)
    order = np.argsort(keys)
    keys_sorted = keys[order]
    ids_sorted = order.astype(np.int64)
    u_flags = np.ascontiguousarray(u_flags, dtype=bool)
    u_ids = np.where(u_flags)[0].astype(np.int64)
    u_size = int(u_flags.sum())
    if _pick(backend) == "numba":
        ok, checked, sigma = _nb_orbit_scan(
            blocks, n, keys_sorted, ids_sorted, u_flags, u_ids, u_size
        )
    else:
        ok, checked, sigma = _np_orbit_scan(
            blocks, n, keys_sorted, ids_sorted, u_flags, u_ids, u_size
        )
    if ok:
        sigma = np.arange(n)
    return bool(ok), int(checked), np.asarray(sigma)
