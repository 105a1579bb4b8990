"""Backend parity: every kernel must produce identical words both ways."""

import random

import numpy as np
import pytest

from uniset import _kernels as K

needs_numba = pytest.mark.skipif(not K.HAS_NUMBA, reason="numba not importable")

BACKENDS = ("numba", "numpy") if K.HAS_NUMBA else ("numpy",)


def test_words_roundtrip():
    rng = random.Random(1)
    for w in (1, 2, 3):
        for _ in range(50):
            x = rng.getrandbits(64 * w - rng.randint(0, 17))
            arr = K.int_to_words(x, w)
            assert arr.shape == (w,) and K.words_to_int(arr) == x


def test_full_row_tail():
    row = K.full_row(70)
    assert K.words_needed(70) == 2 and row.shape == (2,)
    assert K.words_to_int(row) == (1 << 70) - 1
    assert K.words_to_int(K.full_row(64)) == (1 << 64) - 1


def test_popcount_rows():
    rng = np.random.default_rng(2)
    rows = rng.integers(0, 1 << 63, size=(6, 3), dtype=np.uint64)
    expect = [sum(int(x).bit_count() for x in r) for r in rows]
    assert K.popcount_rows(rows).tolist() == expect


@needs_numba
@pytest.mark.parametrize("t", [1, 2])
def test_ball_words_parity(u23, u24, t):
    for u in (u23, u24):
        nb = K.ball_words(u.block_matrix(), t, "numba")
        np_ = K.ball_words(u.block_matrix(), t, "numpy")
        assert np.array_equal(nb, np_)


def test_ball_words_rows_are_balls(u23):
    words = K.ball_words(u23.block_matrix(), 1, None)
    for i, f in enumerate(u23):
        expect = 0
        for j, g in enumerate(u23):
            if len(set(f) & set(g)) >= 1:
                expect |= 1 << j
        assert K.words_to_int(words[i]) == expect


@needs_numba
def test_closure_words_parity(u24):
    words = K.ball_words(u24.block_matrix(), 1, None)
    m = len(u24)
    w = K.words_needed(m)
    rng = random.Random(3)
    for _ in range(40):
        sel = K.int_to_words(rng.getrandbits(m) & rng.getrandbits(m), w)
        a = K.closure_words(words, sel, m, "numba")
        b = K.closure_words(words, sel, m, "numpy")
        assert np.array_equal(a, b)


def test_closure_of_empty_selection_is_full(u23):
    words = K.ball_words(u23.block_matrix(), 1, None)
    m = len(u23)
    out = K.closure_words(words, K.int_to_words(0, K.words_needed(m)), m, None)
    assert K.words_to_int(out) == (1 << m) - 1


@needs_numba
def test_subset_closure_table_parity(u23):
    words = K.ball_words(u23.block_matrix(), 2, None)
    a = K.subset_closure_table(words, len(u23), "numba")
    b = K.subset_closure_table(words, len(u23), "numpy")
    assert np.array_equal(a, b)


def test_subset_closure_table_rejects_large_m():
    with pytest.raises(ValueError):
        K.subset_closure_table(np.zeros((21, 1), dtype=np.uint64), 21)


@needs_numba
def test_next_closed_walk_parity(u23):
    words = K.ball_words(u23.block_matrix(), 1, None)
    m = len(u23)
    walks = {}
    for backend in BACKENDS:
        seen = []
        cur = K.closure_words(
            words,
            K.closure_words(words, K.int_to_words(0, K.words_needed(m)), m, backend),
            m,
            backend,
        )
        while True:
            seen.append(K.words_to_int(cur))
            ok, cur = K.next_closed(words, cur, m, backend)
            if not ok:
                break
        walks[backend] = seen
    assert walks["numba"] == walks["numpy"]
    assert len(set(walks["numba"])) == len(walks["numba"])  # no repeats


@needs_numba
def test_orbit_scan_parity_on_failing_set(u23):
    blocks = u23.block_matrix()
    words = K.ball_words(blocks, 1, None)
    flags = np.zeros(len(u23), dtype=bool)
    ball0 = K.words_to_int(words[0])
    while ball0:
        low = ball0 & -ball0
        flags[low.bit_length() - 1] = True
        ball0 ^= low
    got = [K.orbit_scan(blocks, 6, flags, b) for b in BACKENDS]
    (ok_a, n_a, sig_a), (ok_b, n_b, sig_b) = got
    assert not ok_a and not ok_b
    assert n_a == n_b  # identical lexicographic stopping point
    assert np.array_equal(sig_a, sig_b)


@needs_numba
def test_orbit_scan_parity_on_passing_set(u23):
    blocks = u23.block_matrix()
    flags = np.zeros(len(u23), dtype=bool)
    flags[5] = True
    got = [K.orbit_scan(blocks, 6, flags, b) for b in BACKENDS]
    assert got[0][0] and got[1][0]
    assert got[0][1] == got[1][1] == 720


def test_orbit_scan_rejects_wide_keys():
    with pytest.raises(ValueError):
        K.orbit_scan(np.zeros((3, 9), dtype=np.uint64), 8, np.zeros(3, dtype=bool))


def test_active_backend_env(monkeypatch):
    monkeypatch.setenv("UNISET_BACKEND", "numpy")
    assert K.active_backend() == "numpy"
    monkeypatch.delenv("UNISET_BACKEND")
    assert K.active_backend() in ("numba", "numpy")
    if K.HAS_NUMBA:
        monkeypatch.setenv("UNISET_BACKEND", "numba")
        assert K.active_backend() == "numba"
    monkeypatch.setenv("UNISET_BACKEND", "fortran")
    assert K.active_backend() in ("numba", "numpy")  # unknown values fall through
