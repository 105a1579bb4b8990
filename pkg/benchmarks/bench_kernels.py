"""Timing table for the bit-packed kernels: numba vs pure numpy.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Each kernel runs at t=1 on the (2,3), (2,4) and (3,3) universes (15, 105
and 280 items); the closed-set walk is capped at 20k steps to keep the
pure-numpy column affordable.  The numba flavor is warmed once before
timing so the table reflects steady-state speed, not compilation.
Outputs of the two flavors are compared for equality at every point - a
disagreement aborts the run, identical words are part of the contract.
"""

import argparse
import time

import numpy as np

from uniset import _kernels as K
from uniset.cache import get_or_build
from uniset.core import Params


def timed(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def walk(words, m, backend, limit=20_000):
    cur = K.closure_words(
        words,
        K.closure_words(words, K.int_to_words(0, K.words_needed(m)), m, backend),
        m,
        backend,
    )
    n = 0
    while n < limit:
        n += 1
        ok, cur = K.next_closed(words, cur, m, backend)
        if not ok:
            break
    return n


def bench_point(c, k, t, repeat, rows):
    u = get_or_build(Params(c, k))
    blocks = u.block_matrix()
    m = len(u)
    point = f"({c},{k}) t={t} m={m}"

    cases = {}
    cases["ball_words"] = lambda b: K.ball_words(blocks, t, b)
    words = K.ball_words(blocks, t, None)
    sel = K.full_row(m)
    cases["closure_words"] = lambda b: K.closure_words(words, sel, m, b)
    if m <= 20:
        cases["subset_closure_table"] = lambda b: K.subset_closure_table(words, m, b)
    cases["next_closed walk"] = lambda b: walk(words, m, b)  # capped at 20k steps
    if u.params.k * u.params.n <= 64 and u.params.n <= 8:
        flags = np.zeros(m, dtype=bool)
        flags[: m // 3] = True
        cases["orbit_scan"] = lambda b: K.orbit_scan(blocks, u.params.n, flags, b)

    for name, fn in cases.items():
        fn("numba")  # warm the jit cache
        t_nb, out_nb = timed(lambda: fn("numba"), repeat)
        t_np, out_np = timed(lambda: fn("numpy"), repeat)
        if isinstance(out_nb, np.ndarray):
            assert np.array_equal(out_nb, out_np), f"{name} outputs diverge at {point}"
        elif isinstance(out_nb, tuple):
            assert out_nb[:2] == out_np[:2], f"{name} outputs diverge at {point}"
        else:
            assert out_nb == out_np, f"{name} outputs diverge at {point}"
        rows.append((point, name, t_nb, t_np))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3, help="best-of-N timing")
    args = ap.parse_args()

    if not K.HAS_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare against")

    rows = []
    bench_point(2, 3, 1, args.repeat, rows)
    bench_point(2, 4, 1, args.repeat, rows)
    bench_point(3, 3, 1, args.repeat, rows)

    width = max(len(r[1]) for r in rows)
    print(f"{'point':16} {'kernel':{width}} {'numba':>10} {'numpy':>10} {'speedup':>8}")
    for point, name, t_nb, t_np in rows:
        print(
            f"{point:16} {name:{width}} {t_nb * 1e3:9.2f}ms {t_np * 1e3:9.2f}ms "
            f"{t_np / t_nb:7.1f}x"
        )


if __name__ == "__main__":
    main()
