"""Exact optimization over cross-intersecting family pairs.

A pair (F, G) of families is cross-t-intersecting when every member of F
shares at least t blocks with every member of G.  Enlarging F to the set
of all partitions compatible with G (and vice versa) never hurts, so both
the maximum product and the maximum sum of sizes are attained on *closed*
pairs: F = cl(G), G = cl(F), where cl takes a family to everything sharing
>= t blocks with all of it.  Three interchangeable engines find them:

- exhaustive: tabulate cl over all 2^m id-sets (universes up to 20 items),
- concepts: lectic NextClosure walk over all closed pairs,
- bnb: close-by-one depth-first search with an upper-bound cutoff that
  keeps every tied optimum.

All three return identical certified results; `optimize` picks per size.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass
from itertools import combinations
from math import factorial
from typing import Callable, Iterator

import numpy as np

from . import _kernels as K
from .core import Params, apply_permutation, canonical, sort_key
from .covers import FamilyCovers
from .errors import CapExceeded, DomainError
from .constructions import (
    base_partition,
    build_sporadic_pair,
    exhaust_sporadic,
    family_members,
    make_spec,
    partner_spec,
)

DEFAULT_CONCEPT_CAP = 2_000_000

Pair = tuple[int, int]


def mask_ids(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


class CrossContext:
    """One universe + t, with the shares->=t relation packed for kernels."""

    def __init__(self, universe, t: int, backend: str | None = None):
        universe.params.check_t(t)
        self.universe = universe
        self.t = t
        self.m = len(universe)
        self.backend = backend
        self.words = K.ball_words(universe.block_matrix(), t, backend)
        self.balls = [K.words_to_int(row) for row in self.words]
        self.full = (1 << self.m) - 1
        self.covers = FamilyCovers(universe, t)
        self._sporadic: dict[Pair, tuple[str, dict]] | None = None

    def closure(self, ids: int) -> int:
        """Everything sharing >= t blocks with every id in the set."""
        out = self.full
        while ids:
            low = ids & -ids
            out &= self.balls[low.bit_length() - 1]
            if out == 0:
                return 0
            ids ^= low
        return out

    def concept_at(self, seed: int) -> Pair:
        g = self.closure(seed)
        return self.closure(g), g


# ---------------------------------------------------------------------------
# concept enumeration


def exhaustive_concepts(ctx: CrossContext) -> list[Pair]:
    """All closed pairs via the full 2^m closure table (m <= 20)."""
    if ctx.m > 20:
        raise CapExceeded(f"exhaustive table wants m <= 20, got {ctx.m}")
    tab = K.subset_closure_table(ctx.words, ctx.m, ctx.backend).tolist()
    out = []
    for g in range(1 << ctx.m):
        f = tab[g]
        if tab[f] == g:  # g is closed, f is its partner
            out.append((f, g))
    return out


def concept_stream(ctx: CrossContext) -> Iterator[Pair]:
    """NextClosure walk: every closed pair exactly once, lectic order."""
    w = K.words_needed(ctx.m)
    cur = K.int_to_words(ctx.concept_at(0)[0], w)
    while True:
        a = K.words_to_int(cur)
        yield a, ctx.closure(a)
        ok, cur = K.next_closed(ctx.words, cur, ctx.m, ctx.backend)
        if not ok:
            return


# ---------------------------------------------------------------------------
# optimization


@dataclass(frozen=True)
class SearchResult:
    objective: str
    value: int
    certified: bool
    method: str
    optima: tuple[Pair, ...]
    explored: int
    capped: bool = False


def orient_pair(pair: Pair) -> Pair:
    f, g = pair
    if (f.bit_count(), f) <= (g.bit_count(), g):
        return f, g
    return g, f


def _score(pair: Pair, objective: str, nonempty: bool) -> int | None:
    f, g = pair
    if nonempty and (f == 0 or g == 0):
        return None
    return f.bit_count() * g.bit_count() if objective == "product" else f.bit_count() + g.bit_count()


def constraint_admit(ctx: CrossContext, constraint: str | None) -> Callable[[Pair], bool] | None:
    """Turn a constraint name into a pair predicate (None = admit all).

    "nontrivial" keeps pairs where neither family has t blocks common to
    all members; "tau-g-min=V" keeps pairs whose larger covering number is
    at least V.  Both reject pairs with an empty side, since triviality and
    covering numbers are ill-defined there.
    """
    if constraint in (None, "none"):
        return None
    if constraint == "nontrivial":
        def admit(pair: Pair) -> bool:
            for mask in pair:
                if mask == 0:
                    return False
                common: set[int] | None = None
                ids = mask
                while ids:
                    low = ids & -ids
                    blocks = set(ctx.universe[low.bit_length() - 1])
                    common = blocks if common is None else common & blocks
                    if len(common) < ctx.t:
                        break
                    ids ^= low
                else:
                    return False  # this side is a subfamily of a star
            return True

        return admit
    if constraint.startswith("tau-g-min="):
        try:
            v = int(constraint.split("=", 1)[1])
        except ValueError:
            raise DomainError(f"bad constraint value in {constraint!r}") from None

        def admit(pair: Pair) -> bool:
            if pair[0] == 0 or pair[1] == 0:
                return False
            biggest = 0
            for mask in pair:
                rep = ctx.covers.min_covers(mask, cap=min(v, ctx.universe.params.k))
                biggest = max(biggest, v if rep.tau is None else rep.tau)
            return biggest >= v

        return admit
    raise DomainError(f"unknown constraint {constraint!r}")


def _collect(pairs, objective: str, nonempty: bool, method: str, explored: int,
             certified: bool, capped: bool = False, admit=None) -> SearchResult:
    best = -1
    optima: set[Pair] = set()
    if admit is None:
        for pair in pairs:
            val = _score(pair, objective, nonempty)
            if val is None:
                continue
            if val > best:
                best = val
                optima = {orient_pair(pair)}
            elif val == best:
                optima.add(orient_pair(pair))
    else:
        # descending-score walk so the (possibly costly) predicate only
        # runs on pairs that could still be optimal
        scored = []
        for pair in pairs:
            val = _score(pair, objective, nonempty)
            if val is not None:
                scored.append((val, pair))
        scored.sort(key=lambda item: item[0], reverse=True)
        for val, pair in scored:
            if best >= 0 and val < best:
                break
            if admit(pair):
                best = val
                optima.add(orient_pair(pair))
    return SearchResult(
        objective, best, certified, method, tuple(sorted(optima)), explored, capped
    )


def _construction_seeds(ctx: CrossContext, objective: str) -> list[Pair]:
    """Concepts grown from the catalogued extremal families.

    Double closure turns each family into a genuine concept at least as
    good, so its score is a sound branch-and-bound incumbent; the concept
    itself is rediscovered by the search, keeping tied-optima collection
    intact.
    """
    u = ctx.universe
    p = u.params
    t = ctx.t
    base = base_partition(p)
    raw: list[int] = []
    if objective == "sum":
        raw.append(ctx.balls[u.id_of(base)])
    else:
        star = ctx.full
        for b in base[:t]:
            star &= ctx.covers.owner_mask(b)
        raw.append(star)
        if p.k >= t + 2:
            frame = base[: t + 2]
            near = 0
            for sub in combinations(frame, t + 1):
                hit = ctx.full
                for b in sub:
                    hit &= ctx.covers.owner_mask(b)
                near |= hit
            raw.append(near)
    out = []
    for s in raw:
        g = ctx.closure(s)
        out.append((ctx.closure(g), g))
    return out


def bnb_optimize(ctx: CrossContext, objective: str, nonempty: bool, admit=None) -> SearchResult:
    """Close-by-one DFS keeping all tied optima (strict-< pruning only)."""
    m = ctx.m
    best = -1
    for seed in _construction_seeds(ctx, objective):
        val = _score(seed, objective, nonempty)
        if val is not None and (admit is None or admit(seed)) and val > best:
            best = val
    optima: set[Pair] = set()
    nodes = 0

    # how many candidate ids remain at or above position y, outside a
    above = [0] * (m + 1)

    def visit(a: int, b: int, y: int) -> None:
        nonlocal best, optima, nodes
        nodes += 1
        val = _score((a, b), objective, nonempty)
        if val is not None and val >= best and (admit is None or admit((a, b))):
            if val > best:
                best = val
                optima = {orient_pair((a, b))}
            else:
                optima.add(orient_pair((a, b)))
        if nonempty and b == 0:
            return  # b only shrinks below here
        sb = b.bit_count()
        for i in range(y, m):
            bit = 1 << i
            if a & bit:
                continue
            cap_f = a.bit_count() + (m - i) - ((a >> i).bit_count())
            bound = cap_f * sb if objective == "product" else cap_f + sb
            if bound < best:
                break  # later i only lowers cap_f
            b2 = b & ctx.balls[i]
            a2 = ctx.closure(b2)
            if a2 & (bit - 1) != a & (bit - 1):
                continue  # not canonical from this branch
            visit(a2, b2, i + 1)

    a0, b0 = ctx.concept_at(0)
    visit(a0, b0, 0)
    return SearchResult(objective, best, True, "bnb", tuple(sorted(optima)), nodes)


def optimize(
    ctx: CrossContext,
    objective: str = "product",
    method: str = "auto",
    cap: int | None = None,
    nonempty: bool | None = None,
    constraint: str | None = None,
) -> SearchResult:
    """Best product or sum over cross-t-intersecting pairs, with optima.

    The sum objective requires both families nonempty by default (an empty
    family is vacuously compatible with everything, which would make the
    question trivial); the product is indifferent.  `constraint` filters
    candidate pairs ("none", "nontrivial", "tau-g-min=V"); the bound used
    for pruning is constraint-free, so certificates remain valid.
    """
    if objective not in ("product", "sum"):
        raise DomainError(f"unknown objective {objective!r}")
    if nonempty is None:
        nonempty = objective == "sum"
    if cap is None:
        cap = int(os.environ.get("SEARCH_CAP", DEFAULT_CONCEPT_CAP))
    admit = constraint_admit(ctx, constraint)
    if method == "auto":
        method = "exhaustive" if ctx.m <= 20 else "concepts"
    if method == "exhaustive":
        pairs = exhaustive_concepts(ctx)
        return _collect(pairs, objective, nonempty, "exhaustive", 1 << ctx.m, True,
                        admit=admit)
    if method == "concepts":
        seen = 0
        pairs = []
        for pair in concept_stream(ctx):
            pairs.append(pair)
            seen += 1
            if seen > cap:
                # walk too large: rerun as branch-and-bound for a certificate
                result = bnb_optimize(ctx, objective, nonempty, admit=admit)
                return SearchResult(
                    result.objective, result.value, True, "bnb",
                    result.optima, result.explored, capped=True,
                )
        return _collect(pairs, objective, nonempty, "concepts", seen, True, admit=admit)
    if method == "bnb":
        return bnb_optimize(ctx, objective, nonempty, admit=admit)
    raise DomainError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# naming what the optimizer found


def _blocks_common_to_all(members) -> set[int]:
    it = iter(members)
    out = set(next(it))
    for f in it:
        out &= set(f)
    return out


def classify_pair(ctx: CrossContext, f_mask: int, g_mask: int) -> tuple[str, dict]:
    """Name a closed pair against the catalogued extremal shapes.

    Returns (label, anchors); anchors hold the defining blocks (bitmasks)
    or member partitions, enough to rebuild the pair.  Shapes can overlap
    at small parameters (a two-sided near-star can equal a trio family at
    k = t+3), so matching runs in a fixed precedence order: SingletonBall,
    StarPair, N2Pair, N1Pair, N3Pair, sporadic k=t+2 pairs.  Unrecognized
    pairs get an empty anchor dict.
    """
    u = ctx.universe
    t = ctx.t
    p = u.params
    if f_mask == 0 or g_mask == 0:
        return "EmptyFull", {}
    f_ids = mask_ids(f_mask)
    g_ids = mask_ids(g_mask)
    members_f = [u[i] for i in f_ids]
    members_g = [u[i] for i in g_ids]

    for one, other, other_members in (
        (f_mask, g_mask, members_f),
        (g_mask, f_mask, members_g),
    ):
        if other.bit_count() == 1:
            center = u[mask_ids(other)[0]]
            if one == ctx.balls[u.id_of(center)]:
                return "SingletonBall", {"center": center}

    if f_mask == g_mask:
        common = _blocks_common_to_all(members_f)
        if len(common) >= t:
            for T in combinations(sorted(common, key=lambda b: sort_key((b,))), t):
                star = ctx.full
                for b in T:
                    star &= ctx.covers.owner_mask(b)
                if star == f_mask:
                    return "StarPair", {"T": canonical(T)}

    rep_f = ctx.covers.min_covers(f_mask, cap=min(t + 1, p.k))
    rep_g = rep_f if g_mask == f_mask else ctx.covers.min_covers(g_mask, cap=min(t + 1, p.k))

    if f_mask == g_mask and rep_f.tau == t + 1:
        z_blocks = sorted({b for cv in rep_f.covers for b in cv}, key=lambda b: sort_key((b,)))
        if len(z_blocks) == t + 2:
            try:
                spec = make_spec("N2", p.c, p.k, t, Z=tuple(z_blocks))
            except Exception:
                spec = None
            if spec is not None and set(family_members(spec, u)) == set(members_f):
                return "N2Pair", {"Z": canonical(z_blocks)}

    if f_mask != g_mask and rep_f.tau == t + 1 == rep_g.tau and rep_f.covers and rep_g.covers:
        hit = _match_near_star(ctx, rep_f.covers, rep_g.covers, members_f, members_g)
        if hit is not None:
            return hit

    if t == 1 and f_mask != g_mask:
        # the min covers of one side are the trio defining the *other* side
        if rep_g.tau == 2 and len(rep_g.covers) == 3:
            label = _match_pair_trio(ctx, rep_g.covers, members_f, members_g)
            if label is not None:
                return label
        if rep_f.tau == 2 and len(rep_f.covers) == 3:
            label = _match_pair_trio(ctx, rep_f.covers, members_g, members_f)
            if label is not None:
                return label

    if p.k == t + 2:
        table = _sporadic_index(ctx)
        hit = table.get(orient_pair((f_mask, g_mask)))
        if hit is not None:
            return hit
    return "Unrecognized", {}


def _match_near_star(ctx, covers_f, covers_g, members_f, members_g):
    """Try the two-sided near-star shape on a pair with both taus t+1.

    For a true instance the covers through the shared t-set T are exactly
    T plus one block of the opposite anchor, so M (resp. L) is recovered
    as the union of F's (resp. G's) covers through T.  Families can carry
    further min covers missing T, so T is searched as a t-subset of each
    cover rather than read off the overall intersection.
    """
    u = ctx.universe
    p = u.params
    t = ctx.t
    tried = set()
    for cv in covers_f:
        for T in combinations(cv, t):
            T = canonical(T)
            if T in tried:
                continue
            tried.add(T)
            t_set = set(T)
            thru_f = {b for c2 in covers_f if t_set <= set(c2) for b in c2}
            thru_g = {b for c2 in covers_g if t_set <= set(c2) for b in c2}
            if len(thru_f) != p.k - 1 or len(thru_g) != p.k - 1:
                continue
            M = canonical(thru_f)
            L = canonical(thru_g)
            try:
                spec = make_spec("N1", p.c, p.k, t, T=T, L=L, M=M)
                mf = set(family_members(spec, u))
                mg = set(family_members(partner_spec(spec), u))
            except Exception:
                continue
            if mf == set(members_f) and mg == set(members_g):
                return "N1Pair", {"T": T, "L": L, "M": M}
    return None


def _match_pair_trio(ctx, trio, primary_members, partner_members):
    """Read three 2-block covers as the A1/A2/C trio defining a family.

    The trio comes from the partner's min covers; if the family spec it
    defines reproduces primary_members (and its partner partner_members),
    the pair is the catalogued trio-of-pairs shape.
    """
    from itertools import permutations

    u = ctx.universe
    p = u.params
    for order in permutations(trio):
        a1, a2, cc = (set(cv) for cv in order)
        if not (a1 & cc and a2 & cc and not a1 & a2):
            continue
        try:
            spec = make_spec(
                "N3", p.c, p.k, 1,
                A1=tuple(a1), A2=tuple(a2), C=tuple(cc),
            )
            built = set(family_members(spec, u))
            partner_built = set(family_members(partner_spec(spec), u))
        except Exception:
            continue
        if built == set(primary_members) and partner_built == set(partner_members):
            return "N3Pair", {
                "A1": canonical(a1), "A2": canonical(a2), "C": canonical(cc),
            }
    return None


def _sporadic_index(ctx: CrossContext) -> dict[Pair, tuple[str, dict]]:
    if ctx._sporadic is None:
        u = ctx.universe
        p = u.params
        t = ctx.t
        table: dict[Pair, tuple[str, dict]] = {}
        kinds = ("C51", "C52") + (("C53",) if t >= 2 else ())
        for kind in kinds:
            for spec in exhaust_sporadic(kind, p, t, u):
                fam_f, fam_g = build_sporadic_pair(spec)
                fm = gm = 0
                for f in fam_f:
                    fm |= 1 << u.id_of(f)
                for g in fam_g:
                    gm |= 1 << u.id_of(g)
                anchors = {"E": spec.anchor("E"), "u": spec.anchor("u"), "v": spec.anchor("v")}
                table.setdefault(orient_pair((fm, gm)), (kind, anchors))
        ctx._sporadic = table
    return ctx._sporadic


# ---------------------------------------------------------------------------
# fragments of the compatibility graph


@dataclass(frozen=True)
class Fragment:
    ids: tuple[int, ...]
    neighborhood_size: int
    deficiency: int
    trivial: bool
    semi_imprimitive: bool | None
    permutations_checked: int


def fragments(
    ctx: CrossContext,
    method: str = "auto",
    cap: int | None = None,
    orbit_limit: int = 9,
    mode: str = "closed-sets",
) -> tuple[Fragment, ...]:
    """Minimum-deficiency sets (|neighborhood| - |set|) of one graph side.

    The bipartite incompatibility graph joins A, B with |A cap B| < t; the
    neighborhood of a set is the complement of its closure.  Replacing B
    by its double closure keeps the neighborhood while growing B, so the
    minimum over all admissible sets (N(B) != everything) is attained on
    closed sets; "closed-sets" mode finds them through the sum optimizer,
    "exhaustive" mode scans every nonempty subset (m <= 20) and therefore
    also certifies that no non-closed achiever exists beyond the closure
    argument.  Each fragment is tagged trivial when it is a single vertex
    or a full ball; non-trivial ones are checked for orbit
    semi-imprimitivity (|sigma U cap U| in {0, 1, |U|}) by exhausting
    ground permutations when the ground set is small enough.  The flag is
    reported, not asserted: only a minimum non-trivial fragment would have
    to satisfy it, and trivial ones may legitimately fail.
    """
    u = ctx.universe
    n = u.params.n
    sides: set[int] = set()
    if mode == "exhaustive":
        if ctx.m > 20:
            raise CapExceeded(f"exhaustive fragment scan wants m <= 20, got {ctx.m}")
        tab = K.subset_closure_table(ctx.words, ctx.m, ctx.backend)
        size = np.uint64(1 << ctx.m)
        idx = np.arange(size, dtype=np.uint64)
        defic = (ctx.m - np.bitwise_count(tab).astype(np.int64)) - np.bitwise_count(
            idx
        ).astype(np.int64)
        ok = (idx != 0) & (tab != 0)
        if not ok.any():
            return ()
        least = defic[ok].min()
        sides.update(int(b) for b in idx[ok & (defic == least)])
    elif mode == "closed-sets":
        res = optimize(ctx, "sum", method=method, cap=cap, nonempty=True)
        for f, g in res.optima:
            sides.add(f)
            sides.add(g)
    else:
        raise DomainError(f"unknown fragment mode {mode!r}")
    out = []
    for b in sorted(sides):
        nb = ctx.m - ctx.closure(b).bit_count()
        ids = mask_ids(b)
        trivial = len(ids) == 1 or any(b == ctx.balls[i] for i in ids)
        semi: bool | None = None
        checked = 0
        if (
            not trivial
            and 1 < len(ids) < ctx.m
            and n <= orbit_limit
            and u.params.k * n <= 64
        ):
            flags = np.zeros(ctx.m, dtype=np.bool_)
            flags[ids] = True
            ok_orbit, checked, _sigma = K.orbit_scan(
                u.block_matrix(), n, flags, ctx.backend
            )
            semi = bool(ok_orbit)
        out.append(
            Fragment(tuple(ids), nb, nb - len(ids), trivial, semi, checked)
        )
    return tuple(out)


@dataclass(frozen=True)
class OrbitVerdict:
    mode: str  # "exhaustive" or "sampled"
    ok: bool
    checked: int
    witness: tuple[int, ...] | None


def semi_imprimitive_check(
    universe,
    ids,
    budget: int = 362_880,
    rng: random.Random | None = None,
    backend: str | None = None,
) -> OrbitVerdict:
    """Is |sigma(U) cap U| in {0, 1, |U|} for every ground permutation?

    Exhausts all n! permutations when that fits the budget (and the packed
    kernel applies); otherwise samples `budget` random permutations, which
    can only ever report "no violation found", never certify.  A failing
    verdict carries the violating permutation as witness.
    """
    n = universe.params.n
    uset = sorted(set(ids))
    flags = np.zeros(len(universe), dtype=np.bool_)
    flags[uset] = True
    if factorial(n) <= budget and universe.params.k * n <= 64:
        ok, checked, sigma = K.orbit_scan(universe.block_matrix(), n, flags, backend)
        witness = None if ok else tuple(int(x) for x in sigma)
        return OrbitVerdict("exhaustive", bool(ok), int(checked), witness)
    rng = rng if rng is not None else random.Random(0)
    members = [universe[i] for i in uset]
    idset = set(uset)
    size = len(idset)
    checked = 0
    for _ in range(budget):
        sigma = list(range(n))
        rng.shuffle(sigma)
        checked += 1
        inter = 0
        for p in members:
            img = apply_permutation(sigma, p, universe.params)
            if universe.index[img] in idset:
                inter += 1
        if inter not in (0, 1, size):
            return OrbitVerdict("sampled", False, checked, tuple(sigma))
    return OrbitVerdict("sampled", True, checked, None)
