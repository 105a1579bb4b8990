"""t-cover analysis for families of c-uniform partitions.

A t-cover of a family is a partial partition S (pairwise disjoint c-blocks)
meeting every member in at least t blocks; the covering number tau is the
smallest size of one.  Minimum covers only ever use blocks that occur in
some member (a block in no member meets nothing, so dropping it keeps the
cover a cover and shrinks it), which keeps the search space finite.

Everything here works on either explicit member lists or id-masks over an
enumerated universe; the id-mask path turns "which members does this block
pair cover" into a handful of big-int ANDs.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

from .core import Params, canonical, common_blocks, sort_key
from .errors import PreconditionViolated

Partition = tuple[int, ...]
Cover = tuple[int, ...]


@dataclass(frozen=True)
class CoverReport:
    t: int
    tau: int | None
    covers: tuple[Cover, ...]
    cap: int

    @property
    def capped(self) -> bool:
        return self.tau is None


def occurring_blocks(members) -> tuple[int, ...]:
    blocks = {b for f in members for b in f}
    return tuple(sorted(blocks, key=lambda b: sort_key((b,))))


def is_t_cover(cover, members, t: int) -> bool:
    cs = set(cover)
    return all(len(cs & set(f)) >= t for f in members)


def min_t_covers(members, t: int, params: Params, cap: int | None = None) -> CoverReport:
    """Covering number and every minimum t-cover, or tau=None beyond cap."""
    members = tuple(members)
    if not members:
        raise PreconditionViolated("covering an empty family is ill-defined")
    cap = params.k if cap is None else min(cap, params.k)
    occ = occurring_blocks(members)
    sets = [set(f) for f in members]
    for size in range(t, cap + 1):
        hits = []
        for combo in combinations(occ, size):
            merged = 0
            for b in combo:
                if merged & b:
                    break
                merged |= b
            else:
                cs = set(combo)
                if all(len(cs & fs) >= t for fs in sets):
                    hits.append(canonical(combo))
        if hits:
            return CoverReport(t, size, tuple(sorted(hits, key=sort_key)), cap)
    return CoverReport(t, None, (), cap)


# ---------------------------------------------------------------------------
# id-mask fast path over an enumerated universe


class FamilyCovers:
    """Cover queries for families given as id-masks over one universe."""

    def __init__(self, universe, t: int):
        self.universe = universe
        self.t = t
        self.params = universe.params
        self._owner_masks: dict[int, int] = {}

    def owner_mask(self, block: int) -> int:
        got = self._owner_masks.get(block)
        if got is None:
            got = 0
            for i in self.universe.block_owners.get(block, ()):
                got |= 1 << i
            self._owner_masks[block] = got
        return got

    def covered_ids(self, blocks) -> int:
        """ids meeting >= t of the given blocks, as OR of t-subset ANDs."""
        owners = [self.owner_mask(b) for b in blocks]
        out = 0
        for sub in combinations(owners, self.t):
            inter = sub[0]
            for o in sub[1:]:
                inter &= o
            out |= inter
        return out

    def family_blocks(self, fam_mask: int) -> tuple[int, ...]:
        blocks = set()
        m = fam_mask
        while m:
            low = m & -m
            blocks.update(self.universe[low.bit_length() - 1])
            m ^= low
        return tuple(sorted(blocks, key=lambda b: sort_key((b,))))

    def min_covers(self, fam_mask: int, cap: int | None = None) -> CoverReport:
        if fam_mask == 0:
            raise PreconditionViolated("covering an empty family is ill-defined")
        cap = self.params.k if cap is None else min(cap, self.params.k)
        occ = self.family_blocks(fam_mask)
        for size in range(self.t, cap + 1):
            hits = []
            for combo in combinations(occ, size):
                merged = 0
                for b in combo:
                    if merged & b:
                        break
                    merged |= b
                else:
                    if fam_mask & ~self.covered_ids(combo) == 0:
                        hits.append(canonical(combo))
            if hits:
                return CoverReport(self.t, size, tuple(sorted(hits, key=sort_key)), cap)
        return CoverReport(self.t, None, (), cap)

    def tau(self, fam_mask: int, cap: int | None = None) -> int | None:
        return self.min_covers(fam_mask, cap).tau


# ---------------------------------------------------------------------------
# the shrinking inequality |F_S| <= C(k-s, i) |F_R|


@dataclass(frozen=True)
class ShrinkReport:
    s: int
    r: int
    i: int
    lhs: int
    rhs: int
    holds: bool
    vacuous: bool
    witness: Cover | None


def shrink_instance(members, cover: Partition, S, i: int, t: int, params: Params) -> ShrinkReport:
    """One instance of the cover-shrinking inequality.

    cover must be a full partition t-covering the family, S a partial
    partition meeting it in r < t blocks.  Grows S by i blocks of the
    cover into the best R and compares |F_S| against C(k-s, i)|F_R|.
    """
    members = tuple(members)
    if not is_t_cover(cover, members, t):
        raise PreconditionViolated("the chosen partition does not t-cover the family")
    s = len(S)
    r = common_blocks(cover, S)
    if r >= t:
        raise PreconditionViolated(f"need |cover cap S| < t, got {r}")
    if not 1 <= i <= t - r:
        raise PreconditionViolated(f"growth step i={i} outside 1..{t - r}")
    s_set = set(S)
    s_union = 0
    for b in S:
        s_union |= b
    f_s = [f for f in members if s_set <= set(f)]
    lhs = len(f_s)
    spare = [b for b in cover if b not in s_set and b & s_union == 0]
    best = -1
    witness = None
    for extra in combinations(spare, i):
        R = s_set | set(extra)
        size = sum(1 for f in members if R <= set(f))
        if size > best:
            best = size
            witness = canonical(R)
    if witness is None:
        # no way to grow S inside the cover; only the empty family obeys this
        return ShrinkReport(s, r, i, lhs, 0, lhs == 0, lhs == 0, None)
    rhs = comb(params.k - s, i) * best
    return ShrinkReport(s, r, i, lhs, rhs, lhs <= rhs, lhs == 0, witness)


# ---------------------------------------------------------------------------
# structure of minimum covers around one base point


def covers_cross_intersect(covers_f, covers_g, t: int) -> bool:
    """Do all pairs of minimum covers share >= t blocks (families' T-sets)?"""
    return all(common_blocks(a, b) >= t for a in covers_f for b in covers_g)


@dataclass(frozen=True)
class CoverUnionReport:
    base: Cover           # the t blocks pinned down
    union: Cover          # union of all minimum covers through the base
    m: int
    union_valid: bool     # union is itself a partial partition of m blocks
    m_in_range: bool      # t+1 <= m <= k-1
    covers_complete: bool  # covers through base = all base+one-union-block sets
    off_family_sizes_ok: bool  # |F cap union| = m-1 whenever base not in F


def cover_union_structure(
    members, covers, base, t: int, params: Params
) -> CoverUnionReport | None:
    """Check the cover-union picture at one t-block base, or None if no
    minimum cover passes through it.  Meaningful when tau = t+1."""
    base_set = set(base)
    through = [cv for cv in covers if base_set <= set(cv)]
    if not through:
        return None
    union_blocks = sorted({b for cv in through for b in cv}, key=lambda b: sort_key((b,)))
    merged = 0
    valid = True
    for b in union_blocks:
        if merged & b:
            valid = False
            break
        merged |= b
    m = len(union_blocks)
    expected = sorted(
        (canonical(base_set | {b}) for b in union_blocks if b not in base_set),
        key=sort_key,
    )
    got = sorted((canonical(cv) for cv in through), key=sort_key)
    sizes_ok = True
    ub_set = set(union_blocks)
    for f in members:
        if base_set <= set(f):
            continue
        if len(ub_set & set(f)) != m - 1:
            sizes_ok = False
            break
    return CoverUnionReport(
        base=canonical(base),
        union=tuple(union_blocks),
        m=m,
        union_valid=valid,
        m_in_range=t + 1 <= m <= params.k - 1,
        covers_complete=got == expected,
        off_family_sizes_ok=sizes_ok,
    )


def residual_family(members_f, covers_g) -> tuple[Partition, ...]:
    """Members of F containing no minimum cover of G."""
    cover_sets = [set(cv) for cv in covers_g]
    return tuple(
        f for f in members_f if not any(cs <= set(f) for cs in cover_sets)
    )


def residual_bound_fraction(c: int, k: int, t: int):
    """Exact cap on |residual| / theta(c,k,t+1) when both taus are t+1."""
    from fractions import Fraction

    return Fraction(3 * (t + 1) * (k - t - 1) ** 3, 2 * comb((k - t - 1) * c, c))
