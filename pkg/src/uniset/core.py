"""Ground set, blocks, uniform partitions, and exhaustive enumeration.

A partition of [ck] into k blocks of size c is stored as a tuple of k
bitmasks over ground-set indices 0..ck-1, ordered by smallest element.
Equality is then a tuple comparison, block intersection is a bitwise AND,
and a full (c,k) universe stays small enough to index densely.

External I/O renders elements 1-based; everything internal is 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import factorial

from .errors import CapExceeded, DomainError, InvalidPermutation, ParamsMismatch

MAX_GROUND_SET = 128
DEFAULT_ENUM_ELEMENT_CAP = 16
DEFAULT_ENUM_ITEM_CAP = 5_000_000


def universe_count(c: int, k: int) -> int:
    """Number of ways to split a ck-element set into k unordered c-blocks."""
    if c < 1 or k < 1:
        raise DomainError(f"need c >= 1 and k >= 1, got c={c}, k={k}")
    return factorial(c * k) // (factorial(c) ** k * factorial(k))


@dataclass(frozen=True)
class Params:
    """Block size c and block count k; the ground set is 0..c*k-1."""

    c: int
    k: int

    def __post_init__(self):
        if self.c < 1 or self.k < 1:
            raise DomainError(f"need c >= 1 and k >= 1, got c={self.c}, k={self.k}")
        if self.c * self.k > MAX_GROUND_SET:
            raise DomainError(
                f"ground set has {self.c * self.k} elements, limit is {MAX_GROUND_SET}"
            )

    @property
    def n(self) -> int:
        return self.c * self.k

    def check_t(self, t: int) -> int:
        """Validate an intersection threshold (1 <= t <= k)."""
        if not isinstance(t, int) or not 1 <= t <= self.k:
            raise DomainError(f"t must be an integer with 1 <= t <= {self.k}, got {t!r}")
        return t


# ---------------------------------------------------------------------------
# blocks and (partial) partitions as bitmasks


def block_of(elements) -> int:
    """Bitmask of an iterable of 0-based ground-set indices."""
    mask = 0
    for e in elements:
        mask |= 1 << e
    return mask


def elements_of(mask: int) -> tuple[int, ...]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return tuple(out)


def canonical(blocks) -> tuple[int, ...]:
    """Order disjoint blocks by their smallest element."""
    return tuple(sorted(blocks, key=lambda m: m & -m))


def sort_key(blocks) -> tuple[tuple[int, ...], ...]:
    """Lexicographic comparison key: blocks as ascending element tuples.

    Raw mask comparison would get this wrong ({1,4} encodes above {2,3}),
    so every ordering decision goes through element tuples.
    """
    return tuple(elements_of(b) for b in canonical(blocks))


def union_mask(blocks) -> int:
    u = 0
    for b in blocks:
        u |= b
    return u


def validate_partial(blocks, params: Params, expected_len: int | None = None) -> tuple[int, ...]:
    """Check pairwise disjointness and block sizes; return canonical form."""
    blocks = tuple(blocks)
    if expected_len is not None and len(blocks) != expected_len:
        raise DomainError(f"expected {expected_len} blocks, got {len(blocks)}")
    if len(blocks) > params.k:
        raise DomainError(f"{len(blocks)} blocks exceed k={params.k}")
    seen = 0
    for b in blocks:
        if b <= 0 or b.bit_count() != params.c:
            raise DomainError(f"block {elements_of(b)} does not have size c={params.c}")
        if b.bit_length() > params.n:
            raise DomainError(f"block {elements_of(b)} leaves the ground set 0..{params.n - 1}")
        if seen & b:
            raise DomainError("blocks are not pairwise disjoint")
        seen |= b
    return canonical(blocks)


def common_blocks(a, b) -> int:
    """How many blocks two (partial) partitions share, by bit-exact equality."""
    return len(set(a) & set(b))


def contains_blocks(p, s) -> bool:
    """True when every block of s is a block of p."""
    return set(s) <= set(p)


def apply_permutation(sigma, p, params: Params | None = None) -> tuple[int, ...]:
    """Image of a partition under a ground-set permutation, re-canonicalized.

    sigma is a sequence where sigma[i] is the image of element i.
    """
    n = len(sigma)
    if params is not None and n != params.n:
        raise ParamsMismatch(f"permutation acts on {n} points, ground set has {params.n}")
    if sorted(sigma) != list(range(n)):
        raise InvalidPermutation("not a bijection on 0..n-1")
    out = []
    for b in p:
        img = 0
        for e in elements_of(b):
            img |= 1 << sigma[e]
        out.append(img)
    return canonical(out)


# ---------------------------------------------------------------------------
# JSON rendering (1-based, ascending, matching the documented file formats)


def render_blocks(blocks) -> list[list[int]]:
    return [[e + 1 for e in elements_of(b)] for b in canonical(blocks)]


def parse_blocks(data, params: Params, expected_len: int | None = None) -> tuple[int, ...]:
    blocks = []
    for raw in data:
        elems = [int(e) - 1 for e in raw]
        if any(e < 0 or e >= params.n for e in elems):
            raise DomainError(f"element out of range 1..{params.n}: {raw}")
        if len(set(elems)) != len(elems):
            raise DomainError(f"repeated element in block {raw}")
        blocks.append(block_of(elems))
    return validate_partial(blocks, params, expected_len)


def render_partition(p) -> dict:
    return {"blocks": render_blocks(p)}


def parse_partition(obj, params: Params) -> tuple[int, ...]:
    p = parse_blocks(obj["blocks"], params, expected_len=params.k)
    if union_mask(p) != (1 << params.n) - 1:
        raise DomainError("blocks do not cover the ground set")
    return p


# ---------------------------------------------------------------------------
# the universe of all c-uniform partitions for one (c, k)


class PartitionUniverse:
    """Every c-uniform partition of [ck], canonically ordered and indexed.

    Immutable once built; ids are dense 0..count-1 in lectic order, so they
    are stable across runs and safe to share between threads.
    """

    def __init__(self, params: Params, items: list[tuple[int, ...]]):
        self.params = params
        self.items = items
        self.index: dict[tuple[int, ...], int] = {p: i for i, p in enumerate(items)}
        owners: dict[int, list[int]] = {}
        for i, p in enumerate(items):
            for b in p:
                owners.setdefault(b, []).append(i)
        self.block_owners = owners
        self._block_matrix = None

    def __len__(self) -> int:
        return len(self.items)

    def __getitem__(self, i: int) -> tuple[int, ...]:
        return self.items[i]

    def id_of(self, p) -> int:
        key = canonical(p)
        if key not in self.index:
            raise DomainError(f"not a partition of this universe: {render_blocks(key)}")
        return self.index[key]

    def containing(self, s) -> set[int]:
        """Ids of all partitions whose block set contains every block of s."""
        s = validate_partial(s, self.params)
        if not s:
            return set(range(len(self.items)))
        lists = []
        for b in s:
            if b not in self.block_owners:
                return set()
            lists.append(self.block_owners[b])
        lists.sort(key=len)
        ids = set(lists[0])
        for lst in lists[1:]:
            ids.intersection_update(lst)
        return ids

    def block_matrix(self):
        """(count, k) uint64 array of block masks; needs n <= 64."""
        if self._block_matrix is None:
            import numpy as np

            if self.params.n > 64:
                raise CapExceeded("block matrix requires a ground set of <= 64 elements")
            self._block_matrix = np.array(self.items, dtype=np.uint64)
        return self._block_matrix


def _emit_partitions(c: int, n: int, sink) -> None:
    """Recursive scheme: always place the block of the least uncovered element.

    Visits each partition exactly once, in lexicographic order of its
    canonical block list, so the output needs no sorting or deduplication.
    """
    full = (1 << n) - 1
    prefix: list[int] = []

    def rec(uncovered: int) -> None:
        if not uncovered:
            sink(tuple(prefix))
            return
        low = uncovered & -uncovered
        rest = elements_of(uncovered ^ low)
        low_bit = low
        for combo in combinations(rest, c - 1):
            mask = low_bit
            for e in combo:
                mask |= 1 << e
            prefix.append(mask)
            rec(uncovered & ~mask)
            prefix.pop()

    rec(full)


def enumerate_universe(
    params: Params,
    *,
    element_cap: int = DEFAULT_ENUM_ELEMENT_CAP,
    item_cap: int = DEFAULT_ENUM_ITEM_CAP,
    unsafe: bool = False,
) -> PartitionUniverse:
    """Materialize all c-uniform partitions of [ck] in canonical order."""
    predicted = universe_count(params.c, params.k)
    if not unsafe:
        if params.n > element_cap:
            raise CapExceeded(
                f"ground set of {params.n} elements exceeds enumeration cap {element_cap}"
            )
        if predicted > item_cap:
            raise CapExceeded(f"predicted {predicted} partitions exceed item cap {item_cap}")
    items: list[tuple[int, ...]] = []
    _emit_partitions(params.c, params.n, items.append)
    if len(items) != predicted:
        raise AssertionError(
            f"enumeration produced {len(items)} partitions, closed form says {predicted}"
        )
    return PartitionUniverse(params, items)
