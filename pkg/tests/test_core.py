"""Universe enumeration against an independent brute-force oracle."""

from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uniset.core import (
    DEFAULT_ENUM_ELEMENT_CAP,
    Params,
    apply_permutation,
    block_of,
    canonical,
    common_blocks,
    elements_of,
    enumerate_universe,
    parse_blocks,
    render_blocks,
    sort_key,
    universe_count,
)
from uniset.errors import CapExceeded, DomainError


def brute_partitions(c, k):
    """Reference enumeration: the least unplaced element picks its block.

    Deliberately different from the library's generator (sets instead of
    bit-walks) so the two can disagree.
    """
    out = []

    def rec(remaining, blocks):
        if not remaining:
            out.append(canonical(blocks))
            return
        first = min(remaining)
        rest = sorted(remaining - {first})
        for combo in combinations(rest, c - 1):
            blk = block_of((first, *combo))
            rec(remaining - {first} - set(combo), blocks + [blk])

    rec(set(range(c * k)), [])
    return out


@pytest.mark.parametrize(
    "c,k,expect",
    [(2, 2, 3), (2, 3, 15), (2, 4, 105), (2, 5, 945), (3, 3, 280), (1, 4, 1), (4, 1, 1)],
)
def test_universe_count_closed_form(c, k, expect):
    assert universe_count(c, k) == expect


@pytest.mark.parametrize("c,k", [(2, 2), (3, 2), (2, 3), (2, 4), (3, 3)])
def test_enumeration_matches_bruteforce(c, k):
    got = list(enumerate_universe(Params(c, k)))
    ref = brute_partitions(c, k)
    assert len(got) == len(ref) == universe_count(c, k)
    assert set(got) == set(ref)


def test_canonical_order_and_uniqueness(u24):
    items = list(u24)
    assert len(set(items)) == len(items)
    assert items == sorted(items, key=sort_key)
    for f in items:
        assert f == canonical(f)
        assert sum(b.bit_count() for b in f) == 8
        merged = 0
        for b in f:
            assert merged & b == 0
            merged |= b


def test_render_parse_roundtrip(u23):
    p = u23.params
    for f in u23:
        rendered = render_blocks(f)
        assert parse_blocks(rendered, p, expected_len=p.k) == f
    # 1-based rendering
    assert render_blocks(u23[0])[0][0] == 1


def test_parse_rejects_garbage(u23):
    p = u23.params
    with pytest.raises(DomainError):
        parse_blocks([[1, 2], [2, 3], [5, 6]], p)  # overlap
    with pytest.raises(DomainError):
        parse_blocks([[1, 2], [3, 4]], p, expected_len=3)
    with pytest.raises(DomainError):
        parse_blocks([[0, 1], [2, 3], [4, 5]], p)  # 0 is out of range


def test_id_of_roundtrip(u33):
    for i in range(0, len(u33), 17):
        assert u33.id_of(u33[i]) == i
    with pytest.raises(DomainError):
        u33.id_of((1, 2, 4))


@settings(max_examples=20, deadline=None)
@given(st.permutations(tuple(range(6))))
def test_permutation_invariance(sigma):
    u = enumerate_universe(Params(2, 3))
    members = set(u)
    for f in u:
        assert apply_permutation(sigma, f) in members


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**8 - 1))
def test_block_mask_roundtrip(mask):
    assert block_of(elements_of(mask)) == mask


def test_common_blocks_counts():
    a = (block_of((0, 1)), block_of((2, 3)), block_of((4, 5)))
    b = (block_of((0, 1)), block_of((2, 4)), block_of((3, 5)))
    assert common_blocks(a, b) == 1
    assert common_blocks(a, a) == 3


def test_enumeration_caps():
    with pytest.raises(CapExceeded):
        enumerate_universe(Params(2, 9))  # 18 > default element cap
    with pytest.raises(CapExceeded):
        enumerate_universe(Params(2, 4), item_cap=10)
    # unsafe lifts both guards
    u = enumerate_universe(Params(2, 3), element_cap=4, unsafe=True)
    assert len(u) == 15
    assert DEFAULT_ENUM_ELEMENT_CAP == 16


def test_params_validation():
    with pytest.raises(DomainError):
        Params(0, 3)
    with pytest.raises(DomainError):
        Params(2, 70)  # 140 elements > ground-set limit
    p = Params(2, 3)
    assert p.check_t(2) == 2
    for bad in (0, -1, 4, 1.5):
        with pytest.raises(DomainError):
            p.check_t(bad)


def test_block_matrix_agrees_with_masks(u23):
    mat = u23.block_matrix()
    assert mat.shape == (15, 3)
    for i, f in enumerate(u23):
        assert tuple(int(x) for x in mat[i]) == f
