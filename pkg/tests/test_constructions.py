"""Catalogued families: sizes, cross-intersection, JSON round-trips, samplers."""

import random

import pytest

from uniset.constructions import (
    KINDS,
    build_sporadic_pair,
    default_spec,
    exhaust_sporadic,
    family_members,
    family_predicate,
    is_cross_t_intersecting,
    make_spec,
    partner_spec,
    predicted_size,
    sample_member,
    sampled_cross_check,
    spec_from_json,
    spec_from_json_dict,
)
from uniset.core import Params, block_of, render_blocks
from uniset.counting import f1, f2, n_class_counts, theta
from uniset.errors import (
    DomainError,
    InfeasibleConstruction,
    PreconditionViolated,
)


def blocks_text(p):
    return "|".join(",".join(map(str, b)) for b in render_blocks(p))


DEFAULT_POINTS = {
    "singleton": (2, 4, 1),
    "star": (2, 4, 1),
    "ball": (2, 4, 1),
    "N1": (2, 4, 1),
    "N2": (2, 4, 1),
    "N3": (2, 4, 1),
    "C51": (3, 3, 1),
    "C52": (2, 3, 1),
    "C53": (2, 4, 2),
}


def test_default_specs_build_for_every_kind():
    for kind in KINDS:
        spec = default_spec(kind, *DEFAULT_POINTS[kind])
        assert spec.kind == kind


def test_spec_json_roundtrip():
    for kind in KINDS:
        spec = default_spec(kind, *DEFAULT_POINTS[kind])
        assert spec_from_json(spec.to_json()) == spec


def test_json_dict_rejects_unknown_anchor():
    with pytest.raises(DomainError):
        spec_from_json_dict(
            {"kind": "star", "c": 2, "k": 3, "t": 1, "T": [[1, 2]], "X": 1}
        )
    with pytest.raises(DomainError):
        spec_from_json_dict({"kind": "star", "c": 2, "k": 3})  # missing t


SIZE_POINTS = [(2, 4, 1), (2, 5, 1)]


def test_sizes_match_enumeration(u24, u25):
    universes = {(2, 4): u24, (2, 5): u25}
    for c, k, t in SIZE_POINTS:
        u = universes[(c, k)]
        for kind in ("singleton", "star", "ball", "N1", "N2", "N3"):
            spec = default_spec(kind, c, k, t)
            assert len(family_members(spec, u)) == predicted_size(spec), (kind, c, k)


def test_predicted_size_formulas():
    assert predicted_size(default_spec("star", 2, 4, 1)) == theta(2, 4, 1)
    assert predicted_size(default_spec("N1", 2, 4, 1)) == f1(2, 4, 1)
    assert predicted_size(default_spec("N2", 2, 4, 1)) == f2(2, 4, 1)
    assert predicted_size(default_spec("ball", 2, 4, 1)) == sum(n_class_counts(2, 4)[1:])
    assert predicted_size(default_spec("N3", 2, 5, 1)) == 3 * theta(2, 5, 2) - 2 * theta(2, 5, 3)


def test_every_kind_cross_intersects_its_partner(u24, u23):
    for kind in ("singleton", "star", "ball", "N1", "N2", "N3"):
        spec = default_spec(kind, 2, 4, 1)
        mf = family_members(spec, u24)
        mg = family_members(partner_spec(spec), u24)
        assert is_cross_t_intersecting(mf, mg, 1), kind
    for kind in ("C51", "C52"):
        c, k, t = DEFAULT_POINTS[kind]
        fam_f, fam_g = build_sporadic_pair(default_spec(kind, c, k, t))
        assert is_cross_t_intersecting(fam_f, fam_g, t), kind


def test_partner_is_an_involution():
    for kind in KINDS:
        spec = default_spec(kind, *DEFAULT_POINTS[kind])
        assert partner_spec(partner_spec(spec)) == spec
    # singleton <-> ball swap
    s = default_spec("singleton", 2, 4, 1)
    assert partner_spec(s).kind == "ball"


def test_predicate_agrees_with_members(u24):
    for kind in ("singleton", "star", "ball", "N1", "N2", "N3"):
        spec = default_spec(kind, 2, 4, 1)
        pred = family_predicate(spec)
        members = set(family_members(spec, u24))
        for f in u24:
            assert pred(f) == (f in members), (kind, blocks_text(f))


# ---------------------------------------------------------------------------
# the k = t+2 sporadic pairs


def test_c52_hand_pair():
    # E = 12|34|56, u = {3,5}, v = {2,6} gives the classic pair of triples
    p = Params(2, 3)
    E = (block_of((0, 1)), block_of((2, 3)), block_of((4, 5)))
    spec = make_spec("C52", 2, 3, 1, E=E, u=block_of((2, 4)), v=block_of((1, 5)))
    fam_f, fam_g = build_sporadic_pair(spec)
    assert sorted(blocks_text(f) for f in fam_f) == [
        "1,2|3,4|5,6", "1,4|2,6|3,5", "1,5|2,3|4,6",
    ]
    assert sorted(blocks_text(g) for g in fam_g) == [
        "1,2|3,5|4,6", "1,4|2,3|5,6", "1,5|2,6|3,4",
    ]
    assert is_cross_t_intersecting(fam_f, fam_g, 1)
    # neither family is a star on its own pair side
    assert not is_cross_t_intersecting(fam_f, fam_f, 1)


def test_c5_side_anchor_orients_the_pair():
    spec = default_spec("C52", 2, 3, 1)
    partner = partner_spec(spec)
    assert spec.anchor("side") == "F" and partner.anchor("side") == "G"
    pair = build_sporadic_pair(spec)
    u = None  # family_members only consults the universe for non-sporadic kinds
    assert family_members(spec, u) == pair[0]
    assert family_members(partner, u) == pair[1]
    assert family_members(spec, u) != family_members(partner, u)


def test_c51_feasibility_depends_on_c(u23, u33):
    assert exhaust_sporadic("C51", Params(2, 3), 1, u23) == []
    specs = exhaust_sporadic("C51", Params(3, 3), 1, u33)
    assert specs
    fam_f, fam_g = build_sporadic_pair(specs[0])
    assert len(fam_f) == len(fam_g) == 2
    assert is_cross_t_intersecting(fam_f, fam_g, 1)


def test_c52_exhaustive_count(u23):
    # every C52 pair at (2,3,1), counted as unordered family pairs
    pairs = set()
    for spec in exhaust_sporadic("C52", Params(2, 3), 1, u23):
        fam_f, fam_g = build_sporadic_pair(spec)
        pairs.add(frozenset((fam_f, fam_g)))
    assert len(pairs) == 10


def test_sporadic_anchor_validation():
    p = Params(2, 3)
    E = (block_of((0, 1)), block_of((2, 3)), block_of((4, 5)))
    # u equal to an anchor block is degenerate
    with pytest.raises(InfeasibleConstruction):
        build_sporadic_pair(
            make_spec("C52", 2, 3, 1, E=E, u=block_of((2, 3)), v=block_of((1, 5)))
        )
    # u and v must be disjoint
    with pytest.raises(InfeasibleConstruction):
        build_sporadic_pair(
            make_spec("C52", 2, 3, 1, E=E, u=block_of((2, 4)), v=block_of((4, 5)))
        )
    # C51 needs the last block to escape u|v; impossible at c = 2
    with pytest.raises(InfeasibleConstruction):
        build_sporadic_pair(
            make_spec("C51", 2, 3, 1, E=E, u=block_of((2, 4)), v=block_of((1, 5)))
        )


def test_make_spec_validation():
    with pytest.raises(DomainError):
        make_spec("frame", 2, 4, 1)
    with pytest.raises((DomainError, PreconditionViolated)):
        make_spec("star", 2, 4, 1, T=(block_of((0, 1, 2)),))  # wrong block size
    with pytest.raises((DomainError, PreconditionViolated)):
        make_spec("N3", 2, 4, 2, A1=(3, 12), A2=(48, 192), C=(3, 192))  # t must be 1


def test_n1_wants_k_at_least_t_plus_3():
    with pytest.raises(PreconditionViolated):
        default_spec("N1", 2, 3, 1)
    with pytest.raises(PreconditionViolated):
        default_spec("N2", 2, 3, 1)


def test_n1_degenerate_edge(u25):
    # at k = t+3 with t >= 2 the M anchor is forced onto L
    spec = default_spec("N1", 2, 5, 2)
    assert spec.anchor("M") == spec.anchor("L")
    members = family_members(spec, u25)
    assert len(members) == f1(2, 5, 2) == 9
    partner = family_members(partner_spec(spec), u25)
    assert is_cross_t_intersecting(members, partner, 2)


def test_n3_partner_swaps_the_trio(u25):
    spec = default_spec("N3", 2, 5, 1)
    other = partner_spec(spec)
    mf = family_members(spec, u25)
    mg = family_members(other, u25)
    assert len(mf) == len(mg) == predicted_size(spec)
    assert is_cross_t_intersecting(mf, mg, 1)
    assert set(mf) != set(mg)


# ---------------------------------------------------------------------------
# samplers


def test_sample_member_satisfies_predicate():
    rng = random.Random(11)
    for kind in ("star", "ball", "N1", "N2"):
        spec = default_spec(kind, 2, 6, 1)
        pred = family_predicate(spec)
        for _ in range(50):
            assert pred(sample_member(spec, rng))


def test_sampled_cross_check_clean_and_dirty():
    rng = random.Random(5)
    spec = default_spec("N1", 2, 6, 1)
    assert sampled_cross_check(spec, partner_spec(spec), 300, rng) == 0
    # two disjoint stars violate immediately
    p = Params(2, 6)
    a = make_spec("star", 2, 6, 1, T=(block_of((0, 1)),))
    b = make_spec("star", 2, 6, 1, T=(block_of((2, 3)),))
    assert sampled_cross_check(a, b, 50, rng) > 0
