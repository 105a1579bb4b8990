"""Named cross-intersecting family constructions and their anchor specs.

A FamilySpec pins down one family extensionally (kind + anchor blocks), so
families can round-trip through JSON, be rebuilt on any machine, and be
compared against search output.  Kinds:

- singleton / ball: one fixed partition, or everything within shared-block
  distance (>= t common blocks) of it.
- star: everything containing a fixed set of t blocks.
- N1 / N2 / N3: the three near-extremal families used for the
  second-largest product bounds (anchored on t blocks plus one or two
  almost-complete partial partitions, a (t+2)-block frame, and a trio of
  block pairs respectively).
- C51 / C52 / C53: the sporadic 2x2, 3x3 and 2x2 pairs that exist only at
  k = t+2, built from one base partition and two crossing blocks.

Anchors are stored as bitmask blocks in spec.anchors; JSON uses 1-based
element lists, same as everywhere else.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from typing import Any, Callable, Iterable, Mapping

from .core import (
    Params,
    block_of,
    canonical,
    common_blocks,
    elements_of,
    render_blocks,
    parse_blocks,
    sort_key,
    union_mask,
    validate_partial,
)
from .counting import f1, f2, n_class_counts, theta
from .errors import (
    DomainError,
    EmptyFamily,
    InfeasibleConstruction,
    PreconditionViolated,
)

Partition = tuple[int, ...]

KINDS = ("singleton", "star", "ball", "N1", "N2", "N3", "C51", "C52", "C53")

_BLOCKS_KEYS = ("T", "L", "M", "Z", "A1", "A2", "C", "E", "center")
_BLOCK_KEYS = ("u", "v")

_REQUIRED = {
    "singleton": ("center",),
    "ball": ("center",),
    "star": ("T",),
    "N1": ("T", "L", "M"),
    "N2": ("Z",),
    "N3": ("A1", "A2", "C"),
    "C51": ("E", "u", "v", "side"),
    "C52": ("E", "u", "v", "side"),
    "C53": ("E", "u", "v", "side"),
}


@dataclass(frozen=True)
class FamilySpec:
    kind: str
    c: int
    k: int
    t: int
    anchors: tuple[tuple[str, Any], ...]

    @property
    def params(self) -> Params:
        return Params(self.c, self.k)

    def anchor(self, key: str) -> Any:
        for k, v in self.anchors:
            if k == key:
                return v
        raise KeyError(key)

    def to_json_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind, "c": self.c, "k": self.k, "t": self.t}
        for key, val in self.anchors:
            if key == "E":
                # E is role-ordered; do not canonicalize
                out[key] = [sorted(e + 1 for e in elements_of(b)) for b in val]
            elif key in _BLOCKS_KEYS:
                out[key] = render_blocks(val)
            elif key in _BLOCK_KEYS:
                out[key] = render_blocks((val,))[0]
            else:
                out[key] = val
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def make_spec(kind: str, c: int, k: int, t: int, **anchors: Any) -> FamilySpec:
    """Build and validate a FamilySpec from bitmask anchors."""
    if kind not in KINDS:
        raise DomainError(f"unknown family kind {kind!r}")
    if kind.startswith("C5") and "side" not in anchors:
        anchors["side"] = "F"
    items = tuple(sorted(anchors.items()))
    spec = FamilySpec(kind, c, k, t, items)
    validate_spec(spec)
    return spec


def spec_from_json_dict(data: Mapping[str, Any]) -> FamilySpec:
    got = dict(data)
    try:
        kind = got.pop("kind")
        c = int(got.pop("c"))
        k = int(got.pop("k"))
        t = int(got.pop("t"))
    except KeyError as exc:
        raise DomainError(f"family spec is missing {exc.args[0]!r}") from None
    p = Params(c, k)
    anchors: dict[str, Any] = {}
    for key, val in got.items():
        if key == "E":
            masks = tuple(block_of(int(e) - 1 for e in raw) for raw in val)
            validate_partial(masks, p)
            anchors[key] = masks
        elif key in _BLOCKS_KEYS:
            anchors[key] = parse_blocks(val, p)
        elif key in _BLOCK_KEYS:
            anchors[key] = parse_blocks([val], p)[0]
        elif key == "side":
            anchors[key] = str(val)
        else:
            raise DomainError(f"unknown anchor key {key!r}")
    return make_spec(kind, c, k, t, **anchors)


def spec_from_json(text: str) -> FamilySpec:
    return spec_from_json_dict(json.loads(text))


# ---------------------------------------------------------------------------
# validation


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise PreconditionViolated(msg)


def validate_spec(spec: FamilySpec) -> None:
    p = spec.params
    p.check_t(spec.t)
    keys = {k for k, _ in spec.anchors}
    missing = set(_REQUIRED[spec.kind]) - keys
    extra = keys - set(_REQUIRED[spec.kind])
    if missing or extra:
        raise DomainError(
            f"{spec.kind} anchors: missing {sorted(missing)}, unexpected {sorted(extra)}"
        )
    kind, t, k = spec.kind, spec.t, spec.k
    if kind in ("singleton", "ball"):
        validate_partial(spec.anchor("center"), p, expected_len=k)
    elif kind == "star":
        validate_partial(spec.anchor("T"), p, expected_len=t)
    elif kind == "N2":
        _require(k >= t + 3, "frame family wants k >= t+3")
        validate_partial(spec.anchor("Z"), p, expected_len=t + 2)
    elif kind == "N1":
        _require(k >= t + 3, "two-sided near-star family wants k >= t+3")
        T, L, M = spec.anchor("T"), spec.anchor("L"), spec.anchor("M")
        validate_partial(T, p, expected_len=t)
        validate_partial(L, p, expected_len=k - 1)
        validate_partial(M, p, expected_len=k - 1)
        _require(set(T) <= set(L) and set(T) <= set(M), "T must lie in both L and M")
        need = t + min(t, 2)
        _require(len(set(L) & set(M)) >= need, f"|L cap M| must be >= {need}")
    elif kind == "N3":
        _require(t == 1, "pair-trio family is a t=1 construction")
        _require(k >= 4, "pair-trio family wants k >= 4")
        a1, a2, cc = spec.anchor("A1"), spec.anchor("A2"), spec.anchor("C")
        for pair in (a1, a2, cc):
            validate_partial(pair, p, expected_len=2)
        e1, e2, e3, e4 = _n3_blocks(spec)
        # every anchored pair and both partner pairs must be disjoint
        for x, y in ((e1, e3), (e2, e4)):
            _require(x & y == 0, "partner pairs must also be disjoint")
    else:  # C51 / C52 / C53
        _require(k == t + 2, "sporadic pairs exist only at k = t+2")
        _require(spec.anchor("side") in ("F", "G"), "side must be 'F' or 'G'")
        if kind == "C53":
            _require(t >= 2, "the doubly-split sporadic pair wants t >= 2")
        build_sporadic_pair(spec)  # raises if the anchors are unusable


def _n3_blocks(spec: FamilySpec) -> tuple[int, int, int, int]:
    """Recover the four blocks (shared, A1-only, A2-only's mate order)."""
    a1, a2, cc = spec.anchor("A1"), spec.anchor("A2"), spec.anchor("C")
    c0, c1 = cc
    if c0 in a2 or c1 in a1:
        c0, c1 = c1, c0
    if c0 not in a1 or c1 not in a2:
        raise PreconditionViolated("C must take one block from A1 and one from A2")
    e1, e4 = c0, c1
    e2 = a1[0] if a1[1] == e1 else a1[1]
    e3 = a2[0] if a2[1] == e4 else a2[1]
    return e1, e2, e3, e4


# ---------------------------------------------------------------------------
# membership predicates and closed-form sizes


def family_predicate(spec: FamilySpec) -> Callable[[Partition], bool]:
    kind, t = spec.kind, spec.t
    if kind == "singleton":
        center = tuple(canonical(spec.anchor("center")))
        return lambda f: tuple(f) == center
    if kind == "ball":
        center = spec.anchor("center")
        return lambda f: common_blocks(f, center) >= t
    if kind == "star":
        T = set(spec.anchor("T"))
        return lambda f: T <= set(f)
    if kind == "N2":
        Z = set(spec.anchor("Z"))
        return lambda f: len(Z & set(f)) >= t + 1
    if kind == "N1":
        T = set(spec.anchor("T"))
        L = set(spec.anchor("L"))
        M = set(spec.anchor("M"))
        k = spec.k

        def in_n1(f: Partition) -> bool:
            fs = set(f)
            if T <= fs:
                return len(L & fs) >= t + 1
            return len(M & fs) == k - 2

        return in_n1
    if kind == "N3":
        a1 = set(spec.anchor("A1"))
        a2 = set(spec.anchor("A2"))
        cc = set(spec.anchor("C"))

        def in_n3(f: Partition) -> bool:
            fs = set(f)
            return a1 <= fs or a2 <= fs or cc <= fs

        return in_n3
    members = set(build_sporadic_pair(spec)[0 if spec.anchor("side") == "F" else 1])
    return lambda f: tuple(canonical(f)) in members


def predicted_size(spec: FamilySpec) -> int:
    """Closed-form family size (every kind here has one)."""
    c, k, t = spec.c, spec.k, spec.t
    kind = spec.kind
    if kind == "singleton":
        return 1
    if kind == "ball":
        return sum(n_class_counts(c, k)[t:])
    if kind == "star":
        return theta(c, k, t)
    if kind == "N1":
        return f1(c, k, t)
    if kind == "N2":
        return f2(c, k, t)
    if kind == "N3":
        return 3 * theta(c, k, 2) - 2 * theta(c, k, 3)
    return 3 if kind == "C52" else 2


def family_members(spec: FamilySpec, universe) -> tuple[Partition, ...]:
    """Materialize the family over an enumerated universe, sorted."""
    if spec.kind.startswith("C5"):
        # build_sporadic_pair already orients by the side anchor
        return build_sporadic_pair(spec)[0]
    pred = family_predicate(spec)
    members = tuple(f for f in universe if pred(f))
    if not members:
        raise EmptyFamily(f"{spec.kind} family came out empty")
    return members


def partner_spec(spec: FamilySpec) -> FamilySpec:
    """The canonical cross-intersecting partner family."""
    kind = spec.kind
    anchors = dict(spec.anchors)
    if kind == "singleton":
        return make_spec("ball", spec.c, spec.k, spec.t, **anchors)
    if kind == "ball":
        return make_spec("singleton", spec.c, spec.k, spec.t, **anchors)
    if kind in ("star", "N2"):
        return spec
    if kind == "N1":
        anchors["L"], anchors["M"] = anchors["M"], anchors["L"]
        return make_spec(kind, spec.c, spec.k, spec.t, **anchors)
    if kind == "N3":
        e1, e2, e3, e4 = _n3_blocks(spec)
        return make_spec(
            kind, spec.c, spec.k, spec.t,
            A1=(e1, e3), A2=(e2, e4), C=(e1, e4),
        )
    anchors["side"] = "G" if spec.anchor("side") == "F" else "F"
    return make_spec(kind, spec.c, spec.k, spec.t, **anchors)


# ---------------------------------------------------------------------------
# sporadic pairs at k = t+2


def build_sporadic_pair(
    spec: FamilySpec,
) -> tuple[tuple[Partition, ...], tuple[Partition, ...]]:
    """Both sides of a C51/C52/C53 pair, or raise InfeasibleConstruction.

    Anchor roles: E is the ordered base partition.  For C51/C52, u replaces
    the next-to-last block (drawn from the union of the last two) and v
    replaces the last (drawn from the union of first and last); C51 needs
    the last block to stick out of u|v, C52 needs it swallowed.  For C53,
    u splits the union of the first two blocks and v the union of the last
    two.  Every derived block is forced by complementation.
    """
    c, k, t = spec.c, spec.k, spec.t
    p = spec.params
    E = spec.anchor("E")
    u, v = spec.anchor("u"), spec.anchor("v")
    validate_partial(E, p, expected_len=k)
    e1, e_t1, e_t2 = E[0], E[t], E[t + 1]
    mid = list(E[1:t])

    def chk(cond: bool, msg: str) -> None:
        if not cond:
            raise InfeasibleConstruction(msg)

    if spec.kind == "C53":
        e2 = E[1]
        chk(u.bit_count() == c and u & ~(e1 | e2) == 0, "u must be a c-block inside the first two")
        chk(v.bit_count() == c and v & ~(e_t1 | e_t2) == 0, "v must be a c-block inside the last two")
        chk(u not in (e1, e2), "u must split the first two blocks")
        chk(v not in (e_t1, e_t2), "v must split the last two blocks")
        u2 = (e1 | e2) & ~u
        v2 = (e_t1 | e_t2) & ~v
        tail = list(E[2:t])
        fam_f = (tuple(E), canonical([u, u2, *tail, v, v2]))
        fam_g = (
            canonical([*E[:t], v, v2]),
            canonical([u, u2, *E[2:]]),
        )
    else:
        chk(u.bit_count() == c and u & ~(e_t1 | e_t2) == 0, "u must be a c-block inside the last two")
        chk(v.bit_count() == c and v & ~(e1 | e_t2) == 0, "v must be a c-block inside first+last")
        chk(u not in (e_t1, e_t2), "u must split the last two blocks")
        chk(v not in (e1, e_t2), "v must split first+last")
        chk(u & v == 0, "u and v must be disjoint")
        swallowed = e_t2 & ~(u | v) == 0
        if spec.kind == "C51":
            chk(not swallowed, "last block must not be covered by u|v")
        else:
            chk(swallowed, "last block must be covered by u|v")
        triple = e1 | e_t1 | e_t2
        w = (e_t1 | e_t2) & ~u          # leftover of the last two after u
        x = (e1 | e_t2) & ~v            # leftover of first+last after v
        y = triple & ~(u | v)           # completes {u, v} inside the triple
        fam_f_list = [tuple(E), canonical([y, *mid, u, v])]
        fam_g_list = [canonical([*E[:t], u, w]), canonical([x, *mid, e_t1, v])]
        if spec.kind == "C52":
            z = triple & ~(x | w)       # completes {x, w} inside the triple
            fam_f_list.append(canonical([x, *mid, z, w]))
            fam_g_list.append(canonical([y, *mid, z, e_t2]))
        fam_f = tuple(fam_f_list)
        fam_g = tuple(fam_g_list)
    fam_f = tuple(canonical(f) for f in fam_f)
    fam_g = tuple(canonical(g) for g in fam_g)
    for fam in (fam_f, fam_g):
        for member in fam:
            validate_partial(member, p, expected_len=k)
        chk(len(set(fam)) == len(fam), "members collapsed; anchors degenerate")
    chk(
        is_cross_t_intersecting(fam_f, fam_g, t),
        "built pair is not cross-t-intersecting",
    )
    fam_f = tuple(sorted(fam_f, key=sort_key))
    fam_g = tuple(sorted(fam_g, key=sort_key))
    if spec.anchor("side") == "G":
        return fam_g, fam_f
    return fam_f, fam_g


def sporadic_anchor_choices(
    kind: str, params: Params, t: int, E: tuple[int, ...]
) -> Iterable[tuple[int, int]]:
    """All (u, v) draws for a fixed ordered base, lexicographic order."""
    c = params.c
    e1, e_t1, e_t2 = E[0], E[t], E[t + 1]
    if kind == "C53":
        pool_u, skip_u = elements_of(E[0] | E[1]), (E[0], E[1])
    else:
        pool_u, skip_u = elements_of(e_t1 | e_t2), (e_t1, e_t2)
    pool_v, skip_v = (
        (elements_of(e_t1 | e_t2), (e_t1, e_t2))
        if kind == "C53"
        else (elements_of(e1 | e_t2), (e1, e_t2))
    )
    for eu in combinations(pool_u, c):
        u = block_of(eu)
        if u in skip_u:
            continue
        for ev in combinations(pool_v, c):
            v = block_of(ev)
            if v not in skip_v:
                yield u, v


def exhaust_sporadic(kind: str, params: Params, t: int, universe) -> list[FamilySpec]:
    """Every feasible spec of this kind over the whole universe.

    Iterates all ordered bases (each partition in every block order whose
    distinguished roles differ) and all (u, v) draws, so an empty result is
    an exhaustive infeasibility proof at these parameters.
    """
    from itertools import permutations

    out = []
    seen = set()
    for base in universe:
        for perm in permutations(range(params.k)):
            E = tuple(base[i] for i in perm)
            for u, v in sporadic_anchor_choices(kind, params, t, E):
                try:
                    spec = make_spec(kind, params.c, params.k, t, E=E, u=u, v=v, side="F")
                    pair = build_sporadic_pair(spec)
                except InfeasibleConstruction:
                    continue
                key = (frozenset(pair[0]), frozenset(pair[1]))
                if key not in seen:
                    seen.add(key)
                    out.append(spec)
    return out


# ---------------------------------------------------------------------------
# default anchors


def base_partition(params: Params) -> Partition:
    """Blocks {1..c}, {c+1..2c}, ... as masks (0-indexed internally)."""
    c = params.c
    return tuple(block_of(range(i * c, (i + 1) * c)) for i in range(params.k))


def default_spec(kind: str, c: int, k: int, t: int) -> FamilySpec:
    """A canonical spec of the given kind on the standard base partition."""
    p = Params(c, k)
    E = base_partition(p)
    if kind in ("singleton", "ball"):
        return make_spec(kind, c, k, t, center=E)
    if kind == "star":
        return make_spec(kind, c, k, t, T=E[:t])
    if kind == "N2":
        return make_spec(kind, c, k, t, Z=E[: t + 2])
    if kind == "N1":
        L = E[: k - 1]
        if k - 2 >= t + min(t, 2):
            last = sorted(elements_of(E[k - 2]))
            first_of_next = min(elements_of(E[k - 1]))
            swapped = block_of(last[:-1] + [first_of_next])
            M = E[: k - 2] + (swapped,)
        else:
            M = L  # forced when k = t+3 and t >= 2
        return make_spec(kind, c, k, t, T=E[:t], L=L, M=M)
    if kind == "N3":
        return make_spec(kind, c, k, t, A1=E[:2], A2=E[2:4], C=(E[0], E[3]))
    for u, v in sporadic_anchor_choices(kind, p, t, E):
        try:
            return make_spec(kind, c, k, t, E=E, u=u, v=v, side="F")
        except InfeasibleConstruction:
            continue
    raise InfeasibleConstruction(
        f"no feasible anchors for {kind} at c={c}, k={k}, t={t}"
    )


# ---------------------------------------------------------------------------
# cross-intersection checks and member sampling


def is_cross_t_intersecting(
    fam_f: Iterable[Partition], fam_g: Iterable[Partition], t: int
) -> bool:
    fam_g = list(fam_g)
    return all(common_blocks(f, g) >= t for f in fam_f for g in fam_g)


def _random_completion(fixed: list[int], params: Params, rng) -> Partition:
    """Fill the uncovered elements with random c-blocks."""
    left = [e for e in range(params.n) if not union_mask(fixed) >> e & 1]
    rng.shuffle(left)
    c = params.c
    blocks = list(fixed) + [
        block_of(left[i : i + c]) for i in range(0, len(left), c)
    ]
    return canonical(blocks)


def sample_member(spec: FamilySpec, rng, max_tries: int = 1000) -> Partition:
    """A random member (not uniform; hits every structural branch)."""
    p = spec.params
    kind, t, k = spec.kind, spec.t, spec.k
    pred = family_predicate(spec)
    for _ in range(max_tries):
        if kind == "singleton":
            cand = canonical(spec.anchor("center"))
        elif kind == "ball":
            keep = rng.sample(list(spec.anchor("center")), t)
            cand = _random_completion(keep, p, rng)
        elif kind == "star":
            cand = _random_completion(list(spec.anchor("T")), p, rng)
        elif kind == "N2":
            keep = rng.sample(list(spec.anchor("Z")), t + 1)
            cand = _random_completion(keep, p, rng)
        elif kind == "N3":
            which = rng.choice(("A1", "A2", "C"))
            cand = _random_completion(list(spec.anchor(which)), p, rng)
        elif kind == "N1":
            T = list(spec.anchor("T"))
            L = list(spec.anchor("L"))
            M = list(spec.anchor("M"))
            if rng.random() < 0.5:
                extra = rng.choice([b for b in L if b not in T])
                cand = _random_completion(T + [extra], p, rng)
            else:
                drop = rng.choice([b for b in M if b in T])
                cand = _random_completion([b for b in M if b != drop], p, rng)
        else:
            side = build_sporadic_pair(spec)[0 if spec.anchor("side") == "F" else 1]
            cand = rng.choice(list(side))
        if pred(cand):
            return cand
    raise InfeasibleConstruction(f"sampler for {spec.kind} kept missing the family")


def sampled_cross_check(
    spec_f: FamilySpec, spec_g: FamilySpec, n_pairs: int, rng
) -> int:
    """Number of sampled member pairs sharing fewer than t blocks."""
    t = spec_f.t
    bad = 0
    for _ in range(n_pairs):
        f = sample_member(spec_f, rng)
        g = sample_member(spec_g, rng)
        if common_blocks(f, g) < t:
            bad += 1
    return bad
