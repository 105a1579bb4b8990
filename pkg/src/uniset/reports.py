"""Theorem- and suite-level verification runs with serializable verdicts.

Every run produces a Report: a list of Checks, each carrying a verdict
from {confirmed, refuted, inconclusive, exploratory} plus the observed
and expected values as decimal strings.  "refuted" is reserved for exact
or certified contradictions of a claim *within its stated hypotheses* and
always embeds a counterexample; the same mismatch outside the hypotheses
is "exploratory" (the claim says nothing there, the observation is still
recorded).  "inconclusive" marks runs whose search lost its completeness
certificate.  JSON output is deterministic: keys sorted, scalars as
strings, no timing fields unless explicitly requested.
"""

from __future__ import annotations

import csv
import io
import json
import random
from dataclasses import dataclass, field
from itertools import combinations
from math import comb

from .cache import get_or_build
from .constructions import (
    default_spec,
    exhaust_sporadic,
    family_members,
    partner_spec,
    sample_member,
)
from .core import Params, common_blocks, universe_count
from .counting import (
    LEMMA_IDS,
    _side_condition_strong,
    _side_condition_weak,
    exact_overlap_counts,
    f1,
    f2,
    f2_by_inclusion_exclusion,
    layer_counts,
    n_class_counts,
    theta,
    verify_inequality_grid,
    verify_theta_class_identity,
)
from .errors import CapExceeded, DomainError
from .search import (
    DEFAULT_CONCEPT_CAP,
    CrossContext,
    classify_pair,
    concept_stream,
    constraint_admit,
    exhaustive_concepts,
    mask_ids,
    optimize,
    orient_pair,
)

SCHEMA = "uniset-report/1"

THEOREM_IDS = (
    "product",
    "hm",
    "sum",
    "sporadic",
    "inequalities",
    "class-identity",
    "construction-sizes",
)

SIZE_POINTS = ((2, 4, 1), (2, 5, 1), (3, 4, 1))
IDENTITY_POINTS = ((2, 3), (2, 4), (3, 3), (3, 4), (2, 5))
THETA_ENUM_POINTS = ((2, 3), (2, 4), (3, 3), (3, 4), (2, 5))

_DEFAULT_PARAMS = {
    "product": (3, 3, 1),
    "sum": (3, 3, 1),
    "sporadic": (2, 3, 1),
    "hm": (6, 5, 1),
}


@dataclass(frozen=True)
class Check:
    check_id: str
    verdict: str
    observed: str
    expected: str
    detail: str = ""
    counterexample: dict | None = None

    def to_json_dict(self) -> dict:
        d = {
            "id": self.check_id,
            "verdict": self.verdict,
            "observed": self.observed,
            "expected": self.expected,
            "detail": self.detail,
        }
        if self.counterexample is not None:
            d["counterexample"] = self.counterexample
        return d


@dataclass
class Report:
    kind: str
    params: dict[str, str]
    checks: tuple[Check, ...]
    evidence: dict = field(default_factory=dict)
    runtime_ms: int | None = None

    @property
    def verdict(self) -> str:
        order = ("refuted", "inconclusive", "exploratory")
        for bad in order:
            if any(c.verdict == bad for c in self.checks):
                return bad
        return "confirmed"

    def to_json_dict(self) -> dict:
        d = {
            "schema": SCHEMA,
            "kind": self.kind,
            "params": self.params,
            "verdict": self.verdict,
            "checks": [c.to_json_dict() for c in self.checks],
            "evidence": self.evidence,
        }
        if self.runtime_ms is not None:
            d["runtime_ms"] = self.runtime_ms
        return d


def reports_to_json(reports: list[Report]) -> str:
    doc = {"schema": SCHEMA, "reports": [r.to_json_dict() for r in reports]}
    return json.dumps(doc, indent=2, sort_keys=True)


def reports_to_csv(reports: list[Report]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["kind", "params", "check", "verdict", "observed", "expected", "detail"])
    for r in reports:
        params = " ".join(f"{k}={v}" for k, v in sorted(r.params.items()))
        for c in r.checks:
            writer.writerow(
                [r.kind, params, c.check_id, c.verdict, c.observed, c.expected, c.detail]
            )
    return buf.getvalue()


def reports_to_text(reports: list[Report]) -> str:
    lines = []
    for r in reports:
        params = " ".join(f"{k}={v}" for k, v in sorted(r.params.items()))
        lines.append(f"{r.kind} ({params}): {r.verdict}")
        for c in r.checks:
            lines.append(f"  [{c.verdict}] {c.check_id}: {c.observed} (expected {c.expected})")
            if c.detail:
                lines.append(f"      {c.detail}")
    return "\n".join(lines) + "\n"


def all_confirmed(reports: list[Report]) -> bool:
    return all(r.verdict == "confirmed" for r in reports)


# ---------------------------------------------------------------------------
# small helpers


def _fail_verdict(hypothesis_ok: bool) -> str:
    return "refuted" if hypothesis_ok else "exploratory"


def _match(check_id: str, observed, expected, hyp: bool, detail: str = "",
           counterexample: dict | None = None) -> Check:
    obs, exp = str(observed), str(expected)
    if obs == exp:
        return Check(check_id, "confirmed", obs, exp, detail)
    return Check(check_id, _fail_verdict(hyp), obs, exp, detail, counterexample)


def _histogram(ctx: CrossContext, optima) -> dict[str, int]:
    out: dict[str, int] = {}
    for f, g in optima:
        label, _ = classify_pair(ctx, f, g)
        out[label] = out.get(label, 0) + 1
    return dict(sorted(out.items()))


def _pair_counterexample(ctx: CrossContext, pair, label: str) -> dict:
    f, g = pair
    return {
        "F": [str(i) for i in mask_ids(f)],
        "G": [str(i) for i in mask_ids(g)],
        "class": label,
    }


def _search_universe(c: int, k: int, cache_dir=None, unsafe: bool = False):
    # search commands keep the tighter ground-set cap (<= 12 elements)
    return get_or_build(
        Params(c, k), cache_dir=cache_dir, element_cap=12, unsafe=unsafe
    )


def _str_values(d: dict) -> dict:
    out = {}
    for key, val in d.items():
        if isinstance(val, dict):
            out[key] = _str_values(val)
        elif isinstance(val, bool):
            out[key] = val
        else:
            out[key] = str(val)
    return out


# ---------------------------------------------------------------------------
# the individual theorem runners


def _run_product(c, k, t, *, method, cap, cache_dir, unsafe, backend=None) -> Report:
    hyp = c >= 3 and k >= t + 2 and _side_condition_weak(c, k, t)
    universe = _search_universe(c, k, cache_dir, unsafe)
    ctx = CrossContext(universe, t, backend)
    res = optimize(ctx, "product", method=method, cap=cap)
    want = theta(c, k, t) ** 2
    classes = _histogram(ctx, res.optima)
    checks = [
        Check(
            "certified-search",
            "confirmed" if res.certified else "inconclusive",
            "certified" if res.certified else "uncertified",
            "certified",
            f"method={res.method}, explored={res.explored}",
        ),
        _match("max-product-value", res.value, want, hyp,
               "largest |F||G| over cross-intersecting pairs vs star product"),
    ]
    bad = next(((p, l) for p in res.optima
                for l in [classify_pair(ctx, *p)[0]] if l != "StarPair"), None)
    if bad is None:
        checks.append(Check("optima-all-star", "confirmed", "all StarPair",
                            "all StarPair", f"{len(res.optima)} optima"))
    else:
        obs = ", ".join(f"{k2}x{v}" for k2, v in classes.items())
        checks.append(Check("optima-all-star", _fail_verdict(hyp), obs, "all StarPair",
                            f"{len(res.optima)} optima",
                            _pair_counterexample(ctx, bad[0], bad[1])))
    evidence = _str_values({
        "value": res.value, "expected": want, "method": res.method,
        "explored": res.explored, "optima": len(res.optima), "classes": classes,
        "capped": res.capped,
    })
    return Report("product", {"c": str(c), "k": str(k), "t": str(t),
                              "hypothesis_ok": str(hyp).lower()}, tuple(checks), evidence)


def _run_sum(c, k, t, *, method, cap, cache_dir, unsafe, backend=None) -> Report:
    hyp = c >= 3 and k >= t + 2 and _side_condition_weak(c, k, t)
    universe = _search_universe(c, k, cache_dir, unsafe)
    ctx = CrossContext(universe, t, backend)
    res = optimize(ctx, "sum", method=method, cap=cap)
    want = 1 + sum(n_class_counts(c, k)[t:])
    classes = _histogram(ctx, res.optima)
    checks = [
        Check(
            "certified-search",
            "confirmed" if res.certified else "inconclusive",
            "certified" if res.certified else "uncertified",
            "certified",
            f"method={res.method}, explored={res.explored}",
        ),
        _match("max-sum-value", res.value, want, hyp,
               "largest |F|+|G| over nonempty cross-intersecting pairs vs 1+ball"),
    ]
    bad = next(((p, l) for p in res.optima
                for l in [classify_pair(ctx, *p)[0]] if l != "SingletonBall"), None)
    if bad is None:
        checks.append(Check("optima-all-singleton-ball", "confirmed",
                            "all SingletonBall", "all SingletonBall",
                            f"{len(res.optima)} optima"))
    else:
        obs = ", ".join(f"{k2}x{v}" for k2, v in classes.items())
        checks.append(Check("optima-all-singleton-ball", _fail_verdict(hyp), obs,
                            "all SingletonBall", f"{len(res.optima)} optima",
                            _pair_counterexample(ctx, bad[0], bad[1])))
    evidence = _str_values({
        "value": res.value, "expected": want, "method": res.method,
        "explored": res.explored, "optima": len(res.optima), "classes": classes,
        "capped": res.capped,
    })
    return Report("sum", {"c": str(c), "k": str(k), "t": str(t),
                          "hypothesis_ok": str(hyp).lower()}, tuple(checks), evidence)


def _run_sporadic(c, k, t, *, method, cap, cache_dir, unsafe, backend=None) -> Report:
    if k != t + 2:
        raise DomainError(f"the k=t+2 classification needs k = t+2, got k={k}, t={t}")
    hyp = c >= 2
    universe = _search_universe(c, k, cache_dir, unsafe)
    ctx = CrossContext(universe, t, backend)
    if ctx.m <= 20:
        concepts = exhaustive_concepts(ctx)
    else:
        concepts = []
        limit = cap if cap is not None else DEFAULT_CONCEPT_CAP
        for pair in concept_stream(ctx):
            concepts.append(pair)
            if len(concepts) > limit:
                raise CapExceeded(
                    f"more than {limit} maximal pairs at c={c}, k={k}, t={t}"
                )
    admit = constraint_admit(ctx, f"tau-g-min={t + 1}")
    allowed = {"SingletonBall", "C51", "C52"} | ({"C53"} if t >= 2 else set())
    distinct = {orient_pair(pair) for pair in concepts}
    filtered = 0
    classes: dict[str, int] = {}
    bad = None
    for pair in sorted(distinct):
        if pair[0] == 0 or pair[1] == 0 or not admit(pair):
            continue
        filtered += 1
        label, _ = classify_pair(ctx, *pair)
        classes[label] = classes.get(label, 0) + 1
        if label not in allowed and bad is None:
            bad = (pair, label)
    classes = dict(sorted(classes.items()))
    expected = "all in {" + ", ".join(sorted(allowed)) + "}"
    if bad is None:
        shapes = Check("tau-filtered-shapes", "confirmed",
                       ", ".join(f"{k2}x{v}" for k2, v in classes.items()) or "none",
                       expected,
                       f"{filtered} of {len(concepts)} maximal pairs have covering "
                       f"number >= {t + 1} on one side")
    else:
        shapes = Check("tau-filtered-shapes", _fail_verdict(hyp),
                       ", ".join(f"{k2}x{v}" for k2, v in classes.items()),
                       expected, f"{filtered} filtered pairs",
                       _pair_counterexample(ctx, bad[0], bad[1]))
    feasible = len(exhaust_sporadic("C51", universe.params, t, universe))
    want_feasible = c >= 3
    feas = _match(
        "disjoint-anchor-feasibility",
        "feasible" if feasible else "infeasible",
        "feasible" if want_feasible else "infeasible",
        hyp,
        f"exhaustive anchor search found {feasible} valid (u, v) systems for the "
        "two-member/two-member shape; the block outside u and v must survive, "
        "which is impossible at c=2",
    )
    evidence = _str_values({
        "concepts": len(concepts), "filtered": filtered, "classes": classes,
        "anchor-systems": feasible, "universe": len(universe),
    })
    return Report("sporadic", {"c": str(c), "k": str(k), "t": str(t),
                               "hypothesis_ok": str(hyp).lower()},
                  (shapes, feas), evidence)


def _inequality_checks(lemma_ids, threads: int) -> tuple[list[Check], dict]:
    reports = verify_inequality_grid(lemma_ids, threads=threads)
    checks = []
    per_lemma: dict[str, list] = {}
    for r in reports:
        per_lemma.setdefault(r.lemma_id, []).append(r)
    for lemma_id in lemma_ids:
        rs = per_lemma.get(lemma_id, [])
        holding = sum(1 for r in rs if r.holds)
        first_bad = next((r for r in rs if not r.holds), None)
        check = _match(
            f"grid-{lemma_id}", f"{holding}/{len(rs)} hold", f"{len(rs)}/{len(rs)} hold",
            True, "exact arithmetic over the full hypothesis grid",
            None if first_bad is None else {
                "c": str(first_bad.c), "k": str(first_bad.k), "t": str(first_bad.t),
                "s": str(first_bad.s), "lhs": str(first_bad.lhs), "rhs": str(first_bad.rhs),
            },
        )
        checks.append(check)
        if lemma_id == "6.4iii":
            got = sorted({(r.k, r.t) for r in rs if r.equality})
            want = sorted({(r.k, r.t) for r in rs if r.k == r.t + 3 or (r.k, r.t) == (5, 1)})
            checks.append(_match(
                "equality-cases-6.4iii",
                "; ".join(f"k={k2},t={t2}" for k2, t2 in got) or "none",
                "; ".join(f"k={k2},t={t2}" for k2, t2 in want) or "none",
                True, "equality holds exactly at k=t+3 and (k,t)=(5,1)",
            ))
    counts = {lemma_id: len(per_lemma.get(lemma_id, [])) for lemma_id in lemma_ids}
    return checks, counts


def _run_inequalities(threads: int = 1) -> Report:
    checks, counts = _inequality_checks(LEMMA_IDS, threads)
    evidence = _str_values({"instances": counts, "total": sum(counts.values())})
    return Report("inequalities", {"grid": "c<=12, t<=8, k<=3t+8"}, tuple(checks), evidence)


def _identity_checks() -> list[Check]:
    checks = []
    for c, k in IDENTITY_POINTS:
        good = sum(1 for i in range(1, k) if verify_theta_class_identity(c, k, i))
        checks.append(_match(
            f"containment-count-recovery-{c}-{k}", f"{good}/{k - 1} indices",
            f"{k - 1}/{k - 1} indices", True,
            "theta recovered from overlap-class counts with exact rationals",
        ))
    return checks


def _run_class_identity() -> Report:
    checks = _identity_checks()
    extra_good = 0
    extra_total = 0
    for c in range(2, 13):
        for k in range(2, 9):
            counts = n_class_counts(c, k)
            extra_total += 2
            extra_good += counts[k - 1] == 0
            extra_good += sum(counts) == universe_count(c, k)
    checks.append(_match(
        "class-count-consistency", f"{extra_good}/{extra_total}",
        f"{extra_total}/{extra_total}", True,
        "overlap-class counts: index k-1 empty and total equals the universe size "
        "for c<=12, k<=8",
    ))
    return Report("class-identity", {"points": " ".join(f"({c},{k})" for c, k in IDENTITY_POINTS)},
                  tuple(checks), {})


def _size_checks(cache_dir=None, unsafe: bool = False) -> list[Check]:
    checks = []
    for c, k, t in SIZE_POINTS:
        universe = get_or_build(Params(c, k), cache_dir=cache_dir, unsafe=unsafe)
        got_n1 = len(family_members(default_spec("N1", c, k, t), universe))
        got_n2 = len(family_members(default_spec("N2", c, k, t), universe))
        checks.append(_match(f"near-star-size-{c}-{k}-{t}", got_n1, f1(c, k, t), True,
                             "enumerated members vs the layered-count formula"))
        checks.append(_match(f"frame-size-{c}-{k}-{t}", got_n2, f2(c, k, t), True,
                             "enumerated members vs the rational-bracket formula"))
    return checks


def _formula_route_checks() -> list[Check]:
    f2_good = f2_bad = 0
    f1_good = f1_bad = 0
    witness = None
    for c in range(2, 7):
        for t in range(1, 4):
            for k in range(t + 2, t + 7):
                if f2(c, k, t) == f2_by_inclusion_exclusion(c, k, t):
                    f2_good += 1
                else:
                    f2_bad += 1
                    witness = witness or {"c": str(c), "k": str(k), "t": str(t)}
                layers = layer_counts(c, k, t)
                overlaps = exact_overlap_counts(c, k, t)
                refold = [
                    sum(comb(i, j) * overlaps[i] for i in range(j, len(overlaps)))
                    for j in range(len(layers))
                ]
                if refold == layers and all(x >= 0 for x in overlaps):
                    f1_good += 1
                else:
                    f1_bad += 1
                    witness = witness or {"c": str(c), "k": str(k), "t": str(t)}
    out = [
        _match("frame-size-two-routes", f"{f2_good}/{f2_good + f2_bad}",
               f"{f2_good + f2_bad}/{f2_good + f2_bad}", True,
               "rational bracket vs overcount-and-subtract, c<=6, t<=3, k<=t+6",
               witness),
        _match("overlap-inversion-roundtrip", f"{f1_good}/{f1_good + f1_bad}",
               f"{f1_good + f1_bad}/{f1_good + f1_bad}", True,
               "binomial inversion of layer counts refolds exactly and stays "
               "nonnegative", witness),
    ]
    return out


def _run_construction_sizes(cache_dir=None, unsafe: bool = False) -> Report:
    checks = _size_checks(cache_dir, unsafe) + _formula_route_checks()
    return Report(
        "construction-sizes",
        {"points": " ".join(f"({c},{k},{t})" for c, k, t in SIZE_POINTS)},
        tuple(checks), {},
    )


def _run_hm(c, k, t, *, threads, seed, samples, cache_dir, unsafe) -> Report:
    hyp = c >= 6 and k >= t + 3 and t >= 1 and _side_condition_strong(c, k, t)
    checks, counts = _inequality_checks(LEMMA_IDS[2:], threads)
    checks += _size_checks(cache_dir, unsafe)
    checks += _formula_route_checks()
    rng = random.Random(seed)
    kinds = ["N1", "N2"] + (["N3"] if t == 1 else [])
    share = [samples // len(kinds)] * len(kinds)
    share[0] += samples - sum(share)
    sampled_evidence = {}
    for kind, n_pairs in zip(kinds, share):
        spec = default_spec(kind, c, k, t)
        partner = partner_spec(spec)
        bad = 0
        for _ in range(n_pairs):
            f = sample_member(spec, rng)
            g = sample_member(partner, rng)
            if common_blocks(f, g) < t:
                bad += 1
        checks.append(_match(
            f"sampled-cross-{kind}", f"{bad} violations in {n_pairs} samples",
            f"0 violations in {n_pairs} samples", hyp,
            "random member pairs from the family and its partner; sampling "
            "never certifies, it only hunts counterexamples",
        ))
        sampled_evidence[kind] = n_pairs
    evidence = _str_values({
        "grid-instances": counts, "samples": sampled_evidence, "seed": seed,
    })
    return Report("hm", {"c": str(c), "k": str(k), "t": str(t),
                         "hypothesis_ok": str(hyp).lower()}, tuple(checks), evidence)


def run_verify_theorem(
    theorem_id: str,
    c: int | None = None,
    k: int | None = None,
    t: int | None = None,
    *,
    method: str = "auto",
    cap: int | None = None,
    threads: int = 1,
    seed: int = 0,
    samples: int = 10_000,
    cache_dir=None,
    unsafe: bool = False,
    backend: str | None = None,
) -> Report:
    """One named verification pipeline; see THEOREM_IDS for the catalog."""
    if theorem_id not in THEOREM_IDS:
        raise DomainError(
            f"unknown theorem id {theorem_id!r}; known: {', '.join(THEOREM_IDS)}"
        )
    if theorem_id in _DEFAULT_PARAMS:
        dc, dk, dt = _DEFAULT_PARAMS[theorem_id]
        c = dc if c is None else c
        k = dk if k is None else k
        t = dt if t is None else t
        Params(c, k).check_t(t)
    if theorem_id == "product":
        return _run_product(c, k, t, method=method, cap=cap, cache_dir=cache_dir,
                            unsafe=unsafe, backend=backend)
    if theorem_id == "sum":
        return _run_sum(c, k, t, method=method, cap=cap, cache_dir=cache_dir,
                        unsafe=unsafe, backend=backend)
    if theorem_id == "sporadic":
        return _run_sporadic(c, k, t, method=method, cap=cap, cache_dir=cache_dir,
                             unsafe=unsafe, backend=backend)
    if theorem_id == "hm":
        return _run_hm(c, k, t, threads=threads, seed=seed, samples=samples,
                       cache_dir=cache_dir, unsafe=unsafe)
    if theorem_id == "inequalities":
        return _run_inequalities(threads)
    if theorem_id == "class-identity":
        return _run_class_identity()
    return _run_construction_sizes(cache_dir, unsafe)


def _theta_enumeration_checks(cache_dir=None) -> list[Check]:
    from itertools import combinations

    checks = []
    for c, k in THETA_ENUM_POINTS:
        universe = get_or_build(Params(c, k), cache_dir=cache_dir)
        ok = True
        witness = None
        details = []
        for z in range(1, k + 1):
            seen: dict[tuple, int] = {}
            for p in universe:
                for sub in combinations(p, z):
                    seen[sub] = seen.get(sub, 0) + 1
            want = theta(c, k, z)
            anchors = comb(c * k, c * z) * universe_count(c, z)
            if len(seen) != anchors or any(v != want for v in seen.values()):
                ok = False
                witness = witness or {"c": str(c), "k": str(k), "z": str(z)}
            details.append(f"z={z}: {len(seen)} anchors x {want}")
        checks.append(_match(
            f"containment-counts-{c}-{k}",
            "all anchors match" if ok else "mismatch", "all anchors match",
            True, "; ".join(details), witness,
        ))
    return checks


def run_formula_suite(threads: int = 1, cache_dir=None) -> list[Report]:
    """Every closed-form count and inequality at enumerable scale."""
    theta_report = Report(
        "theta-enumeration",
        {"points": " ".join(f"({c},{k})" for c, k in THETA_ENUM_POINTS)},
        tuple(_theta_enumeration_checks(cache_dir)), {},
    )
    return [
        theta_report,
        _run_class_identity(),
        _run_inequalities(threads),
        _run_construction_sizes(cache_dir),
    ]
