"""Command-line front end.

Subcommands map one-to-one onto the library layers: `enumerate` and
`cache` onto core/cache, `count-formula` and `verify-inequalities` onto
counting, `construct` onto constructions, `covers` onto covers, `search`
onto search, and `verify-theorem` / `formula-suite` onto reports.

Conventions shared by every subcommand:

* numeric values in JSON output are decimal strings (ids stay ints),
* JSON is emitted with indent=2 and sorted keys, so identical requests
  produce byte-identical output regardless of --threads,
* timings are only included under --timing, keeping default output
  deterministic,
* exit code 0 means every requested check came back confirmed, 1 means
  some verification failed or was left uncertified, 2 means the request
  itself was bad (usage, domain, or cap errors).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import random
import sys
import time
from itertools import combinations
from pathlib import Path

from .cache import cache_path, get_or_build, load_universe
from .constructions import (
    KINDS,
    default_spec,
    family_members,
    partner_spec,
    predicted_size,
    sampled_cross_check,
    spec_from_json,
)
from .core import (
    Params,
    canonical,
    common_blocks,
    elements_of,
    render_blocks,
    sort_key,
    universe_count,
)
from .counting import (
    LEMMA_IDS,
    check_inequality,
    f0,
    f1,
    f2,
    format_scalar,
    g_bound,
    h_bounds,
    n_class_counts,
    theta,
    verify_inequality_grid,
)
from .covers import cover_union_structure, min_t_covers, occurring_blocks
from .errors import CacheCorrupt, CapExceeded, DomainError, UnisetError
from .reports import (
    THEOREM_IDS,
    Check,
    reports_to_csv,
    reports_to_json,
    reports_to_text,
    run_formula_suite,
    run_verify_theorem,
)
from .search import CrossContext, classify_pair, mask_ids, optimize

SEARCH_ELEMENT_CAP = 12

FORMULAS = ("theta", "g", "f0", "f1", "f2", "h", "nclass")


# ---------------------------------------------------------------------------
# output plumbing


def _print_json(doc) -> None:
    print(json.dumps(doc, indent=2, sort_keys=True))


def _print_csv(header, rows) -> None:
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)


def _emit(args, doc, rows=None, text=None) -> None:
    """Render one result dict in the requested format.

    `rows` is an optional (header, data) pair for csv; `text` a plain
    rendering.  Both fall back to the JSON document when not supplied.
    """
    if args.format == "json":
        _print_json(doc)
    elif args.format == "csv":
        if rows is None:
            raise DomainError("this subcommand has no csv rendering")
        _print_csv(*rows)
    else:
        print(text if text is not None else json.dumps(doc, indent=2, sort_keys=True))


def _maybe_timing(args, doc, t0: float) -> None:
    if args.timing:
        doc["runtime_ms"] = int((time.perf_counter() - t0) * 1000)


def _require_t(args) -> int:
    if args.t is None:
        raise DomainError("--t is required here")
    if args.t < 1:
        raise DomainError(f"t must be >= 1, got {args.t}")
    return args.t


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    return int(os.environ.get("THREADS", "1"))


def _universe(params: Params, args, element_cap: int | None = None):
    kwargs = {}
    if element_cap is not None:
        kwargs["element_cap"] = element_cap
    if args.unsafe_cap:
        kwargs["unsafe"] = True
    return get_or_build(params, args.cache_dir, **kwargs)


def _render_anchors(anchors: dict) -> dict:
    """1-based block rendering of a classify_pair anchor dict."""
    out = {}
    for key, val in anchors.items():
        if key == "E":
            out[key] = [sorted(e + 1 for e in elements_of(b)) for b in val]
        elif key in ("u", "v"):
            out[key] = render_blocks((val,))[0]
        elif isinstance(val, tuple):
            out[key] = render_blocks(val)
        else:
            out[key] = val
    return out


# ---------------------------------------------------------------------------
# enumerate


def cmd_enumerate(args) -> int:
    params = Params(args.c, args.k)
    if args.count_only:
        total = str(universe_count(params.c, params.k))
        doc = {"c": str(args.c), "k": str(args.k), "count": total}
        _emit(args, doc, rows=(["c", "k", "count"], [[args.c, args.k, total]]),
              text=total)
        return 0
    universe = _universe(params, args)
    items = list(universe)
    if args.limit is not None:
        items = items[: args.limit]
    doc = {
        "c": str(args.c),
        "k": str(args.k),
        "count": str(len(universe)),
        "items": [
            {"id": i, "blocks": render_blocks(f)} for i, f in enumerate(items)
        ],
    }
    rows = (
        ["id", "blocks"],
        [[i, _blocks_text(f)] for i, f in enumerate(items)],
    )
    lines = [f"count {len(universe)}"]
    lines += [f"{i}\t{_blocks_text(f)}" for i, f in enumerate(items)]
    _emit(args, doc, rows=rows, text="\n".join(lines))
    return 0


def _blocks_text(partition) -> str:
    return "|".join(",".join(str(e) for e in blk) for blk in render_blocks(partition))


# ---------------------------------------------------------------------------
# count-formula


def cmd_count_formula(args) -> int:
    c, k = args.c, args.k
    z = args.z if args.z is not None else args.s
    name = args.formula
    doc = {"formula": name, "params": {"c": str(c), "k": str(k)}}
    if name == "theta":
        if z is None:
            raise DomainError("theta needs --z")
        doc["params"]["z"] = str(z)
        value = str(theta(c, k, z))
    elif name == "g":
        t = _require_t(args)
        if z is None:
            raise DomainError("g needs --z")
        doc["params"].update(t=str(t), z=str(z))
        value = str(g_bound(c, k, t, z))
    elif name in ("f0", "f1", "f2"):
        t = _require_t(args)
        doc["params"]["t"] = str(t)
        fn = {"f0": f0, "f1": f1, "f2": f2}[name]
        value = str(fn(c, k, t))
    elif name == "h":
        t = _require_t(args)
        doc["params"]["t"] = str(t)
        hs = h_bounds(c, k, t)
        doc["values"] = {f"h{i}": format_scalar(v) for i, v in enumerate(hs, start=1)}
        rows = (["name", "value"], sorted(doc["values"].items()))
        text = "\n".join(f"{n} = {v}" for n, v in rows[1])
        _emit(args, doc, rows=rows, text=text)
        return 0
    else:  # nclass
        counts = n_class_counts(c, k)
        doc["values"] = [str(v) for v in counts]
        rows = (["j", "count"], [[j, str(v)] for j, v in enumerate(counts)])
        text = "\n".join(f"N[{j}] = {v}" for j, v in enumerate(counts))
        _emit(args, doc, rows=rows, text=text)
        return 0
    doc["value"] = value
    _emit(args, doc, rows=(["value"], [[value]]), text=value)
    return 0


# ---------------------------------------------------------------------------
# verify-inequalities


def _parse_range(text: str | None, fallback: tuple[int, int]) -> tuple[int, int]:
    if text is None:
        return fallback
    parts = text.split(":")
    try:
        if len(parts) == 1:
            lo = hi = int(parts[0])
        elif len(parts) == 2:
            lo, hi = int(parts[0]), int(parts[1])
        else:
            raise ValueError
    except ValueError:
        raise DomainError(f"bad range {text!r}, want A or A:B") from None
    if lo > hi:
        raise DomainError(f"empty range {text!r}")
    return lo, hi


_INEQ_COLS = ("lemma", "c", "k", "t", "s", "holds", "hypothesis_ok",
              "equality", "lhs", "rhs", "margin")


def _ineq_rows(instances):
    rows = []
    for d in instances:
        rows.append([d.get(col, "") for col in _INEQ_COLS])
    return rows


def cmd_verify_inequalities(args) -> int:
    if args.lemma == "all":
        lemma_ids = LEMMA_IDS
    elif args.lemma in LEMMA_IDS:
        lemma_ids = (args.lemma,)
    else:
        raise DomainError(f"unknown lemma id {args.lemma!r}, want one of {LEMMA_IDS} or all")

    explicit = any(r is not None for r in (args.c_range, args.k_range, args.t_range))
    reports = []
    skipped = 0
    if explicit:
        c_lo, c_hi = _parse_range(args.c_range, (2, 8))
        k_lo, k_hi = _parse_range(args.k_range, (3, 10))
        t_lo, t_hi = _parse_range(args.t_range, (1, 4))
        if t_lo < 1:
            raise DomainError("t must be >= 1")
        for lemma_id in lemma_ids:
            for c in range(c_lo, c_hi + 1):
                for k in range(k_lo, k_hi + 1):
                    for t in range(t_lo, t_hi + 1):
                        svals = range(t, k - 1) if lemma_id == "6.1i" else (None,)
                        for s in svals:
                            try:
                                reports.append(check_inequality(lemma_id, c, k, t, s))
                            except UnisetError:
                                skipped += 1
    else:
        reports = verify_inequality_grid(lemma_ids, threads=_threads(args))

    instances = [r.to_json_dict() for r in reports]
    violations = sum(1 for r in reports if not r.holds)
    doc = {
        "lemmas": list(lemma_ids),
        "total": str(len(reports)),
        "violations": str(violations),
        "skipped": str(skipped),
        "instances": instances,
    }
    rows = (list(_INEQ_COLS), _ineq_rows(instances))
    lines = [f"{len(reports)} instances, {violations} violations, {skipped} skipped"]
    for r in reports:
        if not r.holds:
            tag = "REFUTED" if r.hypothesis_ok else "exploratory"
            lines.append(
                f"{tag} {r.lemma_id} c={r.c} k={r.k} t={r.t}"
                + (f" s={r.s}" if r.s is not None else "")
            )
    _emit(args, doc, rows=rows, text="\n".join(lines))
    return 0 if violations == 0 else 1


# ---------------------------------------------------------------------------
# construct


def _resolve_spec(args):
    if args.spec is not None:
        raw = args.spec.strip()
        if not raw.startswith("{"):
            p = Path(raw)
            if not p.exists():
                raise DomainError(f"spec file {raw!r} not found")
            raw = p.read_text()
        return spec_from_json(raw)
    if args.kind is None:
        raise DomainError("construct needs --spec or --kind")
    if args.c is None or args.k is None:
        raise DomainError("--kind needs --c and --k")
    return default_spec(args.kind, args.c, args.k, _require_t(args))


def cmd_construct(args) -> int:
    spec = _resolve_spec(args)
    params = spec.params
    enumerable = params.n <= SEARCH_ELEMENT_CAP or args.unsafe_cap

    if args.emit == "size":
        predicted = predicted_size(spec)
        enumerated = None
        if enumerable:
            universe = _universe(params, args)
            enumerated = len(family_members(spec, universe))
        doc = {
            "spec": spec.to_json_dict(),
            "predicted": str(predicted),
            "enumerated": None if enumerated is None else str(enumerated),
            "match": None if enumerated is None else enumerated == predicted,
        }
        rows = (["predicted", "enumerated", "match"],
                [[doc["predicted"], doc["enumerated"], doc["match"]]])
        text = f"predicted {predicted}" + (
            f" enumerated {enumerated} match {enumerated == predicted}"
            if enumerated is not None else " (not enumerated)"
        )
        _emit(args, doc, rows=rows, text=text)
        if enumerated is not None and enumerated != predicted:
            return 1
        return 0

    if args.emit == "members":
        universe = _universe(params, args)
        members = family_members(spec, universe)
        doc = {
            "spec": spec.to_json_dict(),
            "size": str(len(members)),
            "members": [
                {"id": universe.id_of(f), "blocks": render_blocks(f)} for f in members
            ],
        }
        rows = (["id", "blocks"],
                [[universe.id_of(f), _blocks_text(f)] for f in members])
        lines = [f"size {len(members)}"]
        lines += [f"{universe.id_of(f)}\t{_blocks_text(f)}" for f in members]
        _emit(args, doc, rows=rows, text="\n".join(lines))
        return 0

    # predicate-check: the pair (spec, partner) really is cross-t-intersecting
    partner = partner_spec(spec)
    t = spec.t
    checks = []
    if enumerable:
        universe = _universe(params, args)
        mf = family_members(spec, universe)
        mg = family_members(partner, universe)
        bad = None
        for f in mf:
            for g in mg:
                if common_blocks(f, g) < t:
                    bad = {"F": _blocks_text(f), "G": _blocks_text(g)}
                    break
            if bad:
                break
        checks.append(Check(
            "cross-intersecting",
            "refuted" if bad else "confirmed",
            "violating pair" if bad else "all pairs share >= t blocks",
            "all pairs share >= t blocks",
            detail=f"exact over {len(mf)}x{len(mg)} pairs",
            counterexample=bad,
        ))
        checks.append(Check(
            "size-formula",
            "confirmed" if len(mf) == predicted_size(spec) else "refuted",
            str(len(mf)),
            str(predicted_size(spec)),
        ))
        mode = "exact"
    else:
        rng = random.Random(args.seed)
        bad_count = sampled_cross_check(spec, partner, args.samples, rng)
        checks.append(Check(
            "cross-intersecting",
            "refuted" if bad_count else "confirmed",
            f"{bad_count} violations",
            "0 violations",
            detail=f"sampled over {args.samples} pairs, seed {args.seed}",
        ))
        mode = "sampled"
    doc = {
        "spec": spec.to_json_dict(),
        "partner": partner.to_json_dict(),
        "mode": mode,
        "checks": [ch.to_json_dict() for ch in checks],
    }
    rows = (["check", "verdict", "observed", "expected"],
            [[ch.check_id, ch.verdict, ch.observed, ch.expected] for ch in checks])
    text = "\n".join(f"{ch.check_id}: {ch.verdict}" for ch in checks)
    _emit(args, doc, rows=rows, text=text)
    return 0 if all(ch.verdict == "confirmed" for ch in checks) else 1


# ---------------------------------------------------------------------------
# covers


def _resolve_family(args):
    """Turn --family (spec JSON, spec file, ids:..., or ids file) into
    (params, members, t)."""
    raw = args.family.strip()
    ids = None
    spec = None
    if raw.startswith("ids:"):
        ids = [int(x) for x in raw[4:].split(",") if x.strip()]
    elif raw.startswith("{"):
        spec = spec_from_json(raw)
    else:
        p = Path(raw)
        if not p.exists():
            raise DomainError(f"family file {raw!r} not found")
        body = p.read_text().strip()
        if body.startswith("{"):
            spec = spec_from_json(body)
        elif body.startswith("["):
            ids = [int(x) for x in json.loads(body)]
        else:
            ids = [int(x) for x in body.split()]

    if spec is not None:
        t = args.t if args.t is not None else spec.t
        universe = _universe(spec.params, args)
        return spec.params, family_members(spec, universe), t
    if args.c is None or args.k is None:
        raise DomainError("id-based families need --c and --k")
    params = Params(args.c, args.k)
    universe = _universe(params, args)
    if not ids:
        raise DomainError("empty family")
    for i in ids:
        if not 0 <= i < len(universe):
            raise DomainError(f"id {i} out of range 0..{len(universe) - 1}")
    t = args.t
    if t is None:
        raise DomainError("--t is required for id-based families")
    return params, tuple(universe[i] for i in sorted(set(ids))), t


def cmd_covers(args) -> int:
    params, members, t = _resolve_family(args)
    params.check_t(t)

    if args.report == "common":
        blocks = set(members[0])
        for f in members[1:]:
            blocks &= set(f)
        ordered = sorted(blocks, key=lambda b: sort_key((b,)))
        doc = {
            "t": str(t),
            "size": str(len(members)),
            "count": str(len(ordered)),
            "common": render_blocks(tuple(ordered)) if ordered else [],
        }
        rows = (["block"], [[_blocks_text((b,))] for b in ordered])
        text = "\n".join(_blocks_text((b,)) for b in ordered) or "(none)"
        _emit(args, doc, rows=rows, text=text)
        return 0

    rep = min_t_covers(members, t, params)
    if args.report == "covers":
        doc = {
            "t": str(t),
            "size": str(len(members)),
            "tau": None if rep.tau is None else str(rep.tau),
            "capped": rep.capped,
            "count": str(len(rep.covers)),
            "covers": [render_blocks(cv) for cv in rep.covers],
        }
        rows = (["cover"], [[_blocks_text(cv)] for cv in rep.covers])
        lines = [f"tau {rep.tau} covers {len(rep.covers)}"]
        lines += [_blocks_text(cv) for cv in rep.covers]
        _emit(args, doc, rows=rows, text="\n".join(lines))
        return 0

    # structure: the union picture at each t-block base, meaningful at tau = t+1
    found = []
    if rep.tau == t + 1:
        bases = sorted(
            {canonical(sub) for cv in rep.covers for sub in combinations(cv, t)},
            key=sort_key,
        )
        for base in bases:
            r = cover_union_structure(members, rep.covers, base, t, params)
            if r is not None:
                found.append(r)
    doc = {
        "t": str(t),
        "tau": None if rep.tau is None else str(rep.tau),
        "bases": [
            {
                "base": render_blocks(r.base),
                "union": render_blocks(r.union),
                "m": str(r.m),
                "union_valid": r.union_valid,
                "m_in_range": r.m_in_range,
                "covers_complete": r.covers_complete,
                "off_family_sizes_ok": r.off_family_sizes_ok,
            }
            for r in found
        ],
    }
    if rep.tau != t + 1:
        doc["note"] = "structure report is meaningful when tau = t+1"
    rows = (
        ["base", "m", "union_valid", "m_in_range", "covers_complete",
         "off_family_sizes_ok"],
        [[_blocks_text(r.base), r.m, r.union_valid, r.m_in_range,
          r.covers_complete, r.off_family_sizes_ok] for r in found],
    )
    text = "\n".join(
        f"base {_blocks_text(r.base)} m={r.m} valid={r.union_valid}" for r in found
    ) or f"tau={rep.tau}, no structure report"
    _emit(args, doc, rows=rows, text=text)
    return 0


# ---------------------------------------------------------------------------
# search


def cmd_search(args) -> int:
    t0 = time.perf_counter()
    params = Params(args.c, args.k)
    t = _require_t(args)
    if params.n > SEARCH_ELEMENT_CAP and not args.unsafe_cap:
        raise CapExceeded(
            f"search ground set of {params.n} elements exceeds cap "
            f"{SEARCH_ELEMENT_CAP} (--unsafe-cap to override)"
        )
    universe = _universe(params, args)
    ctx = CrossContext(universe, t, backend=args.backend)
    constraint = None if args.constraint == "none" else args.constraint
    res = optimize(ctx, args.objective, method=args.method, cap=args.cap,
                   constraint=constraint)
    optima = []
    for fm, gm in res.optima:
        label, anchors = classify_pair(ctx, fm, gm)
        optima.append({
            "F": mask_ids(fm),
            "G": mask_ids(gm),
            "class": label,
            "anchors": _render_anchors(anchors),
        })
    doc = {
        "objective": args.objective,
        "constraint": args.constraint,
        "value": str(res.value),
        "certified": res.certified,
        "method": res.method,
        "explored": str(res.explored),
        "capped": res.capped,
        "optima": optima,
    }
    _maybe_timing(args, doc, t0)
    hist = {}
    for o in optima:
        hist[o["class"]] = hist.get(o["class"], 0) + 1
    rows = (["F", "G", "class"],
            [[" ".join(map(str, o["F"])), " ".join(map(str, o["G"])), o["class"]]
             for o in optima])
    text = (
        f"value {res.value} certified {res.certified} method {res.method}\n"
        f"optima {len(optima)}: "
        + ", ".join(f"{k} x{v}" for k, v in sorted(hist.items()))
    )
    _emit(args, doc, rows=rows, text=text)
    return 0 if res.certified else 1


# ---------------------------------------------------------------------------
# verify-theorem / formula-suite


def _emit_reports(args, reports) -> int:
    if args.format == "json":
        print(reports_to_json(reports))
    elif args.format == "csv":
        print(reports_to_csv(reports), end="")
    else:
        print(reports_to_text(reports))
    return 0 if all(r.verdict == "confirmed" for r in reports) else 1


def cmd_verify_theorem(args) -> int:
    ids = list(THEOREM_IDS) if args.id == "all" else [args.id]
    kwargs = dict(
        method=args.method,
        cap=args.cap,
        threads=_threads(args),
        seed=args.seed,
        samples=args.samples,
        cache_dir=args.cache_dir,
        unsafe=args.unsafe_cap,
        backend=args.backend,
    )
    reports = []
    for theorem_id in ids:
        reports.append(run_verify_theorem(
            theorem_id, c=args.c, k=args.k, t=args.t, **kwargs,
        ))
    return _emit_reports(args, reports)


def cmd_formula_suite(args) -> int:
    reports = run_formula_suite(threads=_threads(args), cache_dir=args.cache_dir)
    return _emit_reports(args, reports)


# ---------------------------------------------------------------------------
# cache


def cmd_cache(args) -> int:
    params = Params(args.c, args.k)
    path = cache_path(args.c, args.k, args.cache_dir)
    if args.action == "path":
        doc = {"path": str(path), "exists": path.exists()}
        _emit(args, doc, rows=(["path", "exists"], [[str(path), path.exists()]]),
              text=str(path))
        return 0
    if args.action == "clear":
        removed = path.exists()
        path.unlink(missing_ok=True)
        doc = {"path": str(path), "removed": removed}
        _emit(args, doc, rows=(["path", "removed"], [[str(path), removed]]),
              text=f"removed {str(removed).lower()}")
        return 0
    if args.action == "build":
        kwargs = {"unsafe": True} if args.unsafe_cap else {}
        universe = get_or_build(params, args.cache_dir, **kwargs)
        doc = {"path": str(path), "count": str(len(universe))}
        _emit(args, doc, rows=(["path", "count"], [[str(path), len(universe)]]),
              text=f"{path} ({len(universe)} partitions)")
        return 0
    # validate
    if not path.exists():
        doc = {"path": str(path), "ok": False, "error": "missing"}
        _emit(args, doc, rows=(["path", "ok", "error"],
                               [[str(path), False, "missing"]]),
              text=f"{path}: missing")
        return 1
    try:
        universe = load_universe(path, expect=params)
    except CacheCorrupt as exc:
        doc = {"path": str(path), "ok": False, "error": str(exc)}
        _emit(args, doc, rows=(["path", "ok", "error"],
                               [[str(path), False, str(exc)]]),
              text=f"{path}: CORRUPT ({exc})")
        return 1
    doc = {"path": str(path), "ok": True, "count": str(len(universe))}
    _emit(args, doc, rows=(["path", "ok", "count"],
                           [[str(path), True, len(universe)]]),
          text=f"{path}: ok ({len(universe)} partitions)")
    return 0


# ---------------------------------------------------------------------------
# parser


def _common_flags(sub) -> None:
    sub.add_argument("--format", choices=("json", "csv", "text"), default="text")
    sub.add_argument("--threads", type=int, default=None,
                     help="worker threads (or THREADS env; default 1)")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--cache-dir", type=Path, default=None)
    sub.add_argument("--cap", type=int, default=None,
                     help="concept cap for searches (or SEARCH_CAP env)")
    sub.add_argument("--unsafe-cap", action="store_true",
                     help="lift enumeration/search size guards")
    sub.add_argument("--timing", action="store_true",
                     help="include runtime_ms in JSON output")
    sub.add_argument("--backend", choices=("numba", "numpy"), default=None)


def _param_flags(sub, t_default=None) -> None:
    sub.add_argument("--c", type=int, required=True)
    sub.add_argument("--k", type=int, required=True)
    sub.add_argument("--t", type=int, default=t_default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uniset",
        description="exact counting, construction, and search for "
                    "cross-t-intersecting families of c-uniform partitions",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("enumerate", help="list or count the partition universe")
    _param_flags(p)
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--count-only", action="store_true")
    _common_flags(p)
    p.set_defaults(fn=cmd_enumerate)

    p = subs.add_parser("count-formula", help="evaluate one counting formula")
    p.add_argument("formula", choices=FORMULAS)
    _param_flags(p)
    p.add_argument("--z", type=int, default=None)
    p.add_argument("--s", type=int, default=None, help="alias for --z")
    _common_flags(p)
    p.set_defaults(fn=cmd_count_formula)

    p = subs.add_parser("verify-inequalities",
                        help="evaluate the inequality battery exactly")
    p.add_argument("--lemma", default="all")
    p.add_argument("--c-range", default=None, metavar="A:B")
    p.add_argument("--k-range", default=None, metavar="A:B")
    p.add_argument("--t-range", default=None, metavar="A:B")
    _common_flags(p)
    p.set_defaults(fn=cmd_verify_inequalities)

    p = subs.add_parser("construct", help="materialize a catalogued family")
    p.add_argument("--spec", default=None,
                   help="inline JSON or path to a spec file")
    p.add_argument("--kind", choices=KINDS, default=None)
    p.add_argument("--c", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--t", type=int, default=None)
    p.add_argument("--emit", choices=("members", "size", "predicate-check"),
                   default="size")
    p.add_argument("--samples", type=int, default=10_000)
    _common_flags(p)
    p.set_defaults(fn=cmd_construct)

    p = subs.add_parser("covers", help="covering number and minimum covers")
    p.add_argument("--family", required=True,
                   help="spec JSON, spec file, ids:1,2,3, or an ids file")
    p.add_argument("--c", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--t", type=int, default=None)
    p.add_argument("--report", choices=("covers", "common", "structure"),
                   default="covers")
    _common_flags(p)
    p.set_defaults(fn=cmd_covers)

    p = subs.add_parser("search", help="certified extremal search over pairs")
    _param_flags(p)
    p.add_argument("--objective", choices=("product", "sum"), required=True)
    p.add_argument("--constraint", default="none",
                   help="none, nontrivial, or tau-g-min=<v>")
    p.add_argument("--method", choices=("auto", "exhaustive", "concepts", "bnb"),
                   default="auto")
    _common_flags(p)
    p.set_defaults(fn=cmd_search)

    p = subs.add_parser("verify-theorem", help="run one verification report")
    p.add_argument("--id", required=True, choices=THEOREM_IDS + ("all",))
    p.add_argument("--c", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--t", type=int, default=None)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--method", choices=("auto", "exhaustive", "concepts", "bnb"),
                   default="auto")
    _common_flags(p)
    p.set_defaults(fn=cmd_verify_theorem)

    p = subs.add_parser("formula-suite", help="closed-form battery in one shot")
    _common_flags(p)
    p.set_defaults(fn=cmd_formula_suite)

    p = subs.add_parser("cache", help="build, validate, or drop universe caches")
    p.add_argument("action", choices=("build", "validate", "path", "clear"))
    p.add_argument("--c", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    _common_flags(p)
    p.set_defaults(fn=cmd_cache)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.backend:
        os.environ["UNISET_BACKEND"] = args.backend
    try:
        return args.fn(args)
    except UnisetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        # downstream consumer (head, less) closed the pipe; not an error
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0


if __name__ == "__main__":
    sys.exit(main())
