"""On-disk universe cache: enumerate once, reload with integrity checks."""

from __future__ import annotations

import json
import os
import warnings
from pathlib import Path

from .core import (
    Params,
    PartitionUniverse,
    enumerate_universe,
    parse_blocks,
    render_blocks,
    sort_key,
    universe_count,
)
from .errors import CacheCorrupt

FORMAT = "uniset-universe/1"


def default_cache_dir() -> Path:
    env = os.environ.get("UNISET_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "uniset"


def cache_path(c: int, k: int, cache_dir: Path | None = None) -> Path:
    base = Path(cache_dir) if cache_dir else default_cache_dir()
    return base / f"universe-c{c}-k{k}.json"


def save_universe(universe: PartitionUniverse, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    p = universe.params
    doc = {
        "format": FORMAT,
        "c": p.c,
        "k": p.k,
        "count": len(universe),
        "items": [render_blocks(f) for f in universe],
    }
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w") as fh:
        json.dump(doc, fh, separators=(",", ":"))
    tmp.replace(path)
    return path


def load_universe(path: Path, expect: Params | None = None) -> PartitionUniverse:
    """Load and re-verify a cached universe; CacheCorrupt on any mismatch."""
    path = Path(path)
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CacheCorrupt(f"unreadable cache {path}: {exc}") from exc
    for key in ("format", "c", "k", "count", "items"):
        if key not in doc:
            raise CacheCorrupt(f"cache {path} is missing {key!r}")
    if doc["format"] != FORMAT:
        raise CacheCorrupt(f"cache format {doc['format']!r}, wanted {FORMAT!r}")
    params = Params(int(doc["c"]), int(doc["k"]))
    if expect is not None and params != expect:
        raise CacheCorrupt(f"cache holds c={params.c}, k={params.k}; wanted c={expect.c}, k={expect.k}")
    want = universe_count(params.c, params.k)
    if doc["count"] != want or len(doc["items"]) != want:
        raise CacheCorrupt(
            f"cache claims {doc['count']} items, holds {len(doc['items'])}, formula says {want}"
        )
    try:
        items = [parse_blocks(raw, params, expected_len=params.k) for raw in doc["items"]]
    except Exception as exc:
        raise CacheCorrupt(f"cache {path} holds an invalid partition: {exc}") from exc
    if len(set(items)) != len(items):
        raise CacheCorrupt(f"cache {path} holds duplicate partitions")
    if sorted(items, key=sort_key) != items:
        raise CacheCorrupt(f"cache {path} items are not in canonical order")
    return PartitionUniverse(params, items)


def get_or_build(
    params: Params,
    cache_dir: Path | None = None,
    write: bool = True,
    **enum_kwargs,
) -> PartitionUniverse:
    path = cache_path(params.c, params.k, cache_dir)
    if path.exists():
        try:
            return load_universe(path, expect=params)
        except CacheCorrupt as exc:
            warnings.warn(f"rebuilding corrupt cache {path}: {exc}", stacklevel=2)
    universe = enumerate_universe(params, **enum_kwargs)
    if write:
        save_universe(universe, path)
    return universe
