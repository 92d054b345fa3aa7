"""Shared helpers: seeded RNG streams, sphere sampling, canonical output formats."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

THREADS_ENV = "WAISTLAB_THREADS"


def rng_from(seed) -> np.random.Generator:
    """Generator from an int seed, SeedSequence, or None (fresh entropy)."""
    return np.random.default_rng(seed)


def seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def spawn_rngs(seed, count: int) -> list[np.random.Generator]:
    """Independent child generators.

    Children depend only on (seed, index), never on how work is later
    partitioned, so results are identical for any worker count.
    """
    return [np.random.default_rng(c) for c in seed_sequence(seed).spawn(count)]


def worker_count() -> int:
    """Worker cap from the WAISTLAB_THREADS environment variable (>= 1)."""
    raw = os.environ.get(THREADS_ENV, "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n >= 1:
        return n
    return max(1, os.cpu_count() or 1)


def parallel_map(fn, items):
    """Order-preserving map, threaded when WAISTLAB_THREADS allows it."""
    items = list(items)
    workers = min(worker_count(), len(items)) if items else 1
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def sphere_points(rng: np.random.Generator, count: int, ambient_dim: int) -> np.ndarray:
    """Uniform points on the unit sphere of R^ambient_dim, shape (count, d)."""
    g = rng.standard_normal((count, ambient_dim))
    norms = np.linalg.norm(g, axis=1)
    bad = norms < 1e-300
    if bad.any():
        g[bad, 0] = 1.0
        norms[bad] = 1.0
    return g / norms[:, None]


def ball_points(rng: np.random.Generator, count: int, dim: int, radius: float = 1.0) -> np.ndarray:
    """Uniform points in the centered Euclidean ball of the given radius."""
    u = sphere_points(rng, count, dim)
    r = rng.random(count) ** (1.0 / dim)
    return u * (radius * r)[:, None]


def bernoulli_se(p_hat: float, n: int) -> float:
    """Standard error of an empirical proportion."""
    p = min(max(float(p_hat), 0.0), 1.0)
    return float(np.sqrt(p * (1.0 - p) / max(n, 1)))


def fmt_float(x) -> str:
    """Fixed 17-significant-digit decimal form; canonical across runs."""
    return format(float(x), ".17g")


def _canon(obj, parts: list[str]) -> None:
    if obj is None:
        parts.append("null")
    elif obj is True:
        parts.append("true")
    elif obj is False:
        parts.append("false")
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        v = float(obj)
        if np.isnan(v):
            parts.append('"nan"')
        elif np.isinf(v):
            parts.append('"inf"' if v > 0 else '"-inf"')
        else:
            parts.append(fmt_float(v))
    elif isinstance(obj, str):
        import json

        parts.append(json.dumps(obj))
    elif isinstance(obj, np.ndarray):
        _canon(obj.tolist(), parts)
    elif isinstance(obj, dict):
        parts.append("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                parts.append(", ")
            import json

            parts.append(json.dumps(str(key)))
            parts.append(": ")
            _canon(obj[key], parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple)):
        parts.append("[")
        for i, item in enumerate(obj):
            if i:
                parts.append(", ")
            _canon(item, parts)
        parts.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical_dumps(obj) -> str:
    """Deterministic JSON: sorted keys, .17g floats, fixed separators."""
    parts: list[str] = []
    _canon(obj, parts)
    return "".join(parts)


def csv_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return fmt_float(value)
    return str(value)


def write_csv(path, header: list[str], rows) -> None:
    """CSV with '\\n' newlines and canonical cell formatting (byte-stable)."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(csv_cell(c) for c in row))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def quantile_summary(values, qs=(0.05, 0.25, 0.5, 0.75, 0.95)) -> dict:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return {"count": 0}
    out = {"count": int(arr.size), "min": float(arr.min()), "max": float(arr.max()),
           "mean": float(arr.mean())}
    for q in qs:
        out[f"q{int(round(q * 100)):02d}"] = float(np.quantile(arr, q))
    return out
