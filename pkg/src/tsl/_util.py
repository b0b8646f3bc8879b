"""Small shared helpers: atomic output, float formatting, bounded parallelism."""

from __future__ import annotations

import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def fmt17(x: float) -> str:
    """Format a float with 17 significant digits (round-trip stable)."""
    return f"{x:.17g}"


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write `text` to `path` via a temp file + rename in the same directory."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def thread_cap() -> int:
    """Worker cap from TSL_THREADS; 1 (serial) when unset or invalid."""
    raw = os.environ.get("TSL_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def map_ordered(fn: Callable[[T], R], items: Sequence[T]) -> list[R]:
    """Apply `fn` over `items`, possibly in threads, preserving input order."""
    workers = thread_cap()
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
