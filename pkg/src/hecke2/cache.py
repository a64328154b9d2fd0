"""On-disk cache of series.

File layout (little-endian): ``b"FPS2"``, u32 version (1), u64 precision,
u64 word count, then the 64-bit words; bit ``i`` of word ``w`` is the
coefficient of ``x^(64 w + i)``.
"""

from __future__ import annotations

import logging
import os
import struct
import tempfile
import time
from pathlib import Path
from typing import Callable

from .fps2 import BitSeries

__all__ = ["CorruptCache", "write_series", "read_series", "SeriesCache", "MAGIC", "VERSION"]

MAGIC = b"FPS2"
VERSION = 1
_HEADER = struct.Struct("<4sIQQ")

log = logging.getLogger("hecke2.cache")


class CorruptCache(ValueError):
    def __init__(self, path: Path, reason: str):
        super().__init__(f"corrupt cache file {path}: {reason}")
        self.path = Path(path)


def encode(f: BitSeries) -> bytes:
    nwords = (f.prec + 63) // 64
    return _HEADER.pack(MAGIC, VERSION, f.prec, nwords) + f.bits.to_bytes(8 * nwords, "little")


def decode(data: bytes, path: Path) -> BitSeries:
    if len(data) < _HEADER.size:
        raise CorruptCache(path, "truncated header")
    magic, version, prec, nwords = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CorruptCache(path, f"bad magic {magic!r}")
    if version != VERSION:
        raise CorruptCache(path, f"unsupported version {version}")
    if prec < 1 or nwords != (prec + 63) // 64:
        raise CorruptCache(path, f"word count {nwords} does not match precision {prec}")
    body = data[_HEADER.size:]
    if len(body) != 8 * nwords:
        raise CorruptCache(path, f"expected {8 * nwords} payload bytes, found {len(body)}")
    bits = int.from_bytes(body, "little")
    if bits >> prec:
        raise CorruptCache(path, "bits set at or above the precision")
    return BitSeries(bits, prec)


def write_series(path: Path, f: BitSeries) -> None:
    """Atomic write: temp file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(encode(f))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_series(path: Path) -> BitSeries:
    path = Path(path)
    return decode(path.read_bytes(), path)


class SeriesCache:
    """Named series under a directory; ``get`` computes and stores on a miss."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.events: list[tuple[str, str, float]] = []

    def path(self, name: str, prec: int) -> Path:
        return self.root / f"{name}-{prec}.fps2"

    def get(self, name: str, prec: int, build: Callable[[], BitSeries]) -> BitSeries:
        p = self.path(name, prec)
        t0 = time.perf_counter()
        if p.exists():
            f = read_series(p)
            if f.prec != prec:
                raise CorruptCache(p, f"stored precision {f.prec}, expected {prec}")
            kind = "hit"
        else:
            f = build()
            write_series(p, f)
            kind = "miss"
        dt = time.perf_counter() - t0
        self.events.append((name, kind, dt))
        log.info("cache %s for %s (%.4f s)", kind, p.name, dt)
        return f
