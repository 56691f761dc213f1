"""On-disk store of basis elements: ``<root>/<N>/<k>/<m>.qs``."""

from __future__ import annotations

import json
import logging
import os
import tempfile
from fractions import Fraction
from pathlib import Path

from .basis import BasisElement
from .qseries import FORMAT_VERSION, QSeries

__all__ = ["CACHE_ENV", "BasisCache", "cache_get", "cache_put", "default_cache_root"]

log = logging.getLogger(__name__)

CACHE_ENV = "WEAKFORMS_CACHE"


def default_cache_root() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or Path.home() / ".cache"
    return Path(base) / "weakforms"


def _encode(el: BasisElement) -> str:
    rec = {
        "format_version": FORMAT_VERSION,
        "level": el.level,
        "weight": el.weight,
        "m": el.m,
        "method": el.method,
        "series": el.expansion.to_record(),
        "combination": None if el.combination is None else [str(c) for c in el.combination],
    }
    return json.dumps(rec, sort_keys=True)


def _decode(text: str) -> BasisElement:
    rec = json.loads(text)
    if rec.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"cache format version {rec.get('format_version')!r} != {FORMAT_VERSION}")
    comb = rec["combination"]
    if comb is not None:
        comb = tuple(int(c) if Fraction(c).denominator == 1 else Fraction(c) for c in comb)
    return BasisElement(
        int(rec["level"]),
        int(rec["weight"]),
        int(rec["m"]),
        QSeries.from_record(rec["series"]),
        comb,
        method=rec.get("method", "elimination"),
    )


class BasisCache:
    """Directory-backed cache; writes are atomic (temp file + rename)."""

    suffix = ".qs"

    def __init__(self, root: str | os.PathLike | None = None):
        self.root = Path(root) if root is not None else default_cache_root()

    def path(self, level: int, weight: int, m: int) -> Path:
        return self.root / str(level) / str(weight) / f"{m}{self.suffix}"

    def get(self, level: int, weight: int, m: int, precision: int | None = None) -> BasisElement | None:
        """Stored element if it reaches ``precision``; ``None`` on a miss."""
        p = self.path(level, weight, m)
        try:
            text = p.read_text(encoding="utf-8")
        except FileNotFoundError:
            return None
        except OSError as exc:
            log.warning("cache read failed for %s: %s", p, exc)
            return None
        try:
            el = _decode(text)
        except (ValueError, KeyError, TypeError) as exc:
            log.warning("ignoring corrupted cache entry %s: %s", p, exc)
            return None
        if el.key != (level, weight, m):
            log.warning("ignoring mislabelled cache entry %s", p)
            return None
        if precision is not None and el.precision < precision:
            return None
        return el

    def put(self, el: BasisElement) -> BasisElement:
        p = self.path(*el.key)
        p.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=p.name + ".", suffix=".tmp", dir=p.parent)
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(_encode(el))
            os.replace(tmp, p)
        except BaseException:
            try:
                os.unlink(tmp)
            except FileNotFoundError:
                pass
            raise
        return el

    def entries(self) -> list[tuple[int, int, int]]:
        out = []
        if not self.root.is_dir():
            return out
        for f in self.root.glob(f"*/*/*{self.suffix}"):
            try:
                out.append((int(f.parent.parent.name), int(f.parent.name), int(f.stem)))
            except ValueError:
                continue
        return sorted(out)

    def clear(self) -> int:
        n = 0
        for key in self.entries():
            self.path(*key).unlink(missing_ok=True)
            n += 1
        return n


def cache_get(cache: BasisCache, key: tuple[int, int, int], precision: int | None = None):
    return cache.get(*key, precision=precision)


def cache_put(cache: BasisCache, value: BasisElement) -> BasisElement:
    return cache.put(value)
