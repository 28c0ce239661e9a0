"""Tile manifest: per level, per tile, per QP byte sizes and blob locations.

On disk a manifest is a directory holding ``manifest.csv`` and one payload
blob ``level<N>.bin`` per pyramid level.  ``manifest.csv`` has a single
``#`` header line of ``key=value`` fields followed by one line per encoded
tile::

    level,x,y,w,h,qp,bytes,offset,crc32
"""

from __future__ import annotations

import hashlib
import zlib
from dataclasses import dataclass, field
from pathlib import Path

from .pyramid import TileSpec, grid_shape

MANIFEST_NAME = "manifest.csv"
FORMAT_TAG = "foveatile-manifest"
FIELDS = "level,x,y,w,h,qp,bytes,offset,crc32"


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class ManifestEntry:
    level: int
    x: int
    y: int
    w: int
    h: int
    qp: int
    bytes: int
    offset: int
    crc32: int

    def line(self) -> str:
        return (f"{self.level},{self.x},{self.y},{self.w},{self.h},{self.qp},"
                f"{self.bytes},{self.offset},{self.crc32:08x}")


def blob_name(level: int) -> str:
    return f"level{level}.bin"


@dataclass
class TileManifest:
    source_id: str
    levels: list
    qps: list
    tile: tuple = (256, 144)
    lossless_qp: int | None = None
    entries: dict = field(default_factory=dict)
    blobs: dict = field(default_factory=dict)
    root: Path | None = None

    @property
    def coded_qps(self) -> list:
        extra = [self.lossless_qp] if self.lossless_qp is not None and self.lossless_qp not in self.qps else []
        return list(self.qps) + extra

    def grid(self, level: int):
        w, h = self.levels[level]
        return grid_shape(w, h, self.tile)

    def tile_id(self, level: int, x: int, y: int) -> int:
        return y * self.grid(level)[0] + x

    def tiles(self, level: int) -> list:
        w, h = self.levels[level]
        tw, th = self.tile
        cols, rows = self.grid(level)
        return [TileSpec(level, tx, ty, min(tw, w - tx * tw), min(th, h - ty * th), tx * tw, ty * th)
                for ty in range(rows) for tx in range(cols)]

    def tiles_in_rect(self, level: int, rect) -> list:
        """Tile specs intersecting ``rect = (x0, y0, x1, y1)`` (exclusive upper edges)."""
        x0, y0, x1, y1 = rect
        w, h = self.levels[level]
        tw, th = self.tile
        x0, y0, x1, y1 = max(0, x0), max(0, y0), min(w, x1), min(h, y1)
        if x1 <= x0 or y1 <= y0:
            return []
        out = []
        for ty in range(int(y0 // th), int(-(-y1 // th))):
            for tx in range(int(x0 // tw), int(-(-x1 // tw))):
                out.append(TileSpec(level, tx, ty, min(tw, w - tx * tw), min(th, h - ty * th), tx * tw, ty * th))
        return out

    def entry(self, level: int, x: int, y: int, qp: int) -> ManifestEntry:
        try:
            return self.entries[(level, x, y, qp)]
        except KeyError:
            raise ManifestError(f"manifest has no entry for level {level} tile ({x},{y}) qp {qp}") from None

    def size(self, level: int, x: int, y: int, qp: int) -> int:
        return self.entry(level, x, y, qp).bytes

    def payload(self, level: int, x: int, y: int, qp: int) -> bytes:
        e = self.entry(level, x, y, qp)
        blob = self._blob(level)
        return blob[e.offset:e.offset + e.bytes]

    def _blob(self, level: int) -> bytes:
        if level not in self.blobs:
            if self.root is None:
                raise ManifestError(f"no payload blob available for level {level}")
            self.blobs[level] = (self.root / blob_name(level)).read_bytes()
        return self.blobs[level]

    # -- serialization --------------------------------------------------------

    def header(self) -> str:
        fields = [
            f"source={self.source_id}",
            f"tile={self.tile[0]}x{self.tile[1]}",
            "levels=" + ",".join(f"{w}x{h}" for w, h in self.levels),
            "qps=" + ",".join(str(q) for q in self.qps),
            f"lossless_qp={'' if self.lossless_qp is None else self.lossless_qp}",
            f"fields={FIELDS}",
        ]
        return f"# {FORMAT_TAG} v1 " + " ".join(fields)

    def ordered_entries(self) -> list:
        order = {q: i for i, q in enumerate(self.coded_qps)}
        return sorted(self.entries.values(),
                      key=lambda e: (e.level, e.y, e.x, order.get(e.qp, len(order))))

    def to_text(self) -> str:
        return "\n".join([self.header()] + [e.line() for e in self.ordered_entries()]) + "\n"

    def digest(self) -> str:
        h = hashlib.sha256(self.to_text().encode())
        for level in range(len(self.levels)):
            if level in self.blobs or self.root is not None:
                h.update(hashlib.sha256(self._blob(level)).digest())
        return h.hexdigest()

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for level in range(len(self.levels)):
            (out / blob_name(level)).write_bytes(self._blob(level))
        (out / MANIFEST_NAME).write_text(self.to_text())
        return out

    @classmethod
    def from_text(cls, text: str, root=None) -> "TileManifest":
        lines = text.splitlines()
        if not lines or not lines[0].startswith(f"# {FORMAT_TAG} v1"):
            raise ManifestError("not a tile manifest (missing header line)")
        meta = dict(tok.split("=", 1) for tok in lines[0].split()[3:])
        tw, th = (int(v) for v in meta["tile"].split("x"))
        levels = [tuple(int(v) for v in lv.split("x")) for lv in meta["levels"].split(",")]
        qps = [int(v) for v in meta["qps"].split(",") if v]
        lossless = int(meta["lossless_qp"]) if meta.get("lossless_qp") else None
        m = cls(meta["source"], levels, qps, (tw, th), lossless, root=Path(root) if root else None)
        for n, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            parts = line.split(",")
            if len(parts) != 9:
                raise ManifestError(f"manifest line {n}: expected 9 fields, got {len(parts)}")
            vals = [int(p) for p in parts[:8]] + [int(parts[8], 16)]
            e = ManifestEntry(*vals)
            m.entries[(e.level, e.x, e.y, e.qp)] = e
        return m

    @classmethod
    def load(cls, path) -> "TileManifest":
        path = Path(path)
        if path.is_dir():
            root, text = path, (path / MANIFEST_NAME).read_text()
        else:
            root, text = path.parent, path.read_text()
        return cls.from_text(text, root=root)

    # -- checks ---------------------------------------------------------------

    def missing(self) -> list:
        """Keys of (level, x, y, qp) required by the grid but absent."""
        gaps = []
        for level in range(len(self.levels)):
            for t in self.tiles(level):
                for qp in self.coded_qps:
                    if (level, t.x, t.y, qp) not in self.entries:
                        gaps.append((level, t.x, t.y, qp))
        return gaps

    def verify(self) -> None:
        gaps = self.missing()
        if gaps:
            raise ManifestError(f"manifest incomplete: {len(gaps)} entries missing, first {gaps[0]}")
        for e in self.entries.values():
            data = self._blob(e.level)[e.offset:e.offset + e.bytes]
            if len(data) != e.bytes or zlib.crc32(data) != e.crc32:
                raise ManifestError(f"checksum mismatch at level {e.level} tile ({e.x},{e.y}) qp {e.qp}")
