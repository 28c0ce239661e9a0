"""Resolution pyramid and the fixed-size tile grid laid over each level."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

TILE_W, TILE_H = 256, 144

# resolution ladder used for the s-impact subjective test
DEFAULT_LEVELS = [
    (4096, 2160), (2880, 1620), (2560, 1440), (1920, 1080),
    (1600, 900), (1280, 720), (720, 480), (320, 240),
]


def _area_weights(n_in: int, n_out: int) -> sparse.csr_matrix:
    """Rows average the input interval each output sample covers (fractional overlap)."""
    scale = n_in / n_out
    rows, cols, vals = [], [], []
    for o in range(n_out):
        lo, hi = o * scale, (o + 1) * scale
        i0, i1 = int(np.floor(lo)), min(n_in, int(np.ceil(hi)))
        for i in range(i0, i1):
            ov = min(hi, i + 1) - max(lo, i)
            if ov > 0:
                rows.append(o)
                cols.append(i)
                vals.append(ov / scale)
    return sparse.csr_matrix((vals, (rows, cols)), shape=(n_out, n_in))


def box_downsample(img: np.ndarray, width: int, height: int) -> np.ndarray:
    """Separable box average of ``img`` to ``width`` x ``height``; uint8 out."""
    h, w = img.shape[:2]
    if (width, height) == (w, h):
        return img.copy()
    if width > w or height > h:
        raise ValueError(f"level {width}x{height} exceeds native {w}x{h}")
    wy = _area_weights(h, height)
    wx = _area_weights(w, width)
    out = np.empty((height, width, img.shape[2]), dtype=np.uint8)
    for ch in range(img.shape[2]):
        plane = img[..., ch].astype(np.float64)
        res = (wx @ (wy @ plane).T).T
        out[..., ch] = np.clip(np.floor(res + 0.5), 0, 255).astype(np.uint8)
    return out


def default_levels(native) -> list:
    """The standard ladder restricted to sizes that fit, led by the native size."""
    w, h = native
    fits = [lv for lv in DEFAULT_LEVELS if lv[0] <= w and lv[1] <= h and lv != (w, h)]
    return [(w, h)] + fits


def build_pyramid(img: np.ndarray, levels=None) -> list:
    """One image per entry of ``levels`` (descending), each resampled from native."""
    img = np.asarray(img)
    h, w = img.shape[:2]
    if levels is None:
        levels = default_levels((w, h))
    levels = [tuple(lv) for lv in levels]
    px = [lw * lh for lw, lh in levels]
    if px != sorted(px, reverse=True):
        raise ValueError(f"levels must be sorted descending: {levels}")
    for lw, lh in levels:
        if lw > w or lh > h:
            raise ValueError(f"level {lw}x{lh} exceeds native {w}x{h}")
    return [box_downsample(img, lw, lh) for lw, lh in levels]


@dataclass(frozen=True)
class TileSpec:
    level: int
    x: int
    y: int
    w: int
    h: int
    px: int  # pixel origin in the level image
    py: int

    @property
    def rect(self):
        return self.px, self.py, self.px + self.w, self.py + self.h


def grid_shape(width: int, height: int, tile=(TILE_W, TILE_H)):
    """(columns, rows) of the tile grid for a level."""
    return -(-width // tile[0]), -(-height // tile[1])


def tile_grid(level: int, width: int, height: int, tile=(TILE_W, TILE_H)) -> list:
    """Row-major tile specs; edge tiles are clipped to the image."""
    tw, th = tile
    cols, rows = grid_shape(width, height, tile)
    specs = []
    for ty in range(rows):
        for tx in range(cols):
            px, py = tx * tw, ty * th
            specs.append(TileSpec(level, tx, ty, min(tw, width - px), min(th, height - py), px, py))
    return specs
