"""Deterministic synthetic test images (seeded)."""

from __future__ import annotations

import numpy as np

KINDS = ("constant", "step", "stripes-v", "stripes-h", "checker", "sky", "grass", "composite", "gigapixel")


def _u8(x):
    return np.clip(np.floor(x + 0.5), 0, 255).astype(np.uint8)


def constant(width, height, color=(128, 128, 128)):
    return np.broadcast_to(np.asarray(color, dtype=np.uint8), (height, width, 3)).copy()


def step_edge(width, height, lo=0, hi=255):
    """Left half ``lo``, right half ``hi``."""
    img = np.full((height, width, 3), lo, dtype=np.uint8)
    img[:, width // 2:] = hi
    return img


def stripes(width, height, period=2, vertical=True, lo=0, hi=255):
    """Square-wave stripes; ``vertical`` stripes vary along x."""
    idx = np.arange(width if vertical else height)
    row = np.where((idx % period) < period / 2, lo, hi).astype(np.uint8)
    plane = np.broadcast_to(row[None, :], (height, width)) if vertical else \
        np.broadcast_to(row[:, None], (height, width))
    return np.repeat(plane[..., None], 3, axis=2).copy()


def checker(width, height, lo=0, hi=255):
    yy, xx = np.mgrid[0:height, 0:width]
    plane = np.where((xx + yy) % 2 == 0, lo, hi).astype(np.uint8)
    return np.repeat(plane[..., None], 3, axis=2)


def _sky_planes(width, height, rng, y0=0, total_h=None):
    total_h = total_h or height
    t = ((np.arange(height, dtype=np.float32) + y0) / max(1, total_h - 1))[:, None]
    noise = rng.normal(0.0, 2.5, size=(height, width)).astype(np.float32)
    base = np.stack([110 + 60 * t, 160 + 45 * t, 235 - 10 * t], axis=-1)
    return base + noise[..., None]


def sky(width, height, seed=0):
    """Smooth vertical gradient with faint sensor-like noise."""
    return _u8(_sky_planes(width, height, np.random.default_rng(seed)))


def _grass_luma(width, height, rng):
    xs = np.arange(width, dtype=np.float32)[None, :]
    ys = np.arange(height, dtype=np.float32)[:, None]
    phase = rng.uniform(0, 2 * np.pi, size=(1, width)).astype(np.float32)
    blades = np.sin(1.9 * xs + 0.35 * ys + phase) * np.sin(0.7 * ys + 0.5 * phase)
    speckle = rng.normal(0.0, 1.0, size=(height, width)).astype(np.float32)
    return 48.0 * blades + 26.0 * speckle


def grass(width, height, seed=0):
    """High-contrast, high-frequency green texture."""
    lum = _grass_luma(width, height, np.random.default_rng(seed))
    rgb = np.stack([70 + 0.6 * lum, 130 + lum, 50 + 0.5 * lum], axis=-1)
    return _u8(rgb)


def composite(width, height, seed=0, horizon=0.45):
    """Sky above ``horizon`` (fraction of height), grass below."""
    rng = np.random.default_rng(seed)
    split = int(round(height * horizon))
    out = np.empty((height, width, 3), dtype=np.uint8)
    out[:split] = _u8(_sky_planes(width, split, rng))
    lum = _grass_luma(width, height - split, rng)
    out[split:] = _u8(np.stack([70 + 0.6 * lum, 130 + lum, 50 + 0.5 * lum], axis=-1))
    return out


def gigapixel(width=8192, height=4320, seed=0):
    """Procedural panorama: sky, a band of buildings, and textured ground.

    Generated in horizontal bands to bound peak memory.
    """
    rng = np.random.default_rng(seed)
    out = np.empty((height, width, 3), dtype=np.uint8)
    horizon = int(height * 0.4)
    skyline = int(height * 0.55)
    n_bld = max(4, width // 180)
    edges = np.sort(rng.integers(0, width, size=n_bld))
    tops = rng.integers(horizon, skyline, size=n_bld)
    shades = rng.integers(60, 200, size=(n_bld, 3))
    col_idx = np.searchsorted(edges, np.arange(width), side="right") - 1
    band = 256
    for y0 in range(0, height, band):
        y1 = min(height, y0 + band)
        h = y1 - y0
        ys = np.arange(y0, y1)[:, None]
        rgb = _sky_planes(width, h, rng, y0=y0, total_h=skyline)
        lum = _grass_luma(width, h, rng)
        ground = np.stack([70 + 0.6 * lum, 130 + lum, 50 + 0.5 * lum], axis=-1)
        rgb = np.where((ys >= skyline)[..., None], ground, rgb)
        valid = col_idx >= 0
        top = np.where(valid, tops[np.maximum(col_idx, 0)], height)
        in_bld = (ys >= top[None, :]) & (ys < skyline) & valid[None, :]
        if in_bld.any():
            shade = shades[np.maximum(col_idx, 0)].astype(np.float32)
            xs = np.arange(width)[None, :]
            windows = (((xs // 12) % 3 == 0) & ((ys // 20) % 2 == 0)).astype(np.float32)
            facade = shade[None, :, :] * (1.0 - 0.35 * windows[..., None])
            rgb = np.where(in_bld[..., None], facade, rgb)
        out[y0:y1] = _u8(rgb)
    return out


def make(kind: str, width: int, height: int, seed: int = 0) -> np.ndarray:
    if kind == "constant":
        return constant(width, height)
    if kind == "step":
        return step_edge(width, height)
    if kind == "stripes-v":
        return stripes(width, height, vertical=True)
    if kind == "stripes-h":
        return stripes(width, height, vertical=False)
    if kind == "checker":
        return checker(width, height)
    if kind == "sky":
        return sky(width, height, seed)
    if kind == "grass":
        return grass(width, height, seed)
    if kind == "composite":
        return composite(width, height, seed)
    if kind == "gigapixel":
        return gigapixel(width, height, seed)
    raise ValueError(f"unknown synthetic image kind {kind!r}; choose from {', '.join(KINDS)}")
