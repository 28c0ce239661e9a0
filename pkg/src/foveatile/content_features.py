"""Image features feeding the content-dependent width ``c`` of the s-impact model."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate

CVA_RADIUS_DEG = 9.0
C_MIN, C_MAX = 0.05, 5.0

SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
SOBEL_Y = SOBEL_X.T.copy()


@dataclass(frozen=True)
class GaborConfig:
    wavelength: float = 3.0
    sigma: float = 1.5
    aspect: float = 0.5
    phase: float = 0.0


@dataclass(frozen=True)
class ContentFeatures:
    rho_si: float
    rho_mu_i: float
    rho_mu_gamma_v: float


def luminance(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        return img
    return 0.299 * img[..., 0] + 0.587 * img[..., 1] + 0.114 * img[..., 2]


def _check_image(img: np.ndarray):
    if img.ndim not in (2, 3) or img.shape[0] < 3 or img.shape[1] < 3:
        raise ValueError(f"image must be at least 3x3, got shape {img.shape}")


def _crop(img: np.ndarray, roi):
    if roi is None:
        return img
    x0, y0, x1, y1 = roi
    h, w = img.shape[:2]
    if not (0 <= x0 < x1 <= w and 0 <= y0 < y1 <= h):
        raise ValueError(f"roi {roi} outside image bounds {w}x{h}")
    if x1 - x0 < 3 or y1 - y0 < 3:
        raise ValueError(f"roi {roi} smaller than the 3x3 kernel")
    return img[y0:y1, x0:x1]


def spatial_information(img: np.ndarray, roi=None) -> float:
    """Population std-dev of Sobel gradient magnitude of luminance inside ``roi``.

    ``roi`` is ``(x0, y0, x1, y1)`` with exclusive upper edges; only pixels whose
    3x3 neighbourhood lies inside the roi contribute.
    """
    img = np.asarray(img)
    _check_image(img)
    y = luminance(_crop(img, roi))
    gx = correlate(y, SOBEL_X, mode="constant")[1:-1, 1:-1]
    gy = correlate(y, SOBEL_Y, mode="constant")[1:-1, 1:-1]
    return float(np.std(np.hypot(gx, gy)))


def mean_hsi_intensity(img: np.ndarray) -> float:
    img = np.asarray(img, dtype=np.float64)
    if img.size == 0:
        raise ValueError("empty image")
    return float(img[..., :3].sum(axis=-1).mean() / (3.0 * 255.0))


def gabor_kernel(cfg: GaborConfig = GaborConfig()) -> np.ndarray:
    """3x3 zero-mean Gabor kernel whose carrier runs along x (vertical structures)."""
    ys, xs = np.mgrid[-1:2, -1:2].astype(np.float64)
    env = np.exp(-(xs**2 + (cfg.aspect * ys) ** 2) / (2.0 * cfg.sigma**2))
    k = env * np.cos(2.0 * math.pi * xs / cfg.wavelength + cfg.phase)
    return k - k.mean()


def gabor_vertical_energy(img: np.ndarray, cfg: GaborConfig = GaborConfig()) -> float:
    img = np.asarray(img)
    _check_image(img)
    resp = correlate(luminance(img), gabor_kernel(cfg), mode="constant")[1:-1, 1:-1]
    return float(np.abs(resp).mean() / 255.0)


def cva_roi(shape, gaze=None, ppd=None, fov_h: float = 110.0):
    """Bounding square of the 9-degree disc around ``gaze``, clipped to the image."""
    h, w = shape[:2]
    if ppd is None:
        ppd = w / fov_h
    gx, gy = gaze if gaze is not None else (w / 2.0, h / 2.0)
    r = CVA_RADIUS_DEG * ppd
    x0, x1 = max(0, int(math.floor(gx - r))), min(w, int(math.ceil(gx + r)))
    y0, y1 = max(0, int(math.floor(gy - r))), min(h, int(math.ceil(gy + r)))
    return x0, y0, x1, y1


def extract_features(img: np.ndarray, gaze=None, ppd=None, fov_h: float = 110.0,
                     gabor: GaborConfig = GaborConfig()) -> ContentFeatures:
    """SI over the central-vision square; intensity and Gabor energy over the whole FoV image."""
    img = np.asarray(img)
    roi = cva_roi(img.shape, gaze, ppd, fov_h)
    return ContentFeatures(
        rho_si=spatial_information(img, roi),
        rho_mu_i=mean_hsi_intensity(img),
        rho_mu_gamma_v=gabor_vertical_energy(img, gabor),
    )


def predict_c_raw(f: ContentFeatures) -> float:
    return -0.002 * f.rho_si + 0.4342 * f.rho_mu_i + 3.9029 * f.rho_mu_gamma_v + 0.2557


def predict_c(f: ContentFeatures) -> float:
    return min(C_MAX, max(C_MIN, predict_c_raw(f)))
