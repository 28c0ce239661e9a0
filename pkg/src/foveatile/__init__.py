"""Foveated tile-quality planning and retrieval simulation for tiled gigapixel imagery."""

from .vision_models import (GGaussParams, QuantStep, VisionZone, classify_zone, cone_density, denormalize_q,
                            denormalize_s, ggauss, normalize_q, normalize_s, q_hat, q_hat_joint, s_hat)

__version__ = "0.1.0"

__all__ = [
    "GGaussParams", "QuantStep", "VisionZone", "classify_zone", "cone_density", "denormalize_q",
    "denormalize_s", "ggauss", "normalize_q", "normalize_s", "q_hat", "q_hat_joint", "s_hat",
]
