"""Multi-scale image acceleration: pyramid, tiling, reference codec, parallel transcode."""

from .codec import EncodedTile, decode_tile, encode_tile
from .manifest import ManifestEntry, ManifestError, TileManifest
from .pyramid import DEFAULT_LEVELS, TILE_H, TILE_W, TileSpec, build_pyramid, default_levels, tile_grid
from .transcode import DEFAULT_QPS, LOSSLESS_QP, TranscodeError, build_manifest, transcode_all

__all__ = [
    "EncodedTile", "decode_tile", "encode_tile",
    "ManifestEntry", "ManifestError", "TileManifest",
    "DEFAULT_LEVELS", "TILE_H", "TILE_W", "TileSpec", "build_pyramid", "default_levels", "tile_grid",
    "DEFAULT_QPS", "LOSSLESS_QP", "TranscodeError", "build_manifest", "transcode_all",
]
