"""Coordinator/worker transcode of every pyramid tile to the QP ladder."""

from __future__ import annotations

import logging
import re
import zlib
from concurrent.futures import ProcessPoolExecutor

from ..vision_models import qp_to_q
from . import codec
from .manifest import ManifestEntry, TileManifest
from .pyramid import TILE_H, TILE_W, build_pyramid, tile_grid

log = logging.getLogger(__name__)

DEFAULT_QPS = [22, 25, 28, 31, 34, 37, 40, 43, 46, 49]
LOSSLESS_QP = 4  # q = 1


class TranscodeError(RuntimeError):
    pass


def _encode_row(job):
    """Worker: encode one tile row of a level at every QP.

    Returns ``(level, row, [(spec, [payload per qp])])``.
    """
    level, row, strip, specs, qps = job
    out = []
    for spec in specs:
        try:
            tile = strip[:, spec.px:spec.px + spec.w]
            pc = codec.analyze_tile(tile)
            payloads = [codec.encode_coefs(pc, qp_to_q(qp), with_psnr=False)[0] for qp in qps]
        except Exception as exc:
            raise TranscodeError(f"level {level} tile ({spec.x},{spec.y}): {exc}") from exc
        out.append((spec, payloads))
    return level, row, out


def _jobs(pyramid, qps, tile):
    for level, img in enumerate(pyramid):
        h, w = img.shape[:2]
        specs = tile_grid(level, w, h, tile)
        rows = {}
        for s in specs:
            rows.setdefault(s.y, []).append(s)
        for row, rs in sorted(rows.items()):
            py = rs[0].py
            yield level, row, img[py:py + rs[0].h], rs, qps


def transcode_all(pyramid, qp_ladder=DEFAULT_QPS, workers: int = 1, tile=(TILE_W, TILE_H),
                  source_id: str = "source", lossless_qp: int | None = None,
                  retries: int = 1) -> TileManifest:
    """Encode every tile of every level; the result is independent of ``workers``."""
    qps = [int(q) for q in qp_ladder]
    if not qps:
        raise ValueError("QP ladder is empty")
    coded = qps + ([lossless_qp] if lossless_qp is not None and lossless_qp not in qps else [])
    jobs = list(_jobs(pyramid, coded, tile))
    results = {}

    def run_inline(job, exc=None):
        for attempt in range(retries + 1):
            try:
                return _encode_row(job)
            except TranscodeError as err:
                exc = err
                log.warning("retrying %s (attempt %d): %s", job[:2], attempt + 1, err)
        raise TranscodeError(f"transcode failed after {retries} retries: {exc}") from exc

    if workers <= 1:
        for job in jobs:
            lv, row, out = run_inline(job)
            results[(lv, row)] = out
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [(job, pool.submit(_encode_row, job)) for job in jobs]
            for job, fut in futures:
                try:
                    lv, row, out = fut.result()
                except Exception as err:
                    if retries <= 0:
                        raise TranscodeError(f"transcode failed: {err}") from err
                    log.warning("worker failed on level %d row %d: %s", job[0], job[1], err)
                    lv, row, out = run_inline(job, err)
                results[(lv, row)] = out

    levels = [(img.shape[1], img.shape[0]) for img in pyramid]
    source_id = re.sub(r"\s+", "_", source_id) or "source"
    manifest = TileManifest(source_id, levels, qps, tuple(tile), lossless_qp)
    for level in range(len(pyramid)):
        blob = bytearray()
        for (lv, row) in sorted(k for k in results if k[0] == level):
            for spec, payloads in results[(lv, row)]:
                for qp, data in zip(coded, payloads):
                    manifest.entries[(level, spec.x, spec.y, qp)] = ManifestEntry(
                        level, spec.x, spec.y, spec.w, spec.h, qp, len(data), len(blob), zlib.crc32(data))
                    blob += data
        manifest.blobs[level] = bytes(blob)
    return manifest


def build_manifest(img, levels=None, qp_ladder=DEFAULT_QPS, workers: int = 1, tile=(TILE_W, TILE_H),
                   source_id: str = "source", lossless_qp: int | None = LOSSLESS_QP) -> TileManifest:
    return transcode_all(build_pyramid(img, levels), qp_ladder, workers, tile, source_id, lossless_qp)
