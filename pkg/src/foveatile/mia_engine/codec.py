"""Reference intra codec used to measure tile sizes.

Layout of a payload::

    header   '>4sHHd'  magic b'FVT1', width, height, quantization step q
    body     Exp-Golomb bitstream, MSB first, zero padded to a byte

The body walks the Y, Cb and Cr planes (chroma 4:2:0) in raster block order.
Each 8x8 block is level shifted by 128, transformed with an orthonormal DCT-II,
quantized as ``sign(c) * floor(|c| / q + 1/2)`` and scanned in zigzag order.
Per block the symbols are::

    se(dc - previous dc)   ue(number of nonzero AC)   [ue(zero run) se(level)]...

DC prediction restarts at 0 for every plane.  Planes whose size is not a
multiple of 8 are edge replicated for coding and cropped on decode.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"FVT1"
HEADER = struct.Struct(">4sHHd")
BLOCK = 8


def _dct_matrix(n: int = BLOCK) -> np.ndarray:
    k = np.arange(n)[:, None]
    i = np.arange(n)[None, :]
    m = np.cos(np.pi * (2 * i + 1) * k / (2 * n)) * math.sqrt(2.0 / n)
    m[0] /= math.sqrt(2.0)
    return m


DCT = _dct_matrix()


def _zigzag(n: int = BLOCK) -> np.ndarray:
    order = sorted(((r, c) for r in range(n) for c in range(n)),
                   key=lambda rc: (rc[0] + rc[1], rc[1] if (rc[0] + rc[1]) % 2 == 0 else rc[0]))
    return np.array([r * n + c for r, c in order])


ZIGZAG = _zigzag()
UNZIGZAG = np.argsort(ZIGZAG)


class CodecError(ValueError):
    pass


# -- colour -------------------------------------------------------------------


def rgb_to_ycbcr(rgb: np.ndarray):
    """Full-range BT.601; returns uint8 Y and 2x2-averaged uint8 Cb, Cr."""
    f = np.asarray(rgb, dtype=np.float64)
    r, g, b = f[..., 0], f[..., 1], f[..., 2]
    y = 0.299 * r + 0.587 * g + 0.114 * b
    cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b
    cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b
    return _to_u8(y), _to_u8(_subsample(cb)), _to_u8(_subsample(cr))


def ycbcr_to_rgb(y, cb, cr) -> np.ndarray:
    h, w = y.shape
    cbu = np.repeat(np.repeat(cb, 2, axis=0), 2, axis=1)[:h, :w].astype(np.float64) - 128.0
    cru = np.repeat(np.repeat(cr, 2, axis=0), 2, axis=1)[:h, :w].astype(np.float64) - 128.0
    yf = y.astype(np.float64)
    r = yf + 1.402 * cru
    g = yf - 0.344136 * cbu - 0.714136 * cru
    b = yf + 1.772 * cbu
    return np.stack([_to_u8(r), _to_u8(g), _to_u8(b)], axis=-1)


def _to_u8(x):
    return np.clip(np.floor(x + 0.5), 0, 255).astype(np.uint8)


def _subsample(plane):
    h, w = plane.shape
    ph, pw = h + (h & 1), w + (w & 1)
    if (ph, pw) != (h, w):
        plane = np.pad(plane, ((0, ph - h), (0, pw - w)), mode="edge")
    return plane.reshape(ph // 2, 2, pw // 2, 2).mean(axis=(1, 3))


def chroma_shape(w: int, h: int):
    return (h + 1) // 2, (w + 1) // 2


# -- transform ------------------------------------------------------------------


def _to_blocks(plane: np.ndarray) -> np.ndarray:
    h, w = plane.shape
    ph, pw = -(-h // BLOCK) * BLOCK, -(-w // BLOCK) * BLOCK
    if (ph, pw) != (h, w):
        plane = np.pad(plane, ((0, ph - h), (0, pw - w)), mode="edge")
    b = plane.reshape(ph // BLOCK, BLOCK, pw // BLOCK, BLOCK).swapaxes(1, 2)
    return b.reshape(-1, BLOCK, BLOCK)


def _from_blocks(blocks: np.ndarray, h: int, w: int) -> np.ndarray:
    bh, bw = -(-h // BLOCK), -(-w // BLOCK)
    plane = blocks.reshape(bh, bw, BLOCK, BLOCK).swapaxes(1, 2).reshape(bh * BLOCK, bw * BLOCK)
    return plane[:h, :w]


def forward_dct(plane: np.ndarray) -> np.ndarray:
    """Zigzag-ordered DCT coefficients, shape (blocks, 64)."""
    blocks = _to_blocks(plane.astype(np.float64) - 128.0)
    coef = DCT @ blocks @ DCT.T
    return coef.reshape(-1, BLOCK * BLOCK)[:, ZIGZAG]


def quantize(coef: np.ndarray, q: float) -> np.ndarray:
    return (np.sign(coef) * np.floor(np.abs(coef) / q + 0.5)).astype(np.int64)


def reconstruct(levels: np.ndarray, q: float, h: int, w: int) -> np.ndarray:
    coef = (levels[:, UNZIGZAG] * q).reshape(-1, BLOCK, BLOCK)
    pix = DCT.T @ coef @ DCT + 128.0
    return _to_u8(_from_blocks(pix, h, w))


# -- entropy coding -------------------------------------------------------------


def _se_code(v: np.ndarray) -> np.ndarray:
    return np.where(v > 0, 2 * v - 1, -2 * v)


def _symbols(levels: np.ndarray, plane_starts: np.ndarray) -> np.ndarray:
    """Exp-Golomb code numbers for every block, in bitstream order."""
    nb = levels.shape[0]
    dc = levels[:, 0]
    prev = np.empty_like(dc)
    prev[0] = 0
    prev[1:] = dc[:-1]
    prev[plane_starts] = 0
    ac = levels[:, 1:]
    bi, pos = np.nonzero(ac)
    vals = ac[bi, pos]
    pos = pos + 1
    nnz = np.bincount(bi, minlength=nb)
    first = np.zeros(nb + 1, dtype=np.int64)
    np.cumsum(nnz, out=first[1:])
    same = np.zeros(bi.size, dtype=bool)
    same[1:] = bi[1:] == bi[:-1]
    prev_pos = np.zeros_like(pos)
    prev_pos[1:] = pos[:-1]
    runs = pos - np.where(same, prev_pos, 0) - 1

    counts = 2 + 2 * nnz
    start = np.zeros(nb, dtype=np.int64)
    np.cumsum(counts[:-1], out=start[1:])
    out = np.empty(int(counts.sum()), dtype=np.int64)
    out[start] = _se_code(dc - prev)
    out[start + 1] = nnz
    k = np.arange(bi.size) - first[bi]
    slot = start[bi] + 2 + 2 * k
    out[slot] = runs
    out[slot + 1] = _se_code(vals)
    return out


def _pack_ue(codes: np.ndarray) -> bytes:
    """Pack code numbers as ue(v): n zeros then the n+1 bits of v+1."""
    if codes.size == 0:
        return b""
    vals = (codes + 1).astype(np.int64)
    n = np.frexp(vals.astype(np.float64))[1].astype(np.int64) - 1
    lengths = 2 * n + 1
    starts = np.zeros(vals.size, dtype=np.int64)
    np.cumsum(lengths[:-1], out=starts[1:])
    total = int(lengths.sum())
    nbits = n + 1
    grp = np.zeros(vals.size, dtype=np.int64)
    np.cumsum(nbits[:-1], out=grp[1:])
    j = np.arange(int(nbits.sum())) - np.repeat(grp, nbits)
    shift = np.repeat(n, nbits) - j
    bits = np.zeros(total, dtype=np.uint8)
    bits[np.repeat(starts + n, nbits) + j] = (np.repeat(vals, nbits) >> shift) & 1
    return np.packbits(bits).tobytes()


# -- public API -----------------------------------------------------------------


@dataclass
class PlaneCoefs:
    """Transform of one tile, reusable across quantization steps."""
    width: int
    height: int
    coefs: list  # Y, Cb, Cr zigzag coefficient arrays
    source_y: np.ndarray

    @property
    def plane_shapes(self):
        ch, cw = chroma_shape(self.width, self.height)
        return [(self.height, self.width), (ch, cw), (ch, cw)]


def analyze_planes(y, cb, cr) -> PlaneCoefs:
    h, w = y.shape
    if cb.shape != chroma_shape(w, h) or cr.shape != chroma_shape(w, h):
        raise CodecError(f"chroma planes must be {chroma_shape(w, h)} for a {w}x{h} tile")
    return PlaneCoefs(w, h, [forward_dct(p) for p in (y, cb, cr)], y)


def analyze_tile(rgb: np.ndarray) -> PlaneCoefs:
    rgb = np.asarray(rgb)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise CodecError(f"expected an HxWx3 tile, got {rgb.shape}")
    return analyze_planes(*rgb_to_ycbcr(rgb))


def encode_coefs(pc: PlaneCoefs, q: float, with_psnr: bool = True):
    """Return ``(payload, psnr_y)`` for the pre-analyzed tile at step ``q``."""
    if not q >= 1:
        raise CodecError(f"quantization step must be >= 1, got {q}")
    levels = [quantize(c, q) for c in pc.coefs]
    sizes = [lv.shape[0] for lv in levels]
    plane_starts = np.array([0, sizes[0], sizes[0] + sizes[1]])
    body = _pack_ue(_symbols(np.concatenate(levels), plane_starts))
    payload = HEADER.pack(MAGIC, pc.width, pc.height, float(q)) + body
    psnr = None
    if with_psnr:
        rec = reconstruct(levels[0], q, pc.height, pc.width)
        psnr = psnr_db(pc.source_y, rec)
    return payload, psnr


def encode_planes(y, cb, cr, q: float) -> bytes:
    return encode_coefs(analyze_planes(y, cb, cr), q, with_psnr=False)[0]


def psnr_db(ref: np.ndarray, test: np.ndarray) -> float:
    mse = np.mean((ref.astype(np.float64) - test.astype(np.float64)) ** 2)
    if mse == 0:
        return float("inf")
    return 10.0 * math.log10(255.0**2 / mse)


class _BitReader:
    def __init__(self, data: bytes):
        self.bits = "".join(f"{b:08b}" for b in data) if len(data) < 64 else \
            bin(int.from_bytes(data, "big"))[2:].zfill(8 * len(data))
        self.pos = 0

    def ue(self) -> int:
        one = self.bits.find("1", self.pos)
        if one < 0:
            raise CodecError("truncated bitstream")
        n = one - self.pos
        end = one + n + 1
        if end > len(self.bits):
            raise CodecError("truncated bitstream")
        v = int(self.bits[one:end], 2) - 1
        self.pos = end
        return v

    def se(self) -> int:
        k = self.ue()
        return (k + 1) // 2 if k & 1 else -(k // 2)


def decode_levels(payload: bytes):
    """Parse a payload back into ``(width, height, q, [Y, Cb, Cr] level arrays)``."""
    if len(payload) < HEADER.size:
        raise CodecError("payload shorter than header")
    magic, w, h, q = HEADER.unpack_from(payload)
    if magic != MAGIC:
        raise CodecError(f"bad magic {magic!r}")
    rd = _BitReader(payload[HEADER.size:])
    ch, cw = chroma_shape(w, h)
    planes = []
    for ph, pw in ((h, w), (ch, cw), (ch, cw)):
        nb = -(-ph // BLOCK) * -(-pw // BLOCK)
        lv = np.zeros((nb, BLOCK * BLOCK), dtype=np.int64)
        dc = 0
        for b in range(nb):
            dc += rd.se()
            lv[b, 0] = dc
            p = 0
            for _ in range(rd.ue()):
                p += rd.ue() + 1
                if p >= BLOCK * BLOCK:
                    raise CodecError("coefficient run past end of block")
                lv[b, p] = rd.se()
        planes.append(lv)
    return w, h, q, planes


def decode_planes(payload: bytes):
    w, h, q, levels = decode_levels(payload)
    ch, cw = chroma_shape(w, h)
    return (reconstruct(levels[0], q, h, w),
            reconstruct(levels[1], q, ch, cw),
            reconstruct(levels[2], q, ch, cw))


def decode_tile(payload: bytes) -> np.ndarray:
    return ycbcr_to_rgb(*decode_planes(payload))


@dataclass(frozen=True)
class EncodedTile:
    spec: object
    qp: float
    payload: bytes
    psnr_y: float

    @property
    def byte_size(self) -> int:
        return len(self.payload)


def encode_tile(rgb: np.ndarray, q: float, spec=None, qp=None) -> EncodedTile:
    from ..vision_models import q_to_qp

    q_val = getattr(q, "q", q)
    payload, psnr = encode_coefs(analyze_tile(rgb), q_val)
    return EncodedTile(spec, qp if qp is not None else getattr(q, "qp", q_to_qp(q_val)), payload, psnr)
