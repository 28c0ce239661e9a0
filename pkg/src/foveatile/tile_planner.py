"""Gaze-relative quality rings and per-tile (level, QP) foveation plans."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .vision_models import (FOV_HALF_WIDTH, Q_MIN, VisionZone, classify_zone, q_hat, q_hat_joint,
                            qp_to_q, s_hat)

DEFAULT_RING_EDGES = (0.0, 4.5, 9.0, 16.0, 23.0, 30.0, 42.5, 55.0)
MODELS = ("q", "s", "joint")
ANCHORS = ("relative", "absolute")
TILE_POINTS = ("nearest", "center")
_REL_TOL = 1e-9


class PlanningError(ValueError):
    pass


@dataclass(frozen=True)
class ViewportGeometry:
    """Rendered FoV of ``width`` x ``height`` pixels placed at ``origin`` in a level image.

    ``gaze`` is in viewport pixel coordinates and defaults to the centre.
    """
    width: int
    height: int
    fov_h: float = 110.0
    gaze: tuple | None = None
    origin: tuple = (0, 0)
    level: int = 0

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"viewport must be non-empty, got {self.width}x{self.height}")
        if not 0 < self.fov_h <= 220:
            raise ValueError(f"fov_h must lie in (0, 220], got {self.fov_h}")
        gx, gy = self.gaze_xy
        if not (0 <= gx <= self.width and 0 <= gy <= self.height):
            raise ValueError(f"gaze {self.gaze} outside the {self.width}x{self.height} viewport")

    @property
    def dpp(self) -> float:
        return self.fov_h / self.width

    @property
    def gaze_xy(self):
        return self.gaze if self.gaze is not None else (self.width / 2.0, self.height / 2.0)

    @property
    def gaze_level(self):
        gx, gy = self.gaze_xy
        return self.origin[0] + gx, self.origin[1] + gy

    @property
    def rect(self):
        x0, y0 = self.origin
        return x0, y0, x0 + self.width, y0 + self.height

    @classmethod
    def around(cls, gaze_level, level_size, view_size=(2560, 1440), fov_h: float = 110.0, level: int = 0):
        """Viewport of ``view_size`` centred on a level-image gaze point, shifted to stay inside.

        Levels smaller than ``view_size`` are shown whole.
        """
        lw, lh = level_size
        gx, gy = gaze_level
        if not (0 <= gx <= lw and 0 <= gy <= lh):
            raise PlanningError(f"gaze ({gx}, {gy}) outside level image {lw}x{lh}")
        vw, vh = min(view_size[0], lw), min(view_size[1], lh)
        x0 = int(min(max(0, round(gx - vw / 2)), lw - vw))
        y0 = int(min(max(0, round(gy - vh / 2)), lh - vh))
        return cls(vw, vh, fov_h, (gx - x0, gy - y0), (x0, y0), level)


@dataclass(frozen=True)
class QualityRing:
    index: int
    theta_lo: float
    theta_hi: float
    zone: VisionZone
    q_hat_eval: float
    s_hat_eval: float | None = None


def tile_eccentricity(tile_center, vp: ViewportGeometry, metric: str = "radial") -> float:
    """Eccentricity (degrees) of a level-image point, clamped to the FoV half-width."""
    gx, gy = vp.gaze_level
    dx, dy = tile_center[0] - gx, tile_center[1] - gy
    if metric == "radial":
        dist = math.hypot(dx, dy)
    elif metric == "rect":
        dist = max(abs(dx), abs(dy))
    else:
        raise ValueError(f"unknown eccentricity metric {metric!r}")
    return min(FOV_HALF_WIDTH, max(0.0, vp.dpp * dist))


def rect_eccentricity(rect, vp: ViewportGeometry, metric: str = "radial") -> float:
    """Eccentricity of the point of ``rect = (x0, y0, x1, y1)`` closest to the gaze (0 if it holds the gaze)."""
    gx, gy = vp.gaze_level
    x0, y0, x1, y1 = rect
    return tile_eccentricity((min(max(gx, x0), x1), min(max(gy, y0), y1)), vp, metric)


def build_rings(model: str = "q", c_content: float | None = None, edges=DEFAULT_RING_EDGES) -> list:
    """Contiguous rings over [0, 55]; model values taken at each ring's inner edge."""
    if model not in MODELS:
        raise ValueError(f"model must be one of {MODELS}, got {model!r}")
    edges = tuple(float(e) for e in edges)
    if edges[0] != 0.0 or edges[-1] != FOV_HALF_WIDTH or list(edges) != sorted(set(edges)):
        raise ValueError(f"ring edges must increase strictly from 0 to {FOV_HALF_WIDTH}: {edges}")
    if model in ("s", "joint") and c_content is None:
        raise ValueError(f"model {model!r} needs the content parameter c")
    qfun = q_hat_joint if model == "joint" else q_hat
    rings = []
    for i, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        s_val = s_hat(lo, c_content) if c_content is not None else None
        rings.append(QualityRing(i, lo, hi, classify_zone(hi), qfun(lo), s_val))
    return rings


def ring_of(theta: float, rings) -> QualityRing:
    """Ring owning ``theta``: ring 0 is [0, hi], later rings (lo, hi]."""
    for r in rings:
        if theta <= r.theta_hi:
            return r
    return rings[-1]


def snap_qp(q_target: float, ladder) -> tuple[int, bool]:
    """Largest ladder QP with q <= ``q_target``; (finest QP, True) if none qualifies."""
    ladder = sorted(ladder)
    if not ladder:
        raise PlanningError("QP ladder is empty")
    ok = [qp for qp in ladder if qp_to_q(qp) <= q_target * (1 + _REL_TOL)]
    if not ok:
        return ladder[0], True
    return ok[-1], False


@dataclass(frozen=True)
class PlanEntry:
    level: int
    x: int
    y: int
    tile_id: int
    qp: int
    ring: int
    flagged: bool = False


@dataclass
class FoveationPlan:
    entries: list
    anchor: str
    base_qp: int
    model: str = "q"
    zoom_level: int = 0
    notes: list = field(default_factory=list)

    @property
    def flagged(self) -> list:
        return [e for e in self.entries if e.flagged]

    def to_text(self) -> str:
        lines = ["tile_id,level,qp,ring"]
        lines += [f"{e.tile_id},{e.level},{e.qp},{e.ring}" for e in self.entries]
        return "\n".join(lines) + "\n"


def _finalize(assigned: dict, manifest, **kw) -> FoveationPlan:
    entries = []
    for (lv, x, y), (qp, ring, flag) in assigned.items():
        entries.append(PlanEntry(lv, x, y, manifest.tile_id(lv, x, y), qp, ring, flag))
    entries.sort(key=lambda e: (e.level, e.tile_id))
    return FoveationPlan(entries, **kw)


def uniform_plan(vp: ViewportGeometry, manifest, base_qp: int = 22) -> FoveationPlan:
    if base_qp not in manifest.coded_qps:
        raise PlanningError(f"base QP {base_qp} not in manifest ladder {manifest.coded_qps}")
    tiles = manifest.tiles_in_rect(vp.level, vp.rect)
    if not tiles:
        raise PlanningError(f"viewport {vp.rect} covers no tiles at level {vp.level}")
    assigned = {(t.level, t.x, t.y): (base_qp, 0, False) for t in tiles}
    return _finalize(assigned, manifest, anchor="uniform", base_qp=base_qp, model="uniform",
                     zoom_level=vp.level)


def _level_for_ratio(manifest, zoom: int, ratio: float) -> int:
    zw, zh = manifest.levels[zoom]
    best = zoom
    for lv in range(zoom, len(manifest.levels)):
        w, h = manifest.levels[lv]
        if (w * h) / (zw * zh) >= ratio * (1 - _REL_TOL):
            best = lv
    return best


def plan(vp: ViewportGeometry, manifest, model: str = "q", anchor: str = "relative", base_qp: int = 22,
         qp_ladder=None, c_content: float | None = None, edges=DEFAULT_RING_EDGES,
         metric: str = "radial", tile_point: str = "nearest") -> FoveationPlan:
    """Assign a pyramid level and QP to every tile overlapping the viewport.

    The QP follows the q model in relative anchoring as
    ``q_target = q_base * q_hat(0) / q_hat(theta_lo)`` and in absolute anchoring as
    ``q_min / q_hat(theta_lo)``; the tile gets the coarsest ladder QP not exceeding it.
    Models involving resolution also move peripheral rings to the coarsest
    level still carrying ``s_hat(theta_lo)`` of the zoom level's pixels.
    A tile's eccentricity is taken at its point nearest the gaze by default,
    or at its centre with ``tile_point="center"``.
    """
    if anchor not in ANCHORS:
        raise ValueError(f"anchor must be one of {ANCHORS}, got {anchor!r}")
    if tile_point not in TILE_POINTS:
        raise ValueError(f"tile_point must be one of {TILE_POINTS}, got {tile_point!r}")
    ladder = sorted(qp_ladder if qp_ladder is not None else manifest.qps)
    if not ladder:
        raise PlanningError("QP ladder is empty")
    if base_qp not in ladder:
        raise PlanningError(f"base QP {base_qp} not in ladder {ladder}")
    for qp in ladder:
        if qp not in manifest.coded_qps:
            raise PlanningError(f"ladder QP {qp} missing from manifest")
    rings = build_rings(model, c_content, edges)
    zoom = vp.level
    if not 0 <= zoom < len(manifest.levels):
        raise PlanningError(f"zoom level {zoom} not in manifest")
    tiles = manifest.tiles_in_rect(zoom, vp.rect)
    if not tiles:
        raise PlanningError(f"viewport {vp.rect} covers no tiles at level {zoom}")

    use_q = model in ("q", "joint")
    use_s = model in ("s", "joint")
    q_base = qp_to_q(base_qp)
    q0, s0 = rings[0].q_hat_eval, rings[0].s_hat_eval
    ring_qp, ring_level = {}, {}
    for r in rings:
        if use_q:
            q_t = q_base * q0 / r.q_hat_eval if anchor == "relative" else Q_MIN / r.q_hat_eval
            ring_qp[r.index] = snap_qp(q_t, ladder)
        else:
            ring_qp[r.index] = (base_qp, False)
        if use_s:
            ratio = r.s_hat_eval / s0 if anchor == "relative" else r.s_hat_eval
            ring_level[r.index] = _level_for_ratio(manifest, zoom, ratio)
        else:
            ring_level[r.index] = zoom

    assigned = {}
    vx0, vy0, vx1, vy1 = vp.rect
    zw, zh = manifest.levels[zoom]
    for t in tiles:
        if tile_point == "nearest":
            theta = rect_eccentricity(t.rect, vp, metric)
        else:
            theta = tile_eccentricity((t.px + t.w / 2.0, t.py + t.h / 2.0), vp, metric)
        ring = ring_of(theta, rings)
        qp, flag = ring_qp[ring.index]
        lv = ring_level[ring.index]
        if lv == zoom:
            targets = [(t.level, t.x, t.y)]
        else:
            lw, lh = manifest.levels[lv]
            sx, sy = lw / zw, lh / zh
            x0, y0 = max(t.px, vx0), max(t.py, vy0)
            x1, y1 = min(t.px + t.w, vx1), min(t.py + t.h, vy1)
            rect = (math.floor(x0 * sx), math.floor(y0 * sy), math.ceil(x1 * sx), math.ceil(y1 * sy))
            targets = [(c.level, c.x, c.y) for c in manifest.tiles_in_rect(lv, rect)]
        for key in targets:
            prev = assigned.get(key)
            if prev is None or (qp, ring.index) < (prev[0], prev[1]):
                assigned[key] = (qp, ring.index, flag)
    notes = [f"tile {k} kept at finest QP: model allows no ladder step"
             for k, v in sorted(assigned.items()) if v[2]]
    return _finalize(assigned, manifest, anchor=anchor, base_qp=base_qp, model=model,
                     zoom_level=zoom, notes=notes)
