"""Deterministic FoV retrieval simulator: uniform vs foveated payloads over fixed bandwidths.

Retrieval time is pure transmission delay, ``t = bytes * 8 / R`` with R in
Mbit/s, plus an optional fixed cost per tile request (default 0).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .mia_engine.manifest import ManifestError
from .tile_planner import ViewportGeometry, plan, uniform_plan

DEFAULT_VIEW = (2560, 1440)


@dataclass(frozen=True)
class TraceStep:
    step: int
    gaze_x: float
    gaze_y: float
    level: int
    fov_deg: float = 110.0


def parse_trace(text: str) -> list:
    """Lines ``step,gaze_x,gaze_y,level,fov_deg``; a leading header row is skipped."""
    steps = []
    for n, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or row[0].strip().startswith("#"):
            continue
        if n == 1 and row[0].strip() == "step":
            continue
        if len(row) != 5:
            raise ValueError(f"trace line {n}: expected 5 fields, got {len(row)}")
        steps.append(TraceStep(int(row[0]), float(row[1]), float(row[2]), int(row[3]), float(row[4])))
    if not steps:
        raise ValueError("trace is empty")
    return steps


def load_trace(path) -> list:
    return parse_trace(Path(path).read_text())


def format_trace(steps) -> str:
    lines = ["step,gaze_x,gaze_y,level,fov_deg"]
    lines += [f"{s.step},{s.gaze_x:g},{s.gaze_y:g},{s.level},{s.fov_deg:g}" for s in steps]
    return "\n".join(lines) + "\n"


def navigation_trace(manifest, n_steps: int = 12, seed: int = 0, fov_deg: float = 110.0) -> list:
    """Zoom in from the coarsest level to native, panning at random between zooms.

    Gaze coordinates of consecutive zoom steps map to the same scene point.
    """
    rng = np.random.default_rng(seed)
    n_levels = len(manifest.levels)
    order = list(range(n_levels - 1, -1, -1))
    steps = []
    u, v = 0.5, 0.5
    for i in range(n_steps):
        level = order[min(len(order) - 1, i * len(order) // max(1, n_steps))]
        if i and level == steps[-1].level:
            u = float(np.clip(u + rng.uniform(-0.15, 0.15), 0.05, 0.95))
            v = float(np.clip(v + rng.uniform(-0.15, 0.15), 0.05, 0.95))
        w, h = manifest.levels[level]
        steps.append(TraceStep(i, round(u * w, 1), round(v * h, 1), level, fov_deg))
    return steps


@dataclass(frozen=True)
class PlannerConfig:
    model: str = "q"
    anchor: str = "relative"
    base_qp: int = 22
    c_content: float | None = None
    view_size: tuple = DEFAULT_VIEW
    metric: str = "radial"
    tile_point: str = "nearest"
    request_latency_s: float = 0.0


def fov_payload(plan_obj, manifest) -> int:
    total = 0
    for e in plan_obj.entries:
        try:
            total += manifest.size(e.level, e.x, e.y, e.qp)
        except ManifestError as err:
            raise ManifestError(f"plan tile {e.tile_id} at level {e.level}: {err}") from None
    return total


def retrieval_time(n_bytes: float, mbps: float, n_requests: int = 0, latency_s: float = 0.0) -> float:
    if not mbps > 0:
        raise ValueError(f"bandwidth must be positive, got {mbps}")
    return n_bytes * 8.0 / (mbps * 1e6) + n_requests * latency_s


@dataclass(frozen=True)
class RetrievalRow:
    step: int
    mbps: float
    bytes_uniform: int
    bytes_foveated: int
    t_ori: float
    t_m: float

    @property
    def saving(self) -> float:
        return 1.0 - self.t_m / self.t_ori


@dataclass
class RetrievalReport:
    rows: list
    bandwidths: list
    lossless: dict = field(default_factory=dict)  # step -> lossless FoV bytes

    def for_bandwidth(self, mbps) -> list:
        return [r for r in self.rows if r.mbps == mbps]

    def aggregate(self) -> dict:
        """Per bandwidth: mean t_ori, mean t_m, mean saving over steps."""
        out = {}
        for bw in self.bandwidths:
            rs = self.for_bandwidth(bw)
            out[bw] = (float(np.mean([r.t_ori for r in rs])), float(np.mean([r.t_m for r in rs])),
                       float(np.mean([r.saving for r in rs])))
        return out

    def to_csv(self) -> str:
        lines = ["step,mbps,bytes_uniform,bytes_foveated,t_ori,t_m,saving"]
        for r in self.rows:
            lines.append(f"{r.step},{r.mbps:g},{r.bytes_uniform},{r.bytes_foveated},"
                         f"{r.t_ori:.6f},{r.t_m:.6f},{r.saving:.6f}")
        for bw, (to, tm, sv) in self.aggregate().items():
            lines.append(f"average,{bw:g},,,{to:.6f},{tm:.6f},{sv:.6f}")
        return "\n".join(lines) + "\n"

    def table(self) -> str:
        """One row per step, bandwidth columns side by side, mirroring the classic layout."""
        head = ["step"] + [f"t_ori@{bw:g},t_m@{bw:g}" for bw in self.bandwidths] + ["saving"]
        lines = [",".join(head)]
        steps = sorted({r.step for r in self.rows})
        for s in steps + ["average"]:
            cells = [str(s)]
            for bw in self.bandwidths:
                rs = self.for_bandwidth(bw)
                if s == "average":
                    cells.append(f"{np.mean([r.t_ori for r in rs]):.4f},{np.mean([r.t_m for r in rs]):.4f}")
                else:
                    r = next(r for r in rs if r.step == s)
                    cells.append(f"{r.t_ori:.4f},{r.t_m:.4f}")
            rs0 = self.for_bandwidth(self.bandwidths[0])
            sv = np.mean([r.saving for r in rs0]) if s == "average" else \
                next(r for r in rs0 if r.step == s).saving
            cells.append(f"{100 * sv:.2f}%")
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


def report_from_payloads(payloads, bandwidths, requests=None, latency_s: float = 0.0) -> RetrievalReport:
    """Build a report from ``[(step, bytes_uniform, bytes_foveated), ...]``."""
    if not bandwidths:
        raise ValueError("no bandwidths given")
    rows = []
    for i, (step, bu, bf) in enumerate(payloads):
        nu, nf = requests[i] if requests else (0, 0)
        for bw in bandwidths:
            rows.append(RetrievalRow(step, bw, bu, bf, retrieval_time(bu, bw, nu, latency_s),
                                     retrieval_time(bf, bw, nf, latency_s)))
    return RetrievalReport(rows, list(bandwidths))


def _plans_for_step(step: TraceStep, manifest, cfg: PlannerConfig):
    if not 0 <= step.level < len(manifest.levels):
        raise ValueError(f"trace step {step.step}: level {step.level} not in manifest")
    vp = ViewportGeometry.around((step.gaze_x, step.gaze_y), manifest.levels[step.level],
                                 cfg.view_size, step.fov_deg, step.level)
    uni = uniform_plan(vp, manifest, cfg.base_qp)
    fov = plan(vp, manifest, cfg.model, cfg.anchor, cfg.base_qp, c_content=cfg.c_content, metric=cfg.metric,
               tile_point=cfg.tile_point)
    return uni, fov


def simulate(trace, manifest, bandwidths=(5, 10, 20), cfg: PlannerConfig = PlannerConfig()) -> RetrievalReport:
    if not trace:
        raise ValueError("trace is empty")
    payloads, requests = [], []
    lossless = {}
    for step in trace:
        uni, fov = _plans_for_step(step, manifest, cfg)
        payloads.append((step.step, fov_payload(uni, manifest), fov_payload(fov, manifest)))
        requests.append((len(uni.entries), len(fov.entries)))
        if manifest.lossless_qp is not None:
            lossless[step.step] = sum(manifest.size(e.level, e.x, e.y, manifest.lossless_qp)
                                      for e in uni.entries)
    report = report_from_payloads(payloads, list(bandwidths), requests, cfg.request_latency_s)
    report.lossless = lossless
    return report


@dataclass(frozen=True)
class SavingPoint:
    step: int
    lossless_bytes: int
    delta_t: float


def savings_vs_size(trace, manifest, cfg: PlannerConfig = PlannerConfig()) -> list:
    """Per FoV: lossless payload size L and retrieval-time reduction 1 - t_m / t_ori."""
    if manifest.lossless_qp is None:
        raise ManifestError("manifest has no lossless rung; rebuild it with a lossless QP")
    points = []
    for step in trace:
        uni, fov = _plans_for_step(step, manifest, cfg)
        lossless = sum(manifest.size(e.level, e.x, e.y, manifest.lossless_qp) for e in uni.entries)
        bu, bf = fov_payload(uni, manifest), fov_payload(fov, manifest)
        points.append(SavingPoint(step.step, lossless, 1.0 - bf / bu))
    return points


def savings_csv(points) -> str:
    lines = ["step,lossless_bytes,delta_t"]
    lines += [f"{p.step},{p.lossless_bytes},{p.delta_t:.6f}" for p in points]
    return "\n".join(lines) + "\n"
