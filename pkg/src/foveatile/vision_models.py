"""Eccentricity-dependent perceptual models.

Everything here is a pure function of the one-side horizontal eccentricity
``theta`` (degrees from the gaze point).  The generalized Gaussian falloff

    g(theta) = 1 / (c * sqrt(2 pi)) * exp(-|(b * theta)^a| / (2 c^2)) + d

describes how far quantization (``q_hat``) or resolution (``s_hat``) can be
reduced at ``theta`` before the reduction becomes visible.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path

Q_MIN = 8.0
QP_MIN = 22
Q_MAX = 228.0
QP_MAX = 51
S_MAX = (4096, 2160)
FOV_HALF_WIDTH = 55.0
CLAMP_EPS = 1e-6

_SQRT_2PI = math.sqrt(2.0 * math.pi)


class VisionZone(enum.Enum):
    CVA = "CVA"
    NPA = "NPA"
    FPA = "FPA"


ZONE_EDGES = {VisionZone.CVA: (0.0, 9.0), VisionZone.NPA: (9.0, 30.0), VisionZone.FPA: (30.0, 55.0)}


def classify_zone(theta: float) -> VisionZone:
    """Zone owning ``theta``; upper edges are closed (9 -> CVA, 30 -> NPA)."""
    if theta < 0 or theta > FOV_HALF_WIDTH:
        raise ValueError(f"eccentricity {theta} outside [0, {FOV_HALF_WIDTH}]")
    if theta <= 9.0:
        return VisionZone.CVA
    if theta <= 30.0:
        return VisionZone.NPA
    return VisionZone.FPA


@dataclass(frozen=True)
class GGaussParams:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0 and self.c > 0):
            raise ValueError(f"a, b, c must be positive: {self}")
        if not self.d >= 0:
            raise ValueError(f"d must be non-negative: {self}")

    @property
    def peak(self) -> float:
        return 1.0 / (self.c * _SQRT_2PI) + self.d

    def floor_threshold(self, tol: float = 1e-9) -> float:
        """Smallest theta beyond which ``ggauss`` is within ``tol`` of ``d``."""
        # amp * exp(-(b t)^a / (2 c^2)) < tol
        amp = 1.0 / (self.c * _SQRT_2PI)
        if amp <= tol:
            return 0.0
        x = 2.0 * self.c**2 * math.log(amp / tol)
        return x ** (1.0 / self.a) / self.b


Q_PARAMS = GGaussParams(a=2.2, b=0.08, c=1.38, d=0.05)
S_PARAMS_BASE = dict(a=2.2, b=0.033, d=0.06)
JOINT_Q_PARAMS = GGaussParams(a=2.2, b=0.055, c=1.1, d=0.06)


def ggauss(theta: float, p: GGaussParams) -> float:
    if theta < 0:
        raise ValueError(f"negative eccentricity {theta}")
    expo = abs((p.b * theta) ** p.a) / (2.0 * p.c * p.c)
    return math.exp(-expo) / (p.c * _SQRT_2PI) + p.d


def _clamp_unit(x: float) -> float:
    return min(1.0, max(CLAMP_EPS, x))


def q_hat(theta: float, params: GGaussParams = Q_PARAMS) -> float:
    """Normalized quantization ``q_min / q`` tolerated at ``theta``."""
    return _clamp_unit(ggauss(theta, params))


def s_params(c_content: float) -> GGaussParams:
    if not c_content > 0:
        raise ValueError(f"content parameter c must be positive, got {c_content}")
    return GGaussParams(c=c_content, **S_PARAMS_BASE)


def s_hat(theta: float, c_content: float) -> float:
    """Normalized resolution ``s / s_max`` tolerated at ``theta``."""
    return _clamp_unit(ggauss(theta, s_params(c_content)))


def q_hat_joint(theta: float, s=None) -> float:
    """Resolution-independent q-impact; ``s`` is accepted and ignored."""
    return _clamp_unit(ggauss(theta, JOINT_Q_PARAMS))


def cone_density(theta: float, theta_floor: float = FOV_HALF_WIDTH) -> float:
    """Cone density in cones/mm^2 (power law to 20 deg, then a linear ramp to 4000)."""
    if theta < 0:
        raise ValueError(f"negative eccentricity {theta}")
    if theta_floor <= 20.0:
        raise ValueError("theta_floor must exceed 20 degrees")
    theta = max(theta, 1.0)
    if theta <= 20.0:
        return 50000.0 * (theta / 300.0) ** (-2.0 / 3.0)
    if theta >= theta_floor:
        return 4000.0
    at20 = 50000.0 * (20.0 / 300.0) ** (-2.0 / 3.0)
    frac = (theta - 20.0) / (theta_floor - 20.0)
    return at20 + frac * (4000.0 - at20)


# -- q / QP / s conventions -------------------------------------------------


@dataclass(frozen=True)
class QuantStep:
    q: float
    qp: float

    @classmethod
    def from_qp(cls, qp: float) -> "QuantStep":
        return cls(q=qp_to_q(qp), qp=qp)

    @classmethod
    def from_q(cls, q: float) -> "QuantStep":
        return cls(q=q, qp=q_to_qp(q))


def qp_to_q(qp: float) -> float:
    # exact powers of two for every QP = 4 + 6k
    return 2.0 ** ((qp - 4) / 6.0)


def q_to_qp(q: float) -> float:
    if q <= 0:
        raise ValueError(f"quantization step must be positive, got {q}")
    return 4.0 + 6.0 * math.log2(q)


def normalize_q(q) -> float:
    qv = q.q if isinstance(q, QuantStep) else float(q)
    if qv <= 0:
        raise ValueError(f"quantization step must be positive, got {qv}")
    return Q_MIN / qv


def denormalize_q(q_hat_value: float) -> QuantStep:
    if not q_hat_value > 0:
        raise ValueError(f"normalized quantization must be positive, got {q_hat_value}")
    return QuantStep.from_q(Q_MIN / q_hat_value)


def normalize_s(res, s_max=S_MAX) -> float:
    w, h = res
    if w < 1 or h < 1:
        raise ValueError(f"invalid resolution {res}")
    return (w * h) / (s_max[0] * s_max[1])


def _round_even(x: float) -> int:
    return max(2, 2 * int(math.floor(x / 2.0 + 0.5)))


def denormalize_s(s_hat_value: float, s_max=S_MAX) -> tuple[int, int]:
    """Resolution with ``s_hat_value`` of the pixels of ``s_max``, same aspect, even dims."""
    if not s_hat_value > 0:
        raise ValueError(f"normalized resolution must be positive, got {s_hat_value}")
    if s_hat_value >= 1.0:
        return tuple(s_max)
    k = math.sqrt(s_hat_value)
    return _round_even(s_max[0] * k), _round_even(s_max[1] * k)


# -- config ------------------------------------------------------------------


def parse_params_text(text: str) -> tuple[str, GGaussParams]:
    """Parse ``key = value`` lines (impact, a, b, c, d); '#' starts a comment."""
    values: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            key, _, val = line.partition(" ")
        key = key.strip().lower()
        if key not in {"impact", "a", "b", "c", "d"}:
            raise ValueError(f"unknown parameter key {key!r}")
        values[key] = val.strip()
    impact = values.pop("impact", "q").lower()
    if impact not in {"q", "s", "joint"}:
        raise ValueError(f"impact must be q, s or joint, not {impact!r}")
    defaults = {"q": Q_PARAMS, "joint": JOINT_Q_PARAMS, "s": GGaussParams(c=1.0, **S_PARAMS_BASE)}[impact]
    merged = {k: float(values.get(k, getattr(defaults, k))) for k in "abcd"}
    return impact, GGaussParams(**merged)


def load_params(path) -> tuple[str, GGaussParams]:
    return parse_params_text(Path(path).read_text())
