"""MOS prediction for uniform and foveated quality assignments.

The uniform model is separable in normalized resolution and quantization::

    Q = Q_max * (1 - exp(-alpha s^0.7)) / (1 - exp(-alpha))
              * (1 - exp(-beta(s) q)) / (1 - exp(-beta(s)))

and the foveated variants evaluate it at the central-vision anchor ``theta_c``.
``alpha`` and ``beta(s)`` are content dependent and must come from
configuration; the defaults below (alpha=5, beta=4) are illustrative only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .vision_models import S_MAX, normalize_s, q_hat, q_hat_joint, s_hat

DEFAULT_Q_MAX = 86.0
CVA_EDGE = 9.0


@dataclass(frozen=True)
class QStarParams:
    alpha: float = 5.0
    beta_by_s: dict = field(default_factory=lambda: {S_MAX: 4.0})
    q_max_mos: float = DEFAULT_Q_MAX

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.beta_by_s:
            raise ValueError("beta table is empty")
        if any(not b > 0 for b in self.beta_by_s.values()):
            raise ValueError("every beta(s) must be positive")
        if not 0 < self.q_max_mos <= 100:
            raise ValueError(f"Q_max must lie in (0, 100], got {self.q_max_mos}")

    def beta(self, s=S_MAX) -> float:
        """beta(s); unknown resolutions take the entry nearest in pixel count."""
        s = tuple(s)
        if s in self.beta_by_s:
            return self.beta_by_s[s]
        px = s[0] * s[1]
        best = min(self.beta_by_s, key=lambda r: (abs(r[0] * r[1] - px), r))
        return self.beta_by_s[best]


def parse_beta_table(text: str) -> dict:
    """Lines of ``WxH beta``; blank lines and '#' comments skipped."""
    table = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        res, beta = line.split()
        w, h = (int(v) for v in res.lower().split("x"))
        table[(w, h)] = float(beta)
    return table


def load_beta_table(path) -> dict:
    return parse_beta_table(Path(path).read_text())


def _check_unit(name, x):
    if not 0 < x <= 1:
        raise ValueError(f"{name} must lie in (0, 1], got {x}")


def _check_theta_c(theta_c):
    if not 0 <= theta_c <= CVA_EDGE:
        raise ValueError(f"theta_c must lie in the central vision area [0, 9], got {theta_c}")


def _s_factor(s_hat_value, alpha):
    return (1.0 - math.exp(-alpha * s_hat_value**0.7)) / (1.0 - math.exp(-alpha))


def _q_factor(q_hat_value, beta):
    return (1.0 - math.exp(-beta * q_hat_value)) / (1.0 - math.exp(-beta))


def mos_uniform(s_hat_value: float, q_hat_value: float, p: QStarParams = QStarParams(), s=None) -> float:
    """``s`` selects beta(s); by default it is recovered from ``s_hat`` at s_max aspect."""
    _check_unit("s_hat", s_hat_value)
    _check_unit("q_hat", q_hat_value)
    if s is None:
        k = math.sqrt(s_hat_value)
        s = (round(S_MAX[0] * k), round(S_MAX[1] * k))
    return p.q_max_mos * _s_factor(s_hat_value, p.alpha) * _q_factor(q_hat_value, p.beta(s))


def mos_foveated_s(theta_c: float, c_content: float, p: QStarParams = QStarParams()) -> float:
    _check_theta_c(theta_c)
    return mos_uniform(s_hat(theta_c, c_content), 1.0, p)


def mos_foveated_q(theta_c: float, p: QStarParams = QStarParams()) -> float:
    _check_theta_c(theta_c)
    return mos_uniform(1.0, q_hat(theta_c), p, s=S_MAX)


def mos_foveated_joint(s, theta_c: float, p: QStarParams = QStarParams()) -> float:
    _check_theta_c(theta_c)
    s = tuple(s)
    if s[0] * s[1] > S_MAX[0] * S_MAX[1]:
        raise ValueError(f"resolution {s} exceeds s_max {S_MAX}")
    return mos_uniform(normalize_s(s), q_hat_joint(theta_c), p, s=s)
