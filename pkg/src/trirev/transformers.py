"""Ball and band hypotheses turned into margin constants r or slack constants.

All four lemmas are inner-product statements, so only lp(2) spaces are accepted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, HypothesisViolation, UnsupportedStructure
from .spaces import SpaceSpec, as_vector, norm, norms


def _require_hilbert(space: SpaceSpec):
    if not space.is_hilbert:
        raise UnsupportedStructure(f"ball/band lemmas need lp(2), got {space.label()}")


@dataclass(frozen=True, eq=False)
class BallHypothesis:
    """‖x − center‖ ≤ radius."""

    space: SpaceSpec
    center: np.ndarray
    radius: float

    def __post_init__(self):
        _require_hilbert(self.space)
        object.__setattr__(self, "center", as_vector(self.space, self.center))
        if not (self.radius >= 0 and math.isfinite(self.radius)):
            raise ContractViolation("ball radius must be a finite nonnegative number")
        object.__setattr__(self, "radius", float(self.radius))

    def contains(self, xs, slack: float = 0.0) -> np.ndarray:
        xs = np.atleast_2d(np.asarray(xs, dtype=np.complex128))
        return norms(self.space, xs - self.center) <= self.radius + slack


@dataclass(frozen=True, eq=False)
class BandHypothesis:
    """Re<upper·y − x, x − lower·y> ≥ 0, i.e. ‖x − (m+M)/2·y‖ ≤ (M−m)/2·‖y‖."""

    space: SpaceSpec
    direction: np.ndarray
    lower: float
    upper: float

    def __post_init__(self):
        _require_hilbert(self.space)
        object.__setattr__(self, "direction", as_vector(self.space, self.direction))
        if not (self.lower > 0):
            raise ContractViolation("band lower bound must be positive")
        if not (self.upper >= self.lower):
            raise ContractViolation("band needs upper >= lower")
        object.__setattr__(self, "lower", float(self.lower))
        object.__setattr__(self, "upper", float(self.upper))

    def as_ball(self) -> BallHypothesis:
        c = 0.5 * (self.lower + self.upper) * self.direction
        r = 0.5 * (self.upper - self.lower) * norm(self.space, self.direction)
        return BallHypothesis(self.space, c, r)

    def contains(self, xs, slack: float = 0.0) -> np.ndarray:
        return self.as_ball().contains(xs, slack)


def ball_to_margin(h: BallHypothesis) -> float:
    a = norm(h.space, h.center)
    if not h.radius < a:
        raise HypothesisViolation(f"ball radius {h.radius} must be below the center norm {a}")
    return math.sqrt((a - h.radius) * (a + h.radius))


def band_to_margin(h: BandHypothesis) -> float:
    if not h.lower > 0:
        raise ContractViolation("band lower bound must be positive")
    m, M = h.lower, h.upper
    return 2.0 * math.sqrt(m * M) / (m + M) * norm(h.space, h.direction)


def ball_to_slack(radius: float) -> float:
    if not radius >= 0:
        raise ContractViolation("radius must be nonnegative")
    return 0.5 * radius * radius


def band_to_slack(h: BandHypothesis) -> float:
    if not h.lower > 0:
        raise ContractViolation("band lower bound must be positive")
    m, M = h.lower, h.upper
    return 0.25 * (M - m) ** 2 / (M + m) * norm(h.space, h.direction) ** 2


def ball_equality_witness(space: SpaceSpec, center, radius: float, direction=None) -> np.ndarray:
    """A point on the ball's boundary where the margin inequality is tight.

    It has ‖x − a‖ = r and ‖x‖² + r² = ‖a‖²; ``direction`` picks the side.
    """
    _require_hilbert(space)
    a = as_vector(space, center)
    na = norm(space, a)
    if not 0 <= radius < na:
        raise HypothesisViolation("need 0 <= radius < ‖center‖")
    u = a / na
    if direction is None:
        w = np.zeros_like(a)
        w[(int(np.argmin(np.abs(u))))] = 1.0
    else:
        w = as_vector(space, direction)
    w = w - np.vdot(u, w).real * u if space.real_mode else w - np.vdot(u, w) * u
    nw = norm(space, w)
    if nw == 0:
        if space.real_mode:
            raise HypothesisViolation("no direction orthogonal to the center")
        w, nw = 1j * u, 1.0
    w = w / nw
    # x = ‖x‖(cos φ u + sin φ w) with ‖x‖ = sqrt(‖a‖² − r²) and cos φ = ‖x‖/‖a‖
    t = math.sqrt(na * na - radius * radius)
    c = t / na
    s = math.sqrt(max(0.0, 1.0 - c * c))
    return t * (c * u + s * w)
