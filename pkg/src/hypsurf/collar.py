"""Collars around simple closed geodesics and the injectivity radius inside them.

A geodesic of length L has an embedded collar of half-width
``asinh(1/sinh(L/2))``.  Inside it the metric is ``dr^2 + L^2 cosh^2 r dt^2``,
and the injectivity radius at signed distance ``s`` from the core satisfies
``sinh(inj) = sinh(L/2) cosh(s)``.  All injectivity radii are returned as
lengths, not as their sinh.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import OutOfRegime, OutsideCollar

SHORT_CURVE = math.asinh(1.0) * 2.0  # curves at most this long have collars of width >= asinh(1)
_SLACK = 1e-12


def half_width(L: float) -> float:
    if not L > 0:
        raise ValueError("length must be positive")
    return math.asinh(1.0 / math.sinh(L / 2.0))


def in_regime(L: float) -> bool:
    return 0 < L <= SHORT_CURVE * (1 + _SLACK)


@dataclass(frozen=True)
class CollarData:
    core_length: float
    half_width: float

    @classmethod
    def of(cls, L: float) -> "CollarData":
        return cls(L, half_width(L))

    @property
    def in_regime(self) -> bool:
        return in_regime(self.core_length)

    @property
    def boundary_length(self) -> float:
        return collar_boundary_length(self.core_length)

    def contains(self, dist_to_core: float) -> bool:
        return dist_to_core <= self.half_width


def equidistant_length(L: float, rho: float) -> float:
    """Length of the curve at signed distance ``rho`` from the core."""
    w = half_width(L)
    if abs(rho) > w * (1 + _SLACK):
        raise OutsideCollar(f"|rho| = {abs(rho):.6g} exceeds the half-width {w:.6g}")
    return L * math.cosh(rho)


def collar_boundary_length(L: float) -> float:
    if not L > 0:
        raise ValueError("length must be positive")
    sh = math.sinh(L / 2.0)
    # L/sinh(L/2) -> 2 as L -> 0; the series avoids 0/0 for tiny L
    ratio = L / sh if L > 1e-8 else 2.0 * (1.0 - L * L / 24.0)
    return ratio * math.sqrt(1.0 + sh * sh)


def _check(L: float, dist: float, strict: bool) -> None:
    if not L > 0:
        raise ValueError("length must be positive")
    if strict and not in_regime(L):
        raise OutOfRegime(f"L = {L:.6g} exceeds 2*asinh(1)")
    w = half_width(L)
    if dist < -_SLACK or dist > w * (1 + _SLACK) + _SLACK:
        raise OutsideCollar(f"distance {dist:.6g} outside [0, {w:.6g}]")


def inj_from_boundary_distance(L: float, d: float, strict: bool = True) -> float:
    """Injectivity radius at distance ``d`` inside the collar, measured from its boundary."""
    _check(L, d, strict)
    return math.asinh(math.cosh(L / 2.0) * math.cosh(d) - math.sinh(d))


def inj_from_core_distance(L: float, s: float, strict: bool = True) -> float:
    """Injectivity radius at distance ``s`` from the core geodesic."""
    _check(L, s, strict)
    return math.asinh(math.sinh(L / 2.0) * math.cosh(s))
