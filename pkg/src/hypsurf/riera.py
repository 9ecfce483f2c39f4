"""Truncated Riera sums for the Weil-Petersson gradient of a length function.

For a hyperbolic element A of length l whose axis is the imaginary axis,

    <grad l, grad l>_wp = (2/pi) (l + sum_B [u_B ln((u_B+1)/(u_B-1)) - 2])

where B runs over the nontrivial double cosets <A> \\ G / <A> and u_B is the
cosh of the distance between the imaginary axis and its image under B.

Enumeration.  A double coset is determined by the translated axis B(iR+) up to
the left action of A, which rescales by e^l.  Each class at distance d from
the axis has a representative moving a point of the fundamental segment
[i, e^l i] to within d of that segment, so it factors as g h^-1 with h a tile
crossing the segment and g a tile meeting the d-tube around it.  The word
cutoff k sets the tube radius T = k/2; every class with d <= T is found and
classes beyond T are discarded, so the truncated sum is exact up to T and
nondecreasing in k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import fuchsian, hplane
from .errors import DomainError, OutOfRegime, ParameterOutOfRange
from .fuchsian import FuchsianGroup
from .hplane import HPoint, MoebiusElement

MAX_WORD_CUTOFF = 24
FINGERPRINT_TOL = 1e-7
_SEGMENT_STEP = 0.25


@dataclass(frozen=True)
class CosetRep:
    element: MoebiusElement
    u: float
    nearest_point_polar: Tuple[float, float]

    @property
    def distance(self) -> float:
        return math.acosh(self.u)

    @property
    def nearest_point(self) -> HPoint:
        return HPoint.from_polar(*self.nearest_point_polar)


@dataclass(frozen=True)
class RieraEvaluation:
    curve_length: float
    truncated_sum: float
    value: float
    word_cutoff: int
    coset_count: int
    min_u: float
    tail_bound: float
    intersecting_excluded: int = 0

    def to_json(self) -> dict:
        return {
            "curve_length": self.curve_length,
            "value": self.value,
            "truncated_sum": self.truncated_sum,
            "coset_count": self.coset_count,
            "word_cutoff": self.word_cutoff,
            "min_u": self.min_u,
            "intersecting_excluded": self.intersecting_excluded,
            "tail_bound_heuristic": self.tail_bound,
        }


def tube_radius(word_cutoff: int) -> float:
    return 0.5 * word_cutoff


# ---------------------------------------------------------------------------
# scalar formulas

def riera_term(u):
    """u ln((u+1)/(u-1)) - 2, positive and decreasing on u > 1, ~ (2/3) u^-2 at infinity."""
    arr = np.asarray(u, dtype=float)
    if np.any(~(arr > 1.0)):
        raise DomainError("riera_term needs u > 1")
    out = np.empty_like(arr)
    big = arr >= 4.0
    small = ~big
    us = arr[small]
    out[small] = us * np.log((us + 1.0) / (us - 1.0)) - 2.0
    # 2u atanh(1/u) - 2 = 2 sum_{k>=1} x^{2k} / (2k+1) with x = 1/u; 16 terms reach 1e-19 at x = 1/4
    x2 = 1.0 / arr[big] ** 2
    acc = np.zeros_like(x2)
    for k in range(16, 0, -1):
        acc = x2 * (1.0 / (2 * k + 1) + acc)
    out[big] = 2.0 * acc
    return float(out) if out.ndim == 0 else out


def wolpert_distance_bound(L: float) -> float:
    """sqrt(2 pi L): Weil-Petersson distance to the stratum where a curve of length L is pinched."""
    if not L > 0:
        raise DomainError("length must be positive")
    return math.sqrt(2.0 * math.pi * L)


def up_eff_rhs(L: float, C: float) -> float:
    """(2/pi) L (1 + C e^{-L/8}), valid once the systole is at least 8."""
    if L < 8.0:
        raise OutOfRegime(f"L = {L} is below 8")
    if not C > 0:
        raise DomainError("C must be positive")
    return 2.0 / math.pi * L * (1.0 + C * math.exp(-L / 8.0))


# ---------------------------------------------------------------------------
# normalization and enumeration

def conjugate_to_axis(G: FuchsianGroup, w: Sequence[int]) -> Tuple[FuchsianGroup, MoebiusElement]:
    """Conjugate G so the axis of the element ``w`` is the imaginary axis, translating upward."""
    g = G.word_element(w)
    h = hplane.diagonalizer(g)  # raises ParabolicElement / EllipticElement
    ell = hplane.translation_length(g)
    Gp = G if h.is_identity(1e-15) else G.conjugate(h)
    e = math.exp(ell / 2.0)
    return Gp, MoebiusElement(e, 0.0, 0.0, 1.0 / e, word=tuple(w))


def _axis_length(A: MoebiusElement) -> float:
    a, b, c, d = A.entries
    scale = max(abs(a), abs(d))
    if abs(b) > 1e-9 * scale or abs(c) > 1e-9 * scale or not abs(a) > abs(d):
        raise ParameterOutOfRange("A must be diag(e^{l/2}, e^{-l/2}) with l > 0")
    return math.log(abs(a / d))


def _tube_tiles(G: FuchsianGroup, ell: float, radius: float):
    """(mats, words) of tiles meeting the radius-neighbourhood of the segment [i, e^ell i]."""
    n = max(2, int(math.ceil(ell / _SEGMENT_STEP)) + 1)
    ys = np.exp(np.linspace(0.0, ell, n))
    half_gap = ell / (n - 1) / 2.0
    pts = 1j * ys
    zc, k, kw = fuchsian.reduce_points(G, pts[0], with_words=True)
    kmat = k[0]
    centers = hplane.apply_arr(kmat[None], pts)
    mats, words = fuchsian._tiles_meeting(G, centers, radius + half_gap)
    kinv = hplane.inverse_arr(kmat)
    kinv_w = hplane.invert_word(kw[0])
    return hplane.matmul_arr(kinv[None], mats), [hplane.free_reduce(kinv_w + w) for w in words]


def _fingerprints(m: np.ndarray, ell: float):
    """Per matrix: signed u, log of the nearest-point modulus, and a stabilizer mask."""
    a, b, c, d = m[:, 0, 0], m[:, 0, 1], m[:, 1, 0], m[:, 1, 1]
    scale = np.max(np.abs(m.reshape(-1, 4)), axis=1)
    stab = (np.abs(b) < 1e-9 * scale) & (np.abs(c) < 1e-9 * scale)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = (a * d + b * c) * np.sign(c * d)
        logr = 0.5 * (np.log(np.abs(a)) + np.log(np.abs(b)) - np.log(np.abs(c)) - np.log(np.abs(d)))
    return v, logr, stab


def _cluster(q: np.ndarray, v: np.ndarray, ell: float) -> np.ndarray:
    """Indices of one member per class of (q mod ell, v) within FINGERPRINT_TOL."""
    order = np.lexsort((q, v))
    reps: List[int] = []
    i, n = 0, len(order)
    while i < n:
        j = i + 1
        while j < n and v[order[j]] - v[order[j - 1]] < FINGERPRINT_TOL * max(1.0, abs(v[order[j]])):
            j += 1
        group = order[i:j]
        group = group[np.argsort(q[group], kind="stable")]
        kept: List[float] = []
        for idx in group:
            qi = q[idx]
            if any(min(abs(qi - qk), ell - abs(qi - qk)) < FINGERPRINT_TOL for qk in kept):
                continue
            kept.append(qi)
            reps.append(int(idx))
        i = j
    return np.array(reps, dtype=int)


def _canonical_rep(m: np.ndarray, word: Tuple[int, ...], ell: float, a_word: Tuple[int, ...]):
    v, logr, _ = _fingerprints(m[None], ell)
    shift = -math.floor(logr[0] / ell + 1e-12)
    e = math.exp(shift * ell / 2.0)
    mm = m * np.array([[e, e], [1.0 / e, 1.0 / e]])
    q = logr[0] + shift * ell
    if q >= ell or q < 0.0:  # floor rounding at the seam
        q = min(max(q, 0.0), math.nextafter(ell, 0.0))
    power = a_word * abs(shift) if shift > 0 else hplane.invert_word(a_word) * abs(shift)
    w = hplane.free_reduce(tuple(power) + tuple(word))
    u = abs(float(v[0]))
    theta = math.asin(min(1.0, 1.0 / u)) if u > 0 else 0.0
    if v[0] < 0:
        theta = math.pi - theta
    return CosetRep(MoebiusElement.from_matrix(mm, w), u, (math.exp(q), theta))


@dataclass(frozen=True)
class CosetEnumeration:
    reps: Tuple[CosetRep, ...]
    intersecting: int
    radius: float
    curve_length: float


def enumerate_cosets(Gp: FuchsianGroup, A: MoebiusElement, word_cutoff: int) -> CosetEnumeration:
    if not 1 <= word_cutoff <= MAX_WORD_CUTOFF:
        raise ParameterOutOfRange(f"word_cutoff must be in [1, {MAX_WORD_CUTOFF}]")
    ell = _axis_length(A)
    radius = tube_radius(word_cutoff)
    g_m, g_w = _tube_tiles(Gp, ell, radius)
    h_m, h_w = _tube_tiles(Gp, ell, 0.0)
    h_inv = hplane.inverse_arr(h_m)
    prods = hplane.matmul_arr(g_m[:, None], h_inv[None]).reshape(-1, 2, 2)
    v, logr, stab = _fingerprints(prods, ell)
    u = np.abs(v)
    live = ~stab & np.isfinite(logr)
    crossing = live & (u < 1.0)
    near = live & (u >= 1.0) & (u <= math.cosh(radius) * (1 + 1e-12))
    with np.errstate(invalid="ignore"):
        q = np.mod(logr, ell)
        q = np.where(ell - q < FINGERPRINT_TOL, 0.0, q)

    n_cross = 0
    idx_x = np.nonzero(crossing)[0]
    if idx_x.size:
        n_cross = len(_cluster(q[idx_x], v[idx_x], ell))

    idx = np.nonzero(near)[0]
    reps: List[CosetRep] = []
    if idx.size:
        chosen = idx[_cluster(q[idx], v[idx], ell)]
        nh = h_m.shape[0]
        for flat in chosen:
            gi, hi = divmod(int(flat), nh)
            word = hplane.free_reduce(tuple(g_w[gi]) + hplane.invert_word(h_w[hi]))
            reps.append(_canonical_rep(prods[flat], word, ell, tuple(A.word)))
    reps.sort(key=lambda r: (round(r.u, 12), round(math.log(r.nearest_point_polar[0]), 9),
                             round(r.nearest_point_polar[1], 9)))
    return CosetEnumeration(tuple(reps), n_cross, radius, ell)


def double_cosets(Gp: FuchsianGroup, A: MoebiusElement, word_cutoff: int) -> List[CosetRep]:
    """Representatives of the nontrivial double cosets with axis distance <= word_cutoff / 2.

    Sorted by u, then by the canonical nearest point.  Cosets whose translated
    axis crosses the imaginary axis are left out; see ``enumerate_cosets``.
    """
    return list(enumerate_cosets(Gp, A, word_cutoff).reps)


def recanonicalize(rep: CosetRep, A: MoebiusElement) -> CosetRep:
    ell = _axis_length(A)
    return _canonical_rep(rep.element.matrix, rep.element.word, ell, tuple(A.word))


# ---------------------------------------------------------------------------
# gradient norm

def _tail_heuristic(dists: np.ndarray, radius: float) -> float:
    """Extrapolate the missing part of the sum from a count model N(d) ~ C e^d."""
    if dists.size < 4:
        return math.nan
    ds = np.sort(dists)
    counts = np.arange(1, ds.size + 1)
    upper = ds >= radius / 2.0
    if upper.sum() < 2:
        upper = np.ones_like(ds, dtype=bool)
    C = float(np.median(counts[upper] * np.exp(-ds[upper])))
    # integral over d > radius of (2/3) cosh(d)^-2 * C e^d dd <= (8/3) C e^-radius
    return 2.0 / math.pi * (8.0 / 3.0) * C * math.exp(-radius)


def gradient_norm_sq(G: FuchsianGroup, w: Sequence[int], word_cutoff: int) -> RieraEvaluation:
    """Truncated Riera sum for the curve ``w`` of G."""
    Gp, A = conjugate_to_axis(G, w)
    enum = enumerate_cosets(Gp, A, word_cutoff)
    us = np.array([r.u for r in enum.reps])
    us = us[us > 1.0]
    total = float(np.sum(riera_term(us))) if us.size else 0.0
    ell = enum.curve_length
    tail = _tail_heuristic(np.arccosh(us), enum.radius)
    return RieraEvaluation(
        curve_length=ell,
        truncated_sum=total,
        value=2.0 / math.pi * (ell + total),
        word_cutoff=word_cutoff,
        coset_count=int(us.size),
        min_u=float(us.min()) if us.size else math.inf,
        tail_bound=tail,
        intersecting_excluded=enum.intersecting,
    )


# ---------------------------------------------------------------------------
# orbit-ball diagnostics

@dataclass(frozen=True)
class OrbitBallReport:
    curve_length: float
    hypothesis_met: bool
    coset_count: int
    min_pairwise_distance: float
    max_sin_theta: float
    angle_bound: float
    passed: Optional[bool]

    def to_json(self) -> dict:
        return dict(self.__dict__)


def orbit_ball_checks(Gp: FuchsianGroup, A: MoebiusElement, cosets: Sequence[CosetRep]) -> OrbitBallReport:
    """Pairwise separation of the nearest points p_B and their angular spread.

    The disjointness and angle bounds are only asserted when the curve has
    length at least 8; otherwise the extremes are recorded with ``passed=None``.
    """
    ell = _axis_length(A)
    hyp = ell >= 8.0
    pts = np.array([r.nearest_point.z for r in cosets], dtype=complex)
    sin_t = np.array([math.sin(r.nearest_point_polar[1]) for r in cosets])
    min_pair = math.inf
    for i in range(len(pts) - 1):
        d = hplane.dist_arr(pts[i], pts[i + 1:])
        min_pair = min(min_pair, float(d.min()))
    max_sin = float(sin_t.max()) if sin_t.size else 0.0
    bound = 2.0 * math.exp(-ell / 8.0)
    passed = (min_pair >= 2.0 and max_sin <= bound) if hyp else None
    return OrbitBallReport(ell, hyp, len(cosets), min_pair, max_sin, bound, passed)
