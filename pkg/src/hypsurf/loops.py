"""Shortest geodesic loops, injectivity radius, and the neck integrals.

The injectivity radius at p is half the length of a shortest non-trivial
geodesic loop at p, i.e. half of min over g != id of d(p~, g p~).  Points are
first moved into the Dirichlet domain, where a single precomputed table of
group elements is guaranteed to contain the minimiser.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from . import fuchsian, hplane
from .errors import HyperbolicError, HypothesisViolated, MCBudget, ParameterOutOfRange
from .fuchsian import FuchsianGroup
from .hplane import HPoint, MoebiusElement

MC_CAP = 10_000_000
_CHUNK = 256


@dataclass(frozen=True)
class GeodesicLoop:
    basepoint_lift: HPoint
    element: MoebiusElement
    length: float

    @property
    def inj(self) -> float:
        return self.length / 2.0

    @property
    def end(self) -> HPoint:
        return hplane.apply(self.element, self.basepoint_lift)

    @property
    def frame(self) -> MoebiusElement:
        """Isometry taking [i, e^length i] onto the lifted loop."""
        return hplane.segment_frame(self.basepoint_lift, self.end)

    def to_json(self) -> dict:
        g = self.element
        return {"basepoint": [self.basepoint_lift.x, self.basepoint_lift.y],
                "element": [g.a, g.b, g.c, g.d], "word": list(g.word),
                "length": self.length, "inj": self.inj}


@dataclass(frozen=True)
class InjProfile:
    samples: Tuple[Tuple[float, float], ...]

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.samples])

    @property
    def minimum(self) -> float:
        return float(self.values.min())

    @property
    def maximum(self) -> float:
        return float(self.values.max())

    def to_json(self) -> List[dict]:
        return [{"s": s, "inj": v} for s, v in self.samples]


# ---------------------------------------------------------------------------
# injectivity radius

def _shortest_in_domain(G: FuchsianGroup, z: np.ndarray):
    """For points z in the domain: (2*inj, index into the table) per point."""
    mats, words = fuchsian.inj_table(G)
    reach = 2.0 * math.log(4 * G.genus - 2) + 1e-6
    lengths = np.empty(z.size)
    pick = np.empty(z.size, dtype=int)
    for lo in range(0, z.size, _CHUNK):
        zc = z[lo:lo + _CHUNK]
        s = hplane.sinh_half_dist_sq_arr(hplane.apply_arr(mats[None], zc[:, None]), zc[:, None])
        best = s.min(axis=1)
        for i in range(zc.size):
            ties = np.nonzero(s[i] <= best[i] * (1 + 1e-9) + 1e-300)[0]
            pick[lo + i] = min(ties, key=lambda j: words[j]) if ties.size > 1 else ties[0]
        lengths[lo:lo + zc.size] = 2.0 * np.arcsinh(np.sqrt(best))
    if np.any(lengths > reach):
        raise HyperbolicError("shortest loop exceeds 2 ln(4g-2); the element table is incomplete")
    return lengths, pick


def injectivity_radii(G: FuchsianGroup, points) -> np.ndarray:
    """Vectorised injectivity radius at many points (any lifts)."""
    z, _ = fuchsian.reduce_points(G, hplane.as_complex(points))
    lengths, _ = _shortest_in_domain(G, z)
    return lengths / 2.0


def injectivity_radius(G: FuchsianGroup, p: HPoint) -> Tuple[float, GeodesicLoop]:
    """inj at p and a shortest loop at the given lift (ties: smallest word)."""
    z, h, hw = fuchsian.reduce_points(G, p.z, with_words=True)
    lengths, pick = _shortest_in_domain(G, z)
    mats, words = fuchsian.inj_table(G)
    g = MoebiusElement.from_matrix(mats[pick[0]], words[pick[0]])
    hm = MoebiusElement.from_matrix(h[0], hw[0])
    g0 = hm.inverse() @ g @ hm
    length = hplane.dist(p, hplane.apply(g0, p))
    return length / 2.0, GeodesicLoop(p, g0, length)


def loop_point(loop: GeodesicLoop, s: float) -> HPoint:
    if s < -1e-12 or s > loop.length + 1e-12:
        raise ParameterOutOfRange(f"s = {s} outside [0, {loop.length}]")
    s = min(max(s, 0.0), loop.length)
    return hplane.apply(loop.frame, HPoint(0.0, math.exp(s)))


def loop_points(loop: GeodesicLoop, s: np.ndarray) -> np.ndarray:
    return hplane.apply_arr(loop.frame.matrix, 1j * np.exp(np.asarray(s, dtype=float)))


def inj_profile(G: FuchsianGroup, loop: GeodesicLoop, n: int) -> InjProfile:
    if not 2 <= n <= 10_000:
        raise ParameterOutOfRange("profile size must be in [2, 10^4]")
    s = np.linspace(0.0, loop.length, n)
    inj = injectivity_radii(G, loop_points(loop, s))
    return InjProfile(tuple(zip(s.tolist(), inj.tolist())))


# ---------------------------------------------------------------------------
# distances to loops and closed geodesics

@dataclass(frozen=True)
class _Segment:
    frame_inv: np.ndarray
    length: float
    midpoint: complex

    @classmethod
    def of(cls, frame: MoebiusElement, length: float) -> "_Segment":
        mid = complex(hplane.apply_arr(frame.matrix, 1j * math.exp(length / 2)))
        return cls(frame.inverse().matrix, length, mid)

    def distance(self, w: np.ndarray) -> np.ndarray:
        return fuchsian.dist_to_segment_arr(w, self.frame_inv[None], np.array([self.length]))[:, 0]


def _dist_to_segment_mod_group(G: FuchsianGroup, seg: _Segment, pts, reach: float) -> np.ndarray:
    """min over h of d(h x, seg); exact wherever the result is <= reach."""
    z, _ = fuchsian.reduce_points(G, hplane.as_complex(pts))
    mats, _ = fuchsian.tiles_near(G, seg.midpoint, seg.length / 2.0 + reach)
    out = np.full(z.size, np.inf)
    for lo in range(0, z.size, 4096):
        zc = z[lo:lo + 4096]
        imgs = hplane.apply_arr(mats[None], zc[:, None])
        d = seg.distance(imgs.ravel()).reshape(imgs.shape)
        out[lo:lo + zc.size] = d.min(axis=1)
    return out


def _dist_exact(G: FuchsianGroup, seg: _Segment, pts) -> np.ndarray:
    reach = 0.5
    while True:
        d = _dist_to_segment_mod_group(G, seg, pts, reach)
        if np.all(d <= reach) or reach > 4.0 * G.domain_radius:
            return d
        reach *= 2.0


def dist_to_loop(G: FuchsianGroup, q: HPoint, loop: GeodesicLoop) -> float:
    """Surface distance from q to the image of the loop."""
    return float(_dist_exact(G, _Segment.of(loop.frame, loop.length), q.z)[0])


def dist_to_loop_arr(G: FuchsianGroup, loop: GeodesicLoop, pts, reach: float) -> np.ndarray:
    """Vectorised distance to the loop, exact below ``reach`` (larger values mean > reach)."""
    return _dist_to_segment_mod_group(G, _Segment.of(loop.frame, loop.length), pts, reach)


def _geodesic_segment(g: MoebiusElement, near: HPoint) -> Tuple[_Segment, HPoint]:
    """One period of the axis of g, starting at the foot of the perpendicular from ``near``."""
    to_axis = hplane.diagonalizer(g)
    w = hplane.apply(to_axis, near)
    foot = HPoint(0.0, abs(w.z))
    start = hplane.apply(to_axis.inverse(), foot)
    end = hplane.apply(g, start)
    length = hplane.translation_length(g)
    return _Segment.of(hplane.segment_frame(start, end), length), start


def dist_to_closed_geodesic(G: FuchsianGroup, g: MoebiusElement, pts) -> np.ndarray:
    """Surface distance from points to the closed geodesic represented by g."""
    seg, _ = _geodesic_segment(g, G.basepoint)
    return _dist_exact(G, seg, pts)


def point_on_geodesic(G: FuchsianGroup, g: MoebiusElement, t: float = 0.0, offset: float = 0.0) -> HPoint:
    """Point at arc length t along the axis of g (from the foot nearest the basepoint),
    moved a signed distance ``offset`` along the perpendicular."""
    seg, start = _geodesic_segment(g, G.basepoint)
    frame = np.linalg.inv(seg.frame_inv)
    # along the imaginary axis to e^t i, then perpendicular: rotate by -pi/2 and translate
    f = MoebiusElement.from_matrix(frame) @ MoebiusElement.translation(t) \
        @ MoebiusElement.rotation(-math.pi / 2 if offset >= 0 else math.pi / 2) \
        @ MoebiusElement.translation(abs(offset))
    return hplane.apply(f, hplane.I)


def nearest_parameter(loop: GeodesicLoop, pts) -> np.ndarray:
    """Arc-length parameter of the nearest-point projection onto the lifted loop."""
    u = hplane.apply_arr(loop.frame.inverse().matrix, hplane.as_complex(pts))
    return np.clip(np.log(np.abs(u)), 0.0, loop.length)


# ---------------------------------------------------------------------------
# scalar fields on the surface

class ScalarField:
    """A non-negative function on the surface.

    ``prepare(G, center, radius)`` returns a vectorised function valid on lifts
    lying within ``radius`` of ``center``.
    """

    name = "field"

    def prepare(self, G: FuchsianGroup, center: complex, radius: float) -> Callable[[np.ndarray], np.ndarray]:
        raise NotImplementedError

    def to_json(self) -> dict:
        return {"name": self.name}


@dataclass(frozen=True)
class ConstantField(ScalarField):
    value: float = 1.0
    name = "constant"

    def prepare(self, G, center, radius):
        return lambda z: np.full(np.shape(z), float(self.value))

    def to_json(self):
        return {"name": self.name, "value": self.value}


@dataclass(frozen=True)
class RadialField(ScalarField):
    """phi(d_X(x, q)) for a profile phi supported on [0, support]."""

    center: HPoint
    kind: str = "bump"  # "bump": exp(-d^2/width); "ball": smoothed indicator of radius ``width``
    width: float = 0.01
    smoothing: float = 0.05

    @property
    def name(self):
        return self.kind

    @property
    def support(self) -> float:
        if self.kind == "bump":
            return math.sqrt(40.0 * self.width)
        return self.width + self.smoothing

    def profile(self, d: np.ndarray) -> np.ndarray:
        if self.kind == "bump":
            return np.where(d < self.support, np.exp(-d * d / self.width), 0.0)
        t = np.clip((d - self.width) / self.smoothing, 0.0, 1.0)
        return 0.5 * (1.0 + np.cos(np.pi * t))

    def prepare(self, G, center, radius):
        center = complex(center.z if isinstance(center, HPoint) else center)
        reach = radius + self.support
        q, _ = fuchsian.reduce_points(G, self.center.z)
        mats, _ = fuchsian.tiles_near(G, center, reach)
        orbit = hplane.apply_arr(mats, q[0])
        orbit = orbit[hplane.dist_arr(orbit, center) <= reach + 1e-9]

        def f(z):
            z = np.asarray(z)
            if orbit.size == 0:
                return np.zeros(z.shape)
            flat = z.ravel()
            out = np.empty(flat.size)
            for lo in range(0, flat.size, 65536):
                d = hplane.dist_arr(flat[lo:lo + 65536, None], orbit[None, :]).min(axis=1)
                out[lo:lo + 65536] = self.profile(d)
            return out.reshape(z.shape)

        return f

    def to_json(self):
        return {"name": self.kind, "center": [self.center.x, self.center.y],
                "width": self.width, "smoothing": self.smoothing}


# ---------------------------------------------------------------------------
# neck inequality integrals

@dataclass(frozen=True)
class NeckResult:
    lhs: float
    rhs: float
    se_lhs: float
    se_rhs: float
    ratio: float
    se_ratio: float
    m: int
    eps0: float
    seed: int

    @property
    def passed(self) -> bool:
        return self.ratio <= 1.0 + 3.0 * self.se_ratio

    def to_json(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "se_lhs": self.se_lhs, "se_rhs": self.se_rhs,
                "ratio": self.ratio, "se_ratio": self.se_ratio, "m": self.m,
                "eps0": self.eps0, "seed": self.seed}


def neck_check(G: FuchsianGroup, loop: GeodesicLoop, eps0: float, f: ScalarField,
               n_mc: int = 100_000, n_s: int = 64, seed: int = 0,
               profile_points: int = 129) -> NeckResult:
    """Monte-Carlo estimates of both sides of

        int_0^{2 inj} int_{B(sigma(s), eps0)} f  ds   <=   12 eps0 int_{N_eps0(sigma)} f

    The left side uses one disk cloud transported along the loop (midpoint rule
    in s); the right side samples the Dirichlet domain uniformly.
    """
    if eps0 <= 0:
        raise ParameterOutOfRange("eps0 must be positive")
    if n_mc < 2 or n_mc > MC_CAP:
        raise MCBudget(f"n_mc = {n_mc} outside [2, {MC_CAP}]")
    if n_s < 1:
        raise ParameterOutOfRange("n_s must be positive")
    prof = inj_profile(G, loop, profile_points)
    if prof.minimum < 2.0 * eps0:
        raise HypothesisViolated(f"inj along the loop drops to {prof.minimum:.6g} < 2*eps0 = {2 * eps0:.6g}")
    m = int(math.floor(loop.inj / eps0))
    rng = np.random.default_rng(seed)
    ell = loop.length

    # left side: per-sample sums over the s-grid, so the standard error is honest
    disk = hplane.sample_disk(hplane.I, eps0, n_mc, rng)
    f_loop = f.prepare(G, complex(loop_point(loop, ell / 2).z), ell / 2 + eps0)
    frame = loop.frame.matrix
    ds = ell / n_s
    y = np.zeros(n_mc)
    for k in range(n_s):
        s = (k + 0.5) * ds
        fs = frame @ np.diag([math.exp(s / 2), math.exp(-s / 2)])
        y += ds * f_loop(hplane.apply_arr(fs, disk))
    y *= hplane.ball_area(eps0)
    lhs, se_lhs = float(y.mean()), float(y.std(ddof=1) / math.sqrt(n_mc))

    # right side: uniform samples of the domain, indicator of the eps0-neighbourhood
    pts = fuchsian.mc_sample_domain(G, n_mc, int(rng.integers(2 ** 63 - 1)))
    near = dist_to_loop_arr(G, loop, pts, eps0) < eps0
    vals = np.zeros(n_mc)
    if near.any():
        vals[near] = f.prepare(G, G.basepoint.z, G.domain_radius + 1e-9)(pts[near])
    vals *= G.area * 12.0 * eps0
    rhs, se_rhs = float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n_mc))

    if rhs == 0.0:
        if lhs == 0.0:
            return NeckResult(0.0, 0.0, se_lhs, se_rhs, 0.0, 0.0, m, eps0, seed)
        raise MCBudget("no domain sample landed in the neighbourhood; increase n_mc")
    ratio = lhs / rhs
    se_ratio = ratio * math.sqrt((se_lhs / lhs) ** 2 + (se_rhs / rhs) ** 2) if lhs > 0 else se_lhs / rhs
    return NeckResult(lhs, rhs, se_lhs, se_rhs, ratio, se_ratio, m, eps0, seed)
