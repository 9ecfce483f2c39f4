"""Upper half-plane primitives: points, Moebius elements, geodesics, distances.

Everything here works in double precision.  Scalar routines take and return
the small immutable types below; the ``*_arr`` helpers are their vectorized
counterparts on complex numpy arrays and stacks of 2x2 matrices, used by the
enumeration and Monte-Carlo code.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .errors import EllipticElement, IntersectingGeodesics, ParabolicElement

DET_TOL = 1e-9
PARABOLIC_TOL = 1e-12
EQUALITY_TOL = 1e-9
_FAR = 1e15

Word = Tuple[int, ...]


@dataclass(frozen=True)
class HPoint:
    x: float
    y: float

    def __post_init__(self):
        if not (self.y > 0.0) or not math.isfinite(self.y) or not math.isfinite(self.x):
            raise ValueError(f"not a point of the upper half-plane: ({self.x}, {self.y})")

    @classmethod
    def from_complex(cls, z: complex) -> "HPoint":
        return cls(float(z.real), float(z.imag))

    @classmethod
    def from_polar(cls, r: float, theta: float) -> "HPoint":
        return cls(r * math.cos(theta), r * math.sin(theta))

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @property
    def polar(self) -> Tuple[float, float]:
        return math.hypot(self.x, self.y), math.atan2(self.y, self.x)


I = HPoint(0.0, 1.0)


def free_reduce(word: Sequence[int]) -> Word:
    out: list = []
    for letter in word:
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def invert_word(word: Sequence[int]) -> Word:
    return tuple(-w for w in reversed(word))


def _canonical_sign(a, b, c, d):
    for v in (a, b, c, d):
        if v != 0.0:
            return (a, b, c, d) if v > 0 else (-a, -b, -c, -d)
    raise ValueError("zero matrix")


@dataclass(frozen=True)
class MoebiusElement:
    """An element of PSL(2,R), stored as a sign-canonical unit-determinant matrix.

    ``word`` records how the element was built from a group's generators
    (generator ``k`` is ``k+1``, its inverse ``-(k+1)``); it is empty for
    free-standing elements.
    """

    a: float
    b: float
    c: float
    d: float
    word: Word = field(default=(), compare=False)

    def __post_init__(self):
        a, b, c, d = (float(v) for v in (self.a, self.b, self.c, self.d))
        det = a * d - b * c
        # the computed det of a large product is only good to ~eps * |entries|^2
        noise = 1e-15 * max(a * a, b * b, c * c, d * d, 1.0)
        if noise < 0.5 and not det > noise:
            raise ValueError(f"matrix determinant must be positive, got {det}")
        if noise < 0.5 and abs(det - 1.0) > noise:
            s = math.sqrt(det)
            a, b, c, d = a / s, b / s, c / s, d / s
        a, b, c, d = _canonical_sign(a, b, c, d)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "word", tuple(int(w) for w in self.word))

    @classmethod
    def from_matrix(cls, m, word: Sequence[int] = ()) -> "MoebiusElement":
        m = np.asarray(m, dtype=float).reshape(2, 2)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1], tuple(word))

    @classmethod
    def identity(cls) -> "MoebiusElement":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def translation(cls, t: float) -> "MoebiusElement":
        """Hyperbolic translation by ``t`` along the imaginary axis (z -> e^t z)."""
        return cls(math.exp(t / 2), 0.0, 0.0, math.exp(-t / 2))

    @classmethod
    def rotation(cls, phi: float) -> "MoebiusElement":
        """Rotation by angle ``phi`` about i."""
        c, s = math.cos(phi / 2), math.sin(phi / 2)
        return cls(c, s, -s, c)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def trace(self) -> float:
        return self.a + self.d

    def __matmul__(self, other: "MoebiusElement") -> "MoebiusElement":
        a = self.a * other.a + self.b * other.c
        b = self.a * other.b + self.b * other.d
        c = self.c * other.a + self.d * other.c
        d = self.c * other.b + self.d * other.d
        return MoebiusElement(a, b, c, d, free_reduce(self.word + other.word))

    def inverse(self) -> "MoebiusElement":
        return MoebiusElement(self.d, -self.b, -self.c, self.a, invert_word(self.word))

    def with_word(self, word: Sequence[int]) -> "MoebiusElement":
        return MoebiusElement(self.a, self.b, self.c, self.d, tuple(word))

    def conjugate_by(self, h: "MoebiusElement") -> "MoebiusElement":
        """h g h^-1, keeping the word of g."""
        return (h @ self @ h.inverse()).with_word(self.word)

    def is_close(self, other: "MoebiusElement", tol: float = EQUALITY_TOL) -> bool:
        return all(abs(p - q) <= tol for p, q in zip(self.entries, other.entries))

    def is_identity(self, tol: float = EQUALITY_TOL) -> bool:
        return self.is_close(MoebiusElement.identity(), tol)

    @property
    def entries(self) -> Tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)

    def __call__(self, z: HPoint) -> HPoint:
        return apply(self, z)


class Geodesic(NamedTuple):
    """A complete geodesic: ``vertical`` (Re z = x0) or ``circular`` (center, radius)."""

    kind: str
    x0: float = 0.0
    center: float = 0.0
    radius: float = 0.0

    @classmethod
    def vertical(cls, x0: float) -> "Geodesic":
        return cls("vertical", x0=float(x0))

    @classmethod
    def circular(cls, center: float, radius: float) -> "Geodesic":
        if not radius > 0:
            raise ValueError("circular geodesic needs a positive radius")
        return cls("circular", center=float(center), radius=float(radius))

    @classmethod
    def from_endpoints(cls, p: float, q: float) -> "Geodesic":
        if math.isinf(p) and math.isinf(q):
            raise ValueError("both endpoints at infinity")
        # an endpoint this far out is infinity to double precision near the other one
        if abs(p) > _FAR * max(1.0, abs(q)):
            p = math.inf
        elif abs(q) > _FAR * max(1.0, abs(p)):
            q = math.inf
        if math.isinf(p):
            return cls.vertical(q)
        if math.isinf(q):
            return cls.vertical(p)
        if p == q:
            raise ValueError("degenerate geodesic")
        return cls.circular((p + q) / 2, abs(q - p) / 2)

    @property
    def endpoints(self) -> Tuple[float, float]:
        if self.kind == "vertical":
            return (self.x0, math.inf)
        return (self.center - self.radius, self.center + self.radius)

    def image(self, g: MoebiusElement) -> "Geodesic":
        p, q = self.endpoints
        return Geodesic.from_endpoints(_apply_boundary(g, p), _apply_boundary(g, q))

    def contains(self, z: HPoint, tol: float = 1e-9) -> bool:
        if self.kind == "vertical":
            return abs(z.x - self.x0) <= tol * max(1.0, abs(z.y))
        return abs(abs(z.z - self.center) - self.radius) <= tol * max(1.0, self.radius)


IMAGINARY_AXIS = Geodesic.vertical(0.0)


def _apply_boundary(g: MoebiusElement, x: float) -> float:
    if math.isinf(x):
        return math.inf if g.c == 0.0 else g.a / g.c
    den = g.c * x + g.d
    if den == 0.0:
        return math.inf
    return (g.a * x + g.b) / den


def apply(g: MoebiusElement, z: HPoint) -> HPoint:
    w = (g.a * z.z + g.b) / (g.c * z.z + g.d)
    # keep y strictly positive under roundoff for points far out near the boundary
    return HPoint(w.real, max(w.imag, 5e-324))


def dist(z: HPoint, w: HPoint) -> float:
    # 2 asinh(|z-w| / (2 sqrt(y y'))) equals acosh(1 + |z-w|^2/(2 y y')) but keeps
    # full relative accuracy for nearby points.
    return 2.0 * math.asinh(abs(z.z - w.z) / (2.0 * math.sqrt(z.y * w.y)))


def dist_to_imaginary_axis(z: HPoint) -> float:
    _, theta = z.polar
    return math.log(1.0 / math.sin(theta) + abs(math.cos(theta) / math.sin(theta)))


def _hyperbolic_or_raise(g: MoebiusElement) -> float:
    t = abs(g.trace)
    if abs(t - 2.0) <= PARABOLIC_TOL:
        raise ParabolicElement(f"|tr| = {t!r} is parabolic within tolerance")
    if t < 2.0:
        raise EllipticElement(f"|tr| = {t!r} < 2")
    return t


def translation_length(g: MoebiusElement) -> float:
    t = _hyperbolic_or_raise(g)
    return 2.0 * math.acosh(t / 2.0)


def fixed_points(g: MoebiusElement) -> Tuple[float, float]:
    """Repelling and attracting fixed points of a hyperbolic element on R u {inf}."""
    t = _hyperbolic_or_raise(g)
    a, b, c, d = g.entries
    if c == 0.0:
        # z -> (a/d) z + b/d: one fixed point at infinity
        fin = b / (d - a)
        return (fin, math.inf) if a > d else (math.inf, fin)
    disc = math.sqrt(t * t - 4.0)
    # roots of c x^2 + (d - a) x - b = 0 without cancellation
    q = -0.5 * ((d - a) + math.copysign(disc, d - a))
    x1 = q / c
    x2 = -b / q if q != 0.0 else math.inf
    # attracting fixed point x has |c x + d| < 1
    if abs(c * x1 + d) < 1.0:
        return (x2, x1)
    return (x1, x2)


def diagonalizer(g: MoebiusElement) -> MoebiusElement:
    """h with h g h^-1 = diag(e^{l/2}, e^{-l/2}): the axis goes to iR+, attracting end to infinity.

    Built from eigenvectors, which stays accurate when an endpoint is near infinity.
    """
    _hyperbolic_or_raise(g)
    a, b, c, d = g.entries
    if a + d < 0:
        a, b, c, d = -a, -b, -c, -d
    tr = a + d
    lam = 0.5 * (tr + math.sqrt(tr * tr - 4.0))

    def eigvec(mu):
        v1 = (b, mu - a)
        v2 = (mu - d, c)
        return v1 if math.hypot(*v1) >= math.hypot(*v2) else v2

    (p, r), (q, s) = eigvec(lam), eigvec(1.0 / lam)
    det = p * s - q * r
    if det < 0:
        q, s, det = -q, -s, -det
    k = math.sqrt(det)
    # P has the eigenvectors as columns; its inverse is the conjugator
    return MoebiusElement(s / k, -q / k, -r / k, p / k)


def axis(g: MoebiusElement) -> Geodesic:
    p, q = fixed_points(g)
    return Geodesic.from_endpoints(p, q)


def _normalizer(gamma: Geodesic) -> MoebiusElement:
    """An isometry sending ``gamma`` onto the imaginary axis."""
    p, q = gamma.endpoints
    if math.isinf(q):
        return MoebiusElement(1.0, -p, 0.0, 1.0)
    # z -> (z - p)/(q - z) sends p -> 0, q -> inf; scaled by sqrt|q - p| up front
    # because endpoints far out would overflow the generic determinant check
    s = math.sqrt(abs(q - p))
    if q > p:
        return MoebiusElement(-1.0 / s, p / s, 1.0 / s, -q / s)
    return MoebiusElement(1.0 / s, -p / s, 1.0 / s, -q / s)


class GeodesicDistance(NamedTuple):
    distance: float
    nearest: Optional[HPoint]  # point of the second geodesic closest to the first
    intersecting: bool


def _separation_from_axis(x1: float, x2: float) -> Tuple[float, Optional[complex], bool]:
    """Distance from the imaginary axis to the geodesic with finite endpoints x1, x2."""
    if x1 == 0.0 or x2 == 0.0 or x1 * x2 < 0.0:
        return 0.0, None, True
    u = abs(x1 + x2) / abs(x2 - x1)
    c, r = (x1 + x2) / 2, abs(x2 - x1) / 2
    cos_phi = (x1 * x2 - c * c - r * r) / (2 * c * r)
    cos_phi = min(1.0, max(-1.0, cos_phi))
    sin_phi = math.sqrt(max(0.0, 1.0 - cos_phi * cos_phi))
    return math.acosh(max(u, 1.0)), complex(c + r * cos_phi, r * sin_phi), False


def dist_geodesics(g1: Geodesic, g2: Geodesic, strict: bool = False) -> GeodesicDistance:
    """Distance between two geodesics and the point of ``g2`` realizing it.

    Crossing or asymptotic geodesics give distance 0 with ``intersecting`` set
    (or IntersectingGeodesics when ``strict``).
    """
    t = _normalizer(g1)
    x1, x2 = (_apply_boundary(t, e) for e in g2.endpoints)
    if {x1, x2} == {0.0, math.inf}:
        return GeodesicDistance(0.0, apply(t.inverse(), I), False)
    if math.isinf(x1) or math.isinf(x2):
        if strict:
            raise IntersectingGeodesics("geodesics share an ideal endpoint")
        return GeodesicDistance(0.0, None, True)
    d, w, crossing = _separation_from_axis(x1, x2)
    if crossing:
        if strict:
            raise IntersectingGeodesics("endpoint pairs interleave")
        return GeodesicDistance(0.0, None, True)
    return GeodesicDistance(d, apply(t.inverse(), HPoint.from_complex(w)), False)


def dist_point_geodesic(z: HPoint, gamma: Geodesic) -> float:
    return dist_to_imaginary_axis(apply(_normalizer(gamma), z))


def ball_area(r: float) -> float:
    if r < 0:
        raise ValueError("radius must be non-negative")
    # 2 pi (cosh r - 1) = 4 pi sinh^2(r/2), the latter without cancellation
    return 4.0 * math.pi * math.sinh(r / 2.0) ** 2


def segment_frame(z: HPoint, w: HPoint) -> MoebiusElement:
    """Isometry F with F(i) = z and F(e^d i) = w, where d = dist(z, w)."""
    to_i = MoebiusElement(1.0, -z.x, 0.0, z.y)  # z -> (z - x)/y
    wp = apply(to_i, w).z
    # Cayley picture: e^d i sits on the positive real ray, and rotation about i
    # by phi multiplies by e^{i phi} there
    zeta = (wp - 1j) / (wp + 1j)
    phi = cmath.phase(zeta) if abs(zeta) > 0 else 0.0
    return to_i.inverse() @ MoebiusElement.rotation(phi)


def point_along(z: HPoint, w: HPoint, s: float) -> HPoint:
    """Point at arc length ``s`` from ``z`` on the geodesic through ``w``."""
    f = segment_frame(z, w)
    return apply(f, HPoint(0.0, math.exp(s)))


# ---------------------------------------------------------------------------
# vectorized helpers

def as_complex(points) -> np.ndarray:
    if isinstance(points, HPoint):
        return np.array([points.z])
    return np.asarray(points, dtype=complex)


def mats_array(elements: Sequence[MoebiusElement]) -> np.ndarray:
    return np.array([[[g.a, g.b], [g.c, g.d]] for g in elements], dtype=float).reshape(-1, 2, 2)


def apply_arr(mats: np.ndarray, z) -> np.ndarray:
    """Apply each matrix in a (k,2,2) stack to z (broadcast over leading axes)."""
    a, b, c, d = mats[..., 0, 0], mats[..., 0, 1], mats[..., 1, 0], mats[..., 1, 1]
    return (a * z + b) / (c * z + d)


def dist_arr(z, w) -> np.ndarray:
    z = np.asarray(z)
    w = np.asarray(w)
    # points that rounded onto (or just below) the real axis are at infinity
    with np.errstate(divide="ignore"):
        return 2.0 * np.arcsinh(np.abs(z - w) / (2.0 * np.sqrt(np.maximum(z.imag * w.imag, 0.0))))


def sinh_half_dist_sq_arr(z, w) -> np.ndarray:
    """sinh^2(d/2) = |z-w|^2 / (4 Im z Im w); monotone in the distance, cheap to compare."""
    z = np.asarray(z)
    w = np.asarray(w)
    diff = z - w
    return (diff.real ** 2 + diff.imag ** 2) / (4.0 * z.imag * w.imag)


def dist_to_axis_arr(z) -> np.ndarray:
    z = np.asarray(z)
    # cosh d = |z| / Im z
    return np.arccosh(np.maximum(np.abs(z) / z.imag, 1.0))


def matmul_arr(m1: np.ndarray, m2: np.ndarray) -> np.ndarray:
    return np.einsum("...ij,...jk->...ik", m1, m2)


def inverse_arr(m: np.ndarray) -> np.ndarray:
    out = np.empty_like(m)
    out[..., 0, 0] = m[..., 1, 1]
    out[..., 0, 1] = -m[..., 0, 1]
    out[..., 1, 0] = -m[..., 1, 0]
    out[..., 1, 1] = m[..., 0, 0]
    return out


def canonical_sign_arr(m: np.ndarray) -> np.ndarray:
    flat = m.reshape(-1, 4)
    nz = flat != 0.0
    first = np.argmax(nz, axis=1)
    sign = np.sign(flat[np.arange(flat.shape[0]), first])
    return (flat * sign[:, None]).reshape(m.shape)


def sample_disk(center: HPoint, radius: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` points uniform (w.r.t. hyperbolic area) in the disk of given radius."""
    u = rng.random(n)
    phi = rng.random(n) * 2.0 * np.pi
    # area within r is 4 pi sinh^2(r/2): invert the CDF
    r = 2.0 * np.arcsinh(np.sqrt(u) * math.sinh(radius / 2.0))
    return polar_offsets(center, r, phi)


def polar_offsets(center: HPoint, r: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Points at distance r in direction phi (rotation angle about ``center``)."""
    # point at distance r from i straight up is e^r i; rotate about i by phi
    w = 1j * np.exp(r)
    c, s = np.cos(phi / 2), np.sin(phi / 2)
    w = (c * w + s) / (-s * w + c)
    return center.y * w + center.x
