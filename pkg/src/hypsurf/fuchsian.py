"""Cocompact torsion-free Fuchsian groups: construction, orbit enumeration, systole.

A group is stored together with its Dirichlet domain at the basepoint.  The
domain is computed exactly as a convex polygon in the Klein model (bisectors
are straight lines there), which gives the side pairings used as BFS steps,
the domain radius, and a Gauss-Bonnet area check.  Orbit enumeration is a
breadth-first search over side pairings: if ``d(p, g p) <= R`` then the tiles
crossed by the segment from ``p`` to ``g p`` all have centers within
``R + radius`` of ``p``, so pruning at that bound loses nothing.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import hplane
from .errors import (
    AreaMismatch,
    DegenerateLength,
    DiscretenessSuspect,
    EnumerationBudgetExceeded,
    HyperbolicError,
    InconclusiveCutoff,
    NotHyperbolicGenerator,
)
from .hplane import HPoint, MoebiusElement

QUANTUM = 1e-7
DIAMETER_INFLATION = 1.10
DISCRETENESS_TRIPWIRE = 1e-6


@dataclass(frozen=True)
class EnumerationConfig:
    max_radius: float = 25.0
    max_depth: int = 96
    max_elements: int = 5_000_000


@dataclass(frozen=True)
class OrbitElement:
    element: MoebiusElement
    displacement: float


@dataclass(frozen=True)
class DirichletPolygon:
    """Dirichlet domain as a Klein-model polygon centred on the basepoint."""

    klein_vertices: np.ndarray  # (n, 2), counter-clockwise
    side_labels: Tuple[int, ...]  # index into ``candidates`` of the pairing for edge i
    candidates: Tuple[MoebiusElement, ...]

    @property
    def radius(self) -> float:
        k2 = np.sum(self.klein_vertices ** 2, axis=1)
        return float(np.max(np.arccosh(1.0 / np.sqrt(1.0 - k2))))

    @property
    def area(self) -> float:
        return _klein_polygon_area(self.klein_vertices)

    def vertices_upper(self, basepoint: HPoint) -> np.ndarray:
        """Vertices in the upper half-plane (the polygon was built with the basepoint at i)."""
        local = _klein_to_upper(self.klein_vertices)
        return hplane.apply_arr(_to_center(basepoint).inverse().matrix, local)

    @property
    def side_pairings(self) -> Tuple[MoebiusElement, ...]:
        seen = []
        for lab in self.side_labels:
            if lab not in seen:
                seen.append(lab)
        return tuple(self.candidates[i] for i in seen)


@dataclass(frozen=True)
class AreaCertificate:
    polygon_area: float
    mc_area: Optional[float] = None
    mc_stderr: Optional[float] = None
    mc_samples: int = 0


@dataclass(frozen=True, eq=False)
class FuchsianGroup:
    generators: Tuple[MoebiusElement, ...]
    genus: int
    basepoint: HPoint
    diameter_bound: float
    domain_radius: float
    side_pairings: Tuple[MoebiusElement, ...]
    area_certificate: AreaCertificate
    vertices: Tuple[complex, ...] = ()
    description: dict = field(default_factory=dict)
    curves: Dict[str, Tuple[int, ...]] = field(default_factory=dict)
    config: EnumerationConfig = EnumerationConfig()
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def area(self) -> float:
        return 4.0 * math.pi * (self.genus - 1)

    def word_element(self, word: Sequence[int]) -> MoebiusElement:
        g = MoebiusElement.identity()
        for letter in word:
            s = self.generators[abs(letter) - 1]
            g = g @ (s if letter > 0 else s.inverse())
        return g

    def curve(self, name: str) -> MoebiusElement:
        return self.word_element(self.curves[name])

    def conjugate(self, h: MoebiusElement) -> "FuchsianGroup":
        """The group h G h^-1 with all metadata carried along (basepoint -> h(p))."""
        return replace(
            self,
            generators=tuple(g.conjugate_by(h) for g in self.generators),
            side_pairings=tuple(g.conjugate_by(h) for g in self.side_pairings),
            basepoint=hplane.apply(h, self.basepoint),
            vertices=tuple(complex(v) for v in hplane.apply_arr(h.matrix, np.array(self.vertices))),
            description={**self.description, "conjugated": True},
            _cache={},
        )

    def to_json(self) -> dict:
        return {
            "kind": "generators",
            "genus": self.genus,
            "matrices": [[g.a, g.b, g.c, g.d] for g in self.generators],
            "curves": {k: list(v) for k, v in self.curves.items()},
            "basepoint": [self.basepoint.x, self.basepoint.y],
            # lets a re-import skip the search for the domain
            "side_pairings": [{"matrix": [g.a, g.b, g.c, g.d], "word": list(g.word)}
                              for g in self.side_pairings],
            "source": self.description,
        }


# ---------------------------------------------------------------------------
# Klein-model geometry around the basepoint

def _to_center(p: HPoint) -> MoebiusElement:
    return MoebiusElement(1.0, -p.x, 0.0, p.y)


def _hyperboloid(w: np.ndarray) -> np.ndarray:
    r2 = w.real ** 2 + w.imag ** 2
    return np.stack([(1 + r2) / (2 * w.imag), (r2 - 1) / (2 * w.imag), w.real / w.imag], axis=-1)


def _klein_to_upper(k: np.ndarray) -> np.ndarray:
    x0 = 1.0 / np.sqrt(1.0 - np.sum(k ** 2, axis=-1))
    x1, x2 = k[..., 0] * x0, k[..., 1] * x0
    y = 1.0 / (x0 - x1)
    return x2 * y + 1j * y


def _klein_polygon_area(verts: np.ndarray) -> float:
    n = len(verts)
    k2 = np.sum(verts ** 2, axis=1)
    x0 = 1.0 / np.sqrt(1.0 - k2)
    pts = np.column_stack([x0, verts[:, 0] * x0, verts[:, 1] * x0])
    center = np.array([1.0, 0.0, 0.0])

    def lor(u, v):
        return u[0] * v[0] - u[1] * v[1] - u[2] * v[2]

    total = 0.0
    for i in range(n):
        p, q = pts[i], pts[(i + 1) % n]
        det = abs(np.linalg.det(np.array([center, p, q])))
        den = 1.0 + lor(center, p) + lor(p, q) + lor(q, center)
        total += 2.0 * math.atan2(det, den)
    return total


def _clip(poly: List[Tuple[np.ndarray, int]], normal: np.ndarray, offset: float, label: int):
    """Clip a convex polygon by {k : normal . k <= offset}; edges carry labels."""
    out: List[Tuple[np.ndarray, int]] = []
    n = len(poly)
    for i in range(n):
        p, lab = poly[i]
        q, _ = poly[(i + 1) % n]
        fp = float(normal @ p) - offset
        fq = float(normal @ q) - offset
        if fp <= 0:
            out.append((p, lab))
            if fq > 0:
                t = fp / (fp - fq)
                out.append((p + t * (q - p), label))
        elif fq <= 0:
            t = fp / (fp - fq)
            out.append((p + t * (q - p), lab))
    return out


def dirichlet_polygon(basepoint: HPoint, candidates: Sequence[MoebiusElement]) -> Optional[DirichletPolygon]:
    """Intersect the bisector half-planes of ``candidates``; None if not compact."""
    t = _to_center(basepoint)
    mats = hplane.matmul_arr(hplane.matmul_arr(t.matrix[None], hplane.mats_array(candidates)),
                             t.inverse().matrix[None])
    w = hplane.apply_arr(mats, 1j)
    # orbit points that underflowed onto the real axis are too far to bound a side
    w = np.where(w.imag > 1e-300, w, 1j)
    hyp = _hyperboloid(w)
    # d(z, p) <= d(z, g p)  <=>  W1 k1 + W2 k2 <= W0 with W = g p - p on the hyperboloid
    W = hyp - np.array([1.0, 0.0, 0.0])
    pending = np.argsort(W[:, 0], kind="stable")
    pending = pending[W[pending, 0] > 1e-12]
    box = 1.5
    poly = [(np.array([-box, -box]), -1), (np.array([box, -box]), -1),
            (np.array([box, box]), -1), (np.array([-box, box]), -1)]
    while pending.size:
        j = pending[0]
        poly = _clip(poly, W[j, 1:], W[j, 0], int(j))
        if not poly:
            return None
        # keep only half-planes that still cut the current polygon
        verts = np.array([q for q, _ in poly])
        rest = pending[1:]
        slack = np.max(W[rest, 1:] @ verts.T, axis=1) - W[rest, 0]
        pending = rest[slack > 0]
    if any(lab < 0 for _, lab in poly):
        return None
    verts = np.array([p for p, _ in poly])
    if np.max(np.sum(verts ** 2, axis=1)) >= 1.0 - 1e-12:
        return None
    # drop edges of negligible length (roundoff slivers at vertices)
    keep_v, keep_l = [], []
    n = len(poly)
    for i in range(n):
        p, lab = poly[i]
        q, _ = poly[(i + 1) % n]
        if np.linalg.norm(q - p) > 1e-13:
            keep_v.append(p)
            keep_l.append(lab)
    return DirichletPolygon(np.array(keep_v), tuple(keep_l), tuple(candidates))


# ---------------------------------------------------------------------------
# breadth-first orbit search

def _keys(mats: np.ndarray) -> np.ndarray:
    """Hashable quantization of +-M, relative to the size of the entries."""
    flat = mats.reshape(-1, 4)
    scale = np.maximum(1.0, np.max(np.abs(flat), axis=1))
    # sign from the first entry that is clearly nonzero, so roundoff cannot flip it
    big = np.abs(flat) > 1e-6 * scale[:, None]
    first = np.argmax(big, axis=1)
    sign = np.sign(flat[np.arange(flat.shape[0]), first])
    return np.round(flat * (sign / (QUANTUM * scale))[:, None]).astype(np.int64)


def _drop_near_duplicates(mats: np.ndarray, disp: np.ndarray, order: np.ndarray) -> np.ndarray:
    """Remove entries of ``order`` (sorted by disp) equal up to sign to an earlier one.

    Catches the rare pairs whose quantized keys straddle a rounding boundary.
    """
    keep = []
    i, n = 0, order.size
    while i < n:
        j = i + 1
        while j < n and disp[order[j]] - disp[order[i]] < 1e-8:
            j += 1
        group = order[i:j]
        if group.size == 1:
            keep.append(group[0])
        else:
            m = mats[group].reshape(-1, 4)
            scale = np.maximum(1.0, np.max(np.abs(m), axis=1))
            taken: List[int] = []
            for a in range(group.size):
                dup = False
                for b in taken:
                    tol = 1e-6 * max(scale[a], scale[b])
                    if (np.max(np.abs(m[a] - m[b])) < tol) or (np.max(np.abs(m[a] + m[b])) < tol):
                        dup = True
                        break
                if not dup:
                    taken.append(a)
            keep.extend(group[taken])
        i = j
    return np.array(keep, dtype=int)


def _bfs(steps: Sequence[MoebiusElement], keep, config: EnumerationConfig, include_identity=True):
    """Breadth-first closure from the identity under right multiplication by ``steps``.

    ``keep(mats) -> bool mask`` decides which products are retained (and
    expanded further).  Returns (mats, words) in discovery order.
    """
    step_m = hplane.mats_array(steps)
    step_w = [s.word for s in steps]
    ident = np.eye(2)[None]
    seen = {_keys(ident)[0].tobytes()}
    all_m = [ident]
    all_w: List[Tuple[int, ...]] = [()]
    frontier_m, frontier_w = ident, [()]
    count = 1
    for depth in range(config.max_depth):
        if len(frontier_w) == 0:
            break
        prod = hplane.matmul_arr(frontier_m[:, None], step_m[None]).reshape(-1, 2, 2)
        mask = keep(prod)
        idx = np.nonzero(mask)[0]
        if idx.size == 0:
            frontier_m, frontier_w = prod[:0], []
            break
        cand = prod[idx]
        keys = _keys(cand)
        _, first = np.unique(keys, axis=0, return_index=True)
        first.sort()
        new_rows, new_w = [], []
        nstep = len(steps)
        for r in first:
            kb = keys[r].tobytes()
            if kb in seen:
                continue
            seen.add(kb)
            flat = idx[r]
            parent, s = divmod(int(flat), nstep)
            new_rows.append(r)
            new_w.append(hplane.free_reduce(frontier_w[parent] + step_w[s]))
        count += len(new_rows)
        if count > config.max_elements:
            raise EnumerationBudgetExceeded(f"more than {config.max_elements} elements")
        frontier_m = cand[np.array(new_rows, dtype=int)] if new_rows else cand[:0]
        frontier_w = new_w
        all_m.append(frontier_m)
        all_w.extend(new_w)
    else:
        if len(frontier_w):
            raise EnumerationBudgetExceeded(f"search depth exceeded {config.max_depth}")
    mats = np.concatenate(all_m)
    if not include_identity:
        return mats[1:], all_w[1:]
    return mats, all_w


def displacement_arr(mats: np.ndarray, p: HPoint) -> np.ndarray:
    return hplane.dist_arr(hplane.apply_arr(mats, p.z), p.z)


def _words_closure(gens: Sequence[MoebiusElement], length: int) -> List[MoebiusElement]:
    letters = []
    for k, g in enumerate(gens):
        letters.append(g.with_word((k + 1,)))
        letters.append(g.inverse().with_word((-(k + 1),)))
    out = list(letters)
    layer = list(letters)
    for _ in range(length - 1):
        nxt = []
        for w in layer:
            for s in letters:
                if w.word[-1] == -s.word[0]:
                    continue
                nxt.append(w @ s)
        out.extend(nxt)
        layer = nxt
    return out


def _dedupe(elements: Sequence[MoebiusElement]) -> List[MoebiusElement]:
    if not elements:
        return []
    keys = _keys(hplane.mats_array(elements))
    ident = _keys(np.eye(2)[None])[0].tobytes()
    seen = {ident}
    out = []
    for g, k in zip(elements, keys):
        kb = k.tobytes()
        if kb not in seen:
            seen.add(kb)
            out.append(g)
    return out


def _discreteness_tripwire(gens: Sequence[MoebiusElement], p: HPoint) -> None:
    elems = _dedupe(_words_closure(gens, 2))
    mats = hplane.mats_array(elems)
    orbit = np.concatenate([[p.z], hplane.apply_arr(mats, p.z)])
    d = hplane.dist_arr(orbit[:, None], orbit[None, :])
    np.fill_diagonal(d, np.inf)
    if np.min(d) < DISCRETENESS_TRIPWIRE:
        raise DiscretenessSuspect(
            f"two distinct short words move the basepoint to within {np.min(d):.3g}")


def _find_dirichlet(gens: Sequence[MoebiusElement], p: HPoint, genus: int,
                    config: EnumerationConfig, seed=None) -> DirichletPolygon:
    target = 4.0 * math.pi * (genus - 1)
    poly = dirichlet_polygon(p, seed) if seed else None
    t = _to_center(p)
    tinv = t.inverse()
    letters = [g.conjugate_by(t) for g in _words_closure(gens, 1)]
    radius = float(np.max(hplane.dist_arr(hplane.apply_arr(hplane.mats_array(letters), 1j), 1j)))
    small = EnumerationConfig(max_radius=config.max_radius, max_depth=config.max_depth,
                              max_elements=min(config.max_elements, 200_000))
    for _ in range(12 if poly is None else 0):
        def keep(m, r=radius):
            return hplane.dist_arr(hplane.apply_arr(m, 1j), 1j) <= r
        try:
            mats, words = _bfs(letters, keep, small, include_identity=False)
        except EnumerationBudgetExceeded:
            break
        cands = [MoebiusElement.from_matrix(m, w).conjugate_by(tinv) for m, w in zip(mats, words)]
        poly = dirichlet_polygon(p, cands)
        if poly is not None:
            break
        radius *= 1.25
    if poly is None:
        raise AreaMismatch("could not bound the Dirichlet domain; generators may not be cocompact")
    # The polygon always contains the true domain; both are convex, so once the
    # areas agree they coincide.  Until then, add products of current pairings.
    for _ in range(40):
        err = poly.area - target
        if abs(err) < 1e-9 * target:
            return poly
        if err < -1e-6 * target:
            break
        sides = list(poly.side_pairings)
        both = sides + [g.inverse() for g in sides]
        poly2 = dirichlet_polygon(p, _dedupe(sides + [g @ h for g in both for h in both]))
        if poly2 is None or poly2.area > poly.area - 1e-12 * target:
            poly = poly2 or poly
            break
        poly = poly2
    raise AreaMismatch(
        f"Dirichlet polygon area {poly.area:.9g} differs from 4pi(g-1) = {target:.9g}; "
        "generators do not present a closed surface of this genus")


# ---------------------------------------------------------------------------
# public constructors

def _as_elements(mats) -> List[MoebiusElement]:
    out = []
    for k, m in enumerate(mats):
        if isinstance(m, MoebiusElement):
            g = m
        else:
            arr = np.asarray(m, dtype=float).reshape(2, 2)
            det = float(np.linalg.det(arr))
            if det <= 0 or abs(det - 1.0) > 1e-9 * max(1.0, float(np.max(np.abs(arr))) ** 2):
                raise ValueError(f"generator {k} has determinant {det}, expected 1")
            g = MoebiusElement.from_matrix(arr)
        out.append(g.with_word((k + 1,)))
    return out


def from_generators(mats, genus: int, basepoint: HPoint = hplane.I, *,
                    curves: Optional[Dict[str, Sequence[int]]] = None,
                    description: Optional[dict] = None,
                    config: EnumerationConfig = EnumerationConfig(),
                    seed_candidates: Optional[Sequence[MoebiusElement]] = None) -> FuchsianGroup:
    """Validate generator matrices and build the group with its Dirichlet data.

    ``seed_candidates`` (group elements with words) can replace the initial
    search over short words when the generators themselves are long.
    """
    if len(mats) == 0:
        raise ValueError("empty generator list")
    if genus < 2:
        raise ValueError("genus must be at least 2")
    gens = _as_elements(mats)
    for k, g in enumerate(gens):
        if abs(g.trace) <= 2.0 + hplane.PARABOLIC_TOL:
            raise NotHyperbolicGenerator(f"generator {k} has |trace| {abs(g.trace):.6g} <= 2")
    _discreteness_tripwire(gens, basepoint)
    poly = _find_dirichlet(gens, basepoint, genus, config, seed_candidates)
    rho = poly.radius
    return FuchsianGroup(
        generators=tuple(gens),
        genus=genus,
        basepoint=basepoint,
        diameter_bound=DIAMETER_INFLATION * rho,
        domain_radius=rho,
        side_pairings=poly.side_pairings,
        area_certificate=AreaCertificate(polygon_area=poly.area),
        vertices=tuple(complex(v) for v in poly.vertices_upper(basepoint)),
        description=dict(description or {"kind": "generators"}),
        curves={k: tuple(v) for k, v in (curves or {}).items()},
        config=config,
    )


@functools.lru_cache(maxsize=None)
def bolza() -> FuchsianGroup:
    """Bolza surface: opposite sides of the regular octagon with angles pi/4 paired."""
    # inradius of the octagon: cosh = cot(pi/8) = 1 + sqrt(2); pairings translate twice that
    t = 2.0 * math.acosh(1.0 + math.sqrt(2.0))
    gens = []
    for k in range(4):
        r = MoebiusElement.rotation(k * math.pi / 4)
        gens.append(MoebiusElement.translation(t).conjugate_by(r))
    return from_generators(gens, 2, curves={"systolic": (1,)}, description={"kind": "bolza"})


# --- right-angled hexagons and the doubled pair of pants ---------------------

def hexagon_seams(a1: float, a2: float, a3: float) -> Tuple[float, float, float]:
    """Seam lengths b_i (b_i opposite a_i) of the right-angled hexagon with alternate sides a_i."""
    def opposite(x, y, z):
        return math.acosh((math.cosh(y) * math.cosh(z) + math.cosh(x)) / (math.sinh(y) * math.sinh(z)))
    return opposite(a1, a2, a3), opposite(a2, a3, a1), opposite(a3, a1, a2)


_REFLECT = np.diag([-1.0, 1.0])


def _hexagon_frames(a: Sequence[float]) -> List[np.ndarray]:
    """Frames at the start of each side walking a1, b3, a2, b1, a3, b2 with left turns."""
    b = hexagon_seams(*a)
    sides = [a[0], b[2], a[1], b[0], a[2], b[1]]
    frame = np.eye(2)
    frames = []
    turn = MoebiusElement.rotation(math.pi / 2).matrix
    for length in sides:
        frames.append(frame.copy())
        frame = frame @ MoebiusElement.translation(length).matrix @ turn
    frames.append(frame)
    return frames


def _hexagon_closure_error(a: Sequence[float]) -> float:
    end = MoebiusElement.from_matrix(_hexagon_frames(a)[-1])
    return max(abs(x - y) for x, y in zip(end.entries, MoebiusElement.identity().entries))


def _reflection(frame: np.ndarray) -> np.ndarray:
    return frame @ _REFLECT @ np.linalg.inv(frame)


def _hexagon_points(a: Sequence[float]) -> Dict[str, HPoint]:
    frames = _hexagon_frames(a)
    b = hexagon_seams(*a)
    sides = [a[0], b[2], a[1], b[0], a[2], b[1]]
    pts = {}
    for k in range(6):
        f = MoebiusElement.from_matrix(frames[k])
        pts[f"v{k}"] = f(hplane.I)
        pts[f"m{k}"] = f(HPoint(0.0, math.exp(sides[k] / 2)))
    verts = np.array([pts[f"v{k}"].z for k in range(6)])
    hyp = _hyperboloid(verts).sum(axis=0)
    hyp /= math.sqrt(hyp[0] ** 2 - hyp[1] ** 2 - hyp[2] ** 2)
    k = hyp[1:] / hyp[0]
    pts["centroid"] = HPoint.from_complex(complex(_klein_to_upper(k[None])[0]))
    return pts


@functools.lru_cache(maxsize=64)
def doubled_pants(L1: float, L2: float, L3: float, basepoint: Optional[str] = None) -> FuchsianGroup:
    """Genus-2 double (zero twists) of the pair of pants with boundary lengths L1, L2, L3.

    The surface is H^2 modulo the kernel of the map from the reflection group of
    the right-angled hexagon with alternate sides L_i/2 onto (Z/2)^2 sending
    reflections in the L-sides to (1,0) and in the seams to (0,1).  The curves
    ``gamma1..3`` are products of two seam reflections and have length L_i.
    """
    lengths = (float(L1), float(L2), float(L3))
    for L in lengths:
        if not (1e-4 <= L <= 30.0):
            raise DegenerateLength(f"boundary length {L} outside [1e-4, 30]")
    a = [L / 2 for L in lengths]
    frames = _hexagon_frames(a)
    refl = {name: _reflection(frames[k])
            for k, name in enumerate(["a1", "b3", "a2", "b1", "a3", "b2"])}

    def prod(*names):
        m = np.eye(2)
        for nm in names:
            m = m @ refl[nm]
        return MoebiusElement.from_matrix(m)

    curves = [prod("b2", "b3"), prod("b3", "b1"), prod("b1", "b2")]
    # Reidemeister-Schreier generators for the kernel, transversal {1, a1, b1, a1 b1};
    # ``rewrite`` maps (coset colour, reflection) to a signed generator index (0 = trivial)
    color = {n: (1, 0) if n[0] == "a" else (0, 1) for n in refl}
    transversal = {(0, 0): (), (1, 0): ("a1",), (0, 1): ("b1",), (1, 1): ("a1", "b1")}
    gens = list(curves)
    rewrite = {}
    for tc, t in transversal.items():
        for s in _SIDES:
            target = ((tc[0] + color[s][0]) % 2, (tc[1] + color[s][1]) % 2)
            g = prod(*(t + (s,) + tuple(reversed(transversal[target]))))
            if g.is_identity(1e-9):
                rewrite[tc, s] = 0
                continue
            for k, h in enumerate(gens):
                if g.is_close(h, 1e-9):
                    rewrite[tc, s] = k + 1
                    break
                if g.is_close(h.inverse(), 1e-9):
                    rewrite[tc, s] = -(k + 1)
                    break
            else:
                gens.append(g)
                rewrite[tc, s] = len(gens)

    def gamma_word(rword):
        c, out = (0, 0), []
        for s in rword:
            idx = rewrite[c, s]
            if idx:
                out.append(idx)
            c = ((c[0] + color[s][0]) % 2, (c[1] + color[s][1]) % 2)
        return hplane.free_reduce(out)

    pts = _hexagon_points(a)
    verts = np.array([pts[f"v{k}"].z for k in range(6)])
    hex_diam = float(np.max(hplane.dist_arr(verts[:, None], verts[None, :])))
    choices = [basepoint] if basepoint else ["centroid"] + [f"v{k}" for k in range(6)] + [f"m{k}" for k in range(6)]
    best = None
    for name in choices:
        p = pts[name]
        t = _to_center(p)
        tm, tim = t.matrix, t.inverse().matrix
        conj = [g.conjugate_by(t) for g in gens]
        rmats = np.array([tm @ refl[s] @ tim for s in _SIDES])
        try:
            for length in (6, 8, 10):
                mats, rwords = _reflection_words(rmats, length)
                seed = [MoebiusElement.from_matrix(m, gamma_word(w)) for m, w in zip(mats, rwords)
                        if len(w) % 2 == 0 and sum(color[x][0] for x in w) % 2 == 0]
                if dirichlet_polygon(hplane.I, seed) is not None:
                    break
            grp = from_generators(conj, 2, curves={"gamma1": (1,), "gamma2": (2,), "gamma3": (3,)},
                                  description={"kind": "doubled_pants", "lengths": list(lengths),
                                               "basepoint": name},
                                  seed_candidates=seed)
        except HyperbolicError:
            continue
        if best is None or grp.domain_radius < best.domain_radius - 1e-12:
            best = grp
    if best is None:
        raise AreaMismatch("doubled pants construction failed for every basepoint")
    return best


_SIDES = ["a1", "b3", "a2", "b1", "a3", "b2"]


def _reflection_words(rmats: np.ndarray, length: int):
    """Distinct reflection-group elements of word length <= ``length`` (as matrices)."""
    ident = np.eye(2)[None]
    seen = {_keys(ident)[0].tobytes()}
    out_m, out_w = [], []
    frontier, fwords = ident, [()]
    for _ in range(length):
        prod = hplane.matmul_arr(frontier[:, None], rmats[None]).reshape(-1, 2, 2)
        keys = _keys(prod)
        _, first = np.unique(keys, axis=0, return_index=True)
        first.sort()
        nxt, nw = [], []
        for r in first:
            kb = keys[r].tobytes()
            if kb in seen:
                continue
            seen.add(kb)
            parent, s = divmod(int(r), len(rmats))
            nxt.append(r)
            nw.append(fwords[parent] + (_SIDES[s],))
        frontier = prod[np.array(nxt, dtype=int)] if nxt else prod[:0]
        fwords = nw
        out_m.extend(frontier)
        out_w.extend(nw)
    return out_m, out_w


def from_json(obj) -> FuchsianGroup:
    if isinstance(obj, str):
        obj = json.loads(obj)
    kind = obj.get("kind")
    if kind == "bolza":
        return bolza()
    if kind == "doubled_pants":
        return doubled_pants(*obj["lengths"])
    if kind == "generators":
        mats = [np.array(m, dtype=float).reshape(2, 2) for m in obj["matrices"]]
        seeds = [MoebiusElement.from_matrix(np.array(s["matrix"], dtype=float).reshape(2, 2), s["word"])
                 for s in obj.get("side_pairings", [])]
        base = HPoint(*obj["basepoint"]) if "basepoint" in obj else hplane.I
        return from_generators(mats, int(obj["genus"]), base, curves=obj.get("curves"),
                               description=obj.get("source") or {"kind": "generators"},
                               seed_candidates=seeds or None)
    raise ValueError(f"unknown surface kind {kind!r}")


# ---------------------------------------------------------------------------
# enumeration and systole
#
# All searches below are breadth-first over side pairings, walking from tile to
# adjacent tile.  The tiles meeting a ball form a side-connected set (removing
# vertices does not disconnect a disk), so keeping exactly the tiles h D with
# d(c, h D) <= R finds every tile meeting B(c, R) and nothing far away.

def _edge_frames(G: FuchsianGroup):
    hit = G._cache.get("edges")
    if hit is None:
        v = [HPoint.from_complex(z) for z in G.vertices]
        frames, lengths = [], []
        for i in range(len(v)):
            a, b = v[i], v[(i + 1) % len(v)]
            frames.append(hplane.segment_frame(a, b).inverse())
            lengths.append(hplane.dist(a, b))
        hit = (hplane.mats_array(frames), np.array(lengths))
        G._cache["edges"] = hit
    return hit


def dist_to_segment_arr(w: np.ndarray, frames_inv: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """Distances from points ``w`` (n,) to segments given by frames (m,2,2); result (n, m).

    ``frames_inv`` maps each segment onto [i, e^L i] of the imaginary axis.
    """
    u = hplane.apply_arr(frames_inv[None], np.asarray(w)[:, None])
    r = np.abs(u)
    top = np.exp(lengths)[None]
    perp = np.arccosh(np.maximum(r / u.imag, 1.0))
    d_lo = hplane.dist_arr(u, 1j)
    d_hi = hplane.dist_arr(u, 1j * top)
    return np.where(r < 1.0, d_lo, np.where(r > top, d_hi, perp))


def dist_to_domain(G: FuchsianGroup, w) -> np.ndarray:
    """Hyperbolic distance from points to the Dirichlet domain (0 inside)."""
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    frames, lengths = _edge_frames(G)
    d = np.min(dist_to_segment_arr(w, frames, lengths), axis=1)
    return np.where(in_domain(G, w, slack=1e-12), 0.0, d)


def _tiles_meeting(G: FuchsianGroup, centers: np.ndarray, radius: float):
    """All h (with words) whose tile h D meets B(c, radius) for some c in ``centers``.

    Every center must lie in the domain; the union of balls then meets D itself,
    so the search can start at the identity.
    """
    centers = np.atleast_1d(np.asarray(centers, dtype=complex))

    def keep(m):
        inv = hplane.inverse_arr(m)
        ok = np.zeros(m.shape[0], dtype=bool)
        for c in centers:
            pending = ~ok
            if pending.any():
                ok[pending] = dist_to_domain(G, hplane.apply_arr(inv[pending], c)) <= radius + 1e-9
        return ok

    return _bfs(list(G.side_pairings), keep, G.config, include_identity=True)


def tiles_near(G: FuchsianGroup, c, radius: float):
    """All h whose tile meets B(c, radius), for an arbitrary point c."""
    c = complex(c.z if isinstance(c, HPoint) else c)
    zc, k, kw = reduce_points(G, c, with_words=True)
    mats, words = _tiles_meeting(G, zc, radius)
    kinv = hplane.inverse_arr(k[0])
    kinv_w = hplane.invert_word(kw[0])
    return hplane.matmul_arr(kinv[None], mats), [hplane.free_reduce(kinv_w + w) for w in words]


def elements_near(G: FuchsianGroup, c, radius: float):
    """All h with d(c, h p) <= radius as (mats, words, distances), sorted by distance."""
    c = complex(c.z if isinstance(c, HPoint) else c)
    mats, words = tiles_near(G, c, radius)
    d = hplane.dist_arr(hplane.apply_arr(mats, G.basepoint.z), c)
    sel = np.nonzero(d <= radius)[0]
    sel = _drop_near_duplicates(mats, d, sel[np.lexsort((sel, d[sel]))])
    return mats[sel], [words[i] for i in sel], d[sel]


def orbit_arrays(G: FuchsianGroup, radius: float):
    """Cached (mats, displacements, words) for all g != id with d(p, g p) <= radius."""
    key = ("orbit", round(radius, 9))
    hit = G._cache.get(key)
    if hit is None:
        if radius > G.config.max_radius:
            raise EnumerationBudgetExceeded(f"radius {radius} above cap {G.config.max_radius}")
        mats, words = _tiles_meeting(G, G.basepoint.z, radius)
        mats, words = mats[1:], words[1:]
        disp = displacement_arr(mats, G.basepoint)
        sel = np.nonzero(disp <= radius)[0]
        order = _drop_near_duplicates(mats, disp, sel[np.lexsort((sel, disp[sel]))])
        hit = (mats[order], disp[order], [words[i] for i in order])
        G._cache[key] = hit
    return hit


def enumerate_orbit(G: FuchsianGroup, radius: float) -> List[OrbitElement]:
    """All g != id with d(p, g p) <= radius, sorted by (displacement, word)."""
    mats, disp, words = orbit_arrays(G, radius)
    out = [OrbitElement(MoebiusElement.from_matrix(m, w), float(d)) for m, w, d in zip(mats, words, disp)]
    out.sort(key=lambda e: (round(e.displacement, 12), e.element.word))
    return out


def neighborhood_table(G: FuchsianGroup, reach: float):
    """Cached (mats, words) of every g != id whose tile meets the ``reach``-neighbourhood of D.

    For z in D, any g with d(z, g z) <= reach is in the table.  The neighbourhood
    sits inside B(p, reach + domain_radius), which is what the search covers.
    """
    key = ("nbhd", round(reach, 9))
    hit = G._cache.get(key)
    if hit is None:
        mats, words = _tiles_meeting(G, G.basepoint.z, reach + G.domain_radius)
        hit = (mats[1:], words[1:])
        G._cache[key] = hit
    return hit


def inj_table(G: FuchsianGroup):
    """Table that contains a shortest loop element for every point of the domain."""
    return neighborhood_table(G, 2.0 * math.log(4 * G.genus - 2) + 1e-6)


def systole(G: FuchsianGroup, cutoff: float = 10.0) -> Tuple[float, MoebiusElement]:
    """Shortest closed geodesic, certified complete up to length cutoff - 2*diameter_bound.

    A closed geodesic of length l has a lift whose axis meets the domain at some
    x, and then g x lies in g D within l of D, so g is in the neighbourhood
    table for reach l.  Ties go to the shortlex-smallest word.
    """
    db = G.diameter_bound
    limit = cutoff - 2 * db
    if limit <= 0:
        raise InconclusiveCutoff(f"cutoff {cutoff} does not exceed 2*diameter_bound = {2 * db:.4f}")
    reach = min(limit, 1.0)
    while True:
        mats, words = neighborhood_table(G, reach)
        tr = np.abs(mats[:, 0, 0] + mats[:, 1, 1])
        lengths = 2.0 * np.arccosh(np.maximum(tr / 2.0, 1.0))
        best = float(np.min(lengths)) if lengths.size else math.inf
        if best <= reach + 1e-12:
            break
        if reach >= limit:
            raise InconclusiveCutoff(
                f"no closed geodesic of length <= cutoff - 2*diameter_bound = {limit:.4f}")
        reach = min(limit, max(best, 2 * reach))
    cands = np.nonzero(lengths <= best + 1e-9)[0]
    i = min(cands, key=lambda j: (len(words[j]), words[j]))
    return float(lengths[i]), MoebiusElement.from_matrix(mats[i], words[i])


# ---------------------------------------------------------------------------
# Dirichlet domain sampling

def _side_data(G: FuchsianGroup):
    hit = G._cache.get("sides")
    if hit is None:
        mats = hplane.mats_array(G.side_pairings)
        hit = hplane.apply_arr(mats, G.basepoint.z)
        G._cache["sides"] = hit
    return hit


def in_domain(G: FuchsianGroup, z: np.ndarray, slack: float = 1e-12) -> np.ndarray:
    """Dirichlet membership d(z, p) <= d(z, g p) + slack against the side pairings."""
    z = np.asarray(z, dtype=complex)
    images = _side_data(G)
    d0 = hplane.dist_arr(z, G.basepoint.z)
    ok = np.ones(z.shape, dtype=bool)
    for w in images:
        ok &= d0 <= hplane.dist_arr(z, w) + slack
    return ok


def mc_sample_domain(G: FuchsianGroup, n: int, seed: int) -> np.ndarray:
    """``n`` area-uniform points of the Dirichlet domain (complex array)."""
    pts, _, _ = _mc_domain(G, n, seed)
    return pts


def _mc_domain(G: FuchsianGroup, n: int, seed: int):
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    batch = max(1024, min(1 << 20, int(2 * n * hplane.ball_area(G.diameter_bound) / G.area) + 1024))
    got, proposed = [], 0
    have = 0
    while have < n:
        z = hplane.sample_disk(G.basepoint, G.diameter_bound, batch, rng)
        acc = in_domain(G, z)
        take = z[acc]
        if have + take.size > n:
            # count proposals up to the n-th acceptance so the ratio stays unbiased
            last = np.nonzero(acc)[0][n - have - 1]
            proposed += int(last) + 1
            take = take[: n - have]
        else:
            proposed += batch
        got.append(take)
        have += take.size
    return np.concatenate(got), n, proposed


def area_estimate(G: FuchsianGroup, n: int, seed: int) -> Tuple[float, float]:
    """Monte-Carlo area of the Dirichlet domain and its standard error."""
    _, acc, proposed = _mc_domain(G, n, seed)
    p = acc / proposed
    ball = hplane.ball_area(G.diameter_bound)
    return ball * p, ball * math.sqrt(p * (1 - p) / proposed)


def certify_area(G: FuchsianGroup, n: int = 200_000, seed: int = 0, sigmas: float = 3.0) -> AreaCertificate:
    area, se = area_estimate(G, n, seed)
    if abs(area - G.area) > sigmas * se:
        raise AreaMismatch(f"MC area {area:.6f} +- {se:.2g} vs 4pi(g-1) = {G.area:.6f}")
    return replace(G.area_certificate, mc_area=area, mc_stderr=se, mc_samples=n)


# ---------------------------------------------------------------------------
# moving points into the domain

def reduce_points(G: FuchsianGroup, z, max_iter: int = 200, with_words: bool = False):
    """Move points into the Dirichlet domain.

    Returns ``(z', h)`` with ``z' = h z`` (``h`` as a (k,2,2) stack), plus the
    words of ``h`` when ``with_words`` is set.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex)).copy()
    h = np.broadcast_to(np.eye(2), (z.size, 2, 2)).copy()
    words: List[Tuple[int, ...]] = [()] * z.size
    sides = hplane.mats_array(G.side_pairings)
    inv = hplane.inverse_arr(sides)
    inv_words = [hplane.invert_word(g.word) for g in G.side_pairings]
    images = _side_data(G)
    p = G.basepoint.z
    for _ in range(max_iter):
        s0 = hplane.sinh_half_dist_sq_arr(z, p)
        s = hplane.sinh_half_dist_sq_arr(z[:, None], images[None, :])
        j = np.argmin(s, axis=1)
        move = s[np.arange(z.size), j] < s0 * (1 - 1e-12)
        if not move.any():
            return (z, h, words) if with_words else (z, h)
        idx = np.nonzero(move)[0]
        g = inv[j[idx]]
        z[idx] = hplane.apply_arr(g, z[idx])
        h[idx] = hplane.matmul_arr(g, h[idx])
        if with_words:
            for i in idx:
                words[i] = hplane.free_reduce(inv_words[j[i]] + words[i])
    raise HyperbolicError("point reduction did not converge")




BUILTINS = ("bolza", "doubled_pants")


def builtin(name: str, params: Sequence[float] = ()) -> FuchsianGroup:
    """Look up a built-in surface: ``bolza`` (no parameters) or ``doubled_pants`` (three lengths)."""
    if name == "bolza":
        if params:
            raise ValueError("bolza takes no parameters")
        return bolza()
    if name == "doubled_pants":
        if len(params) != 3:
            raise ValueError("doubled_pants needs three boundary lengths")
        return doubled_pants(*(float(x) for x in params))
    raise ValueError(f"unknown surface {name!r}; choose from {', '.join(BUILTINS)}")
