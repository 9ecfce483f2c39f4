"""Seeded verification suites for the injectivity-radius inequalities.

Every suite turns one inequality into repeated trials, records the slack
(``margin``, positive when the inequality holds) of each trial and keeps the
worst witnesses.  Trials are seeded from ``(seed, trial index)`` so a report
depends only on its configuration.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__, collar, fuchsian, hplane, loops, riera
from .constants import ledger_by_id
from .errors import (HypothesisViolated, InsufficientThickPoints, InsufficientThinPoints)
from .fuchsian import FuchsianGroup
from .hplane import HPoint

SurfaceSpec = Tuple[str, Tuple[float, ...]]

ASINH1 = math.asinh(1.0)
SHRINK = math.sqrt(2.0) - 1.0
MAX_WITNESSES = 8


@dataclass(frozen=True)
class SuiteConfig:
    """Parameters of one suite run; ``None`` fields fall back to the suite's defaults."""

    surfaces: Tuple[SurfaceSpec, ...] = ()
    trials: Optional[int] = None
    tol: Optional[float] = None
    seed: int = 0
    n_mc: int = 100_000
    n_s: int = 64
    profile_points: int = 129
    eps0s: Tuple[float, ...] = (0.02, 0.05, 0.1)
    word_cutoffs: Tuple[int, ...] = (8, 10, 12, 14)

    def __post_init__(self):
        if self.trials is not None and self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.tol is not None and self.tol < 0:
            raise ValueError("tolerance must be non-negative")
        if any(e <= 0 for e in self.eps0s):
            raise ValueError("eps0 values must be positive")

    def resolved(self, surfaces: Sequence[SurfaceSpec], trials: int, tol: float) -> "SuiteConfig":
        return replace(self,
                       surfaces=tuple(self.surfaces) or tuple(surfaces),
                       trials=self.trials if self.trials is not None else trials,
                       tol=self.tol if self.tol is not None else tol)

    def to_json(self) -> dict:
        d = asdict(self)
        d["surfaces"] = [[name, list(params)] for name, params in self.surfaces]
        return d


@dataclass
class VerificationReport:
    suite_id: str
    seed: int
    trials: int = 0
    failures: int = 0
    skipped: int = 0
    worst_margin: float = math.inf
    witnesses: List[dict] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    config: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.trials > 0

    def record(self, description: dict, observed, bound, margin: float, tol: float) -> None:
        self.trials += 1
        failed = margin < -tol
        if failed:
            self.failures += 1
        self.worst_margin = min(self.worst_margin, margin)
        self.witnesses.append({"input": description, "observed": observed, "bound": bound,
                               "margin": margin, "failed": failed})
        # keep every failure plus the tightest passes
        if len(self.witnesses) > 4 * MAX_WITNESSES:
            self._trim()

    def _trim(self) -> None:
        fails = [w for w in self.witnesses if w["failed"]]
        rest = sorted((w for w in self.witnesses if not w["failed"]),
                      key=lambda w: (w["margin"], json.dumps(w["input"], sort_keys=True)))
        self.witnesses = fails[:4 * MAX_WITNESSES] + rest[:MAX_WITNESSES]

    def to_json(self) -> dict:
        self._trim()
        wit = sorted(self.witnesses, key=lambda w: (not w["failed"], w["margin"],
                                                     json.dumps(w["input"], sort_keys=True)))
        return {"suite_id": self.suite_id, "version": __version__, "seed": self.seed,
                "trials": self.trials, "failures": self.failures, "skipped": self.skipped,
                "passed": self.passed, "worst_margin": self.worst_margin,
                "witnesses": wit, "notes": list(self.notes), "config": self.config}

    def dumps(self) -> str:
        return dumps(self.to_json())


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, fixed separators, shortest float repr."""
    return json.dumps(obj, sort_keys=True, indent=2, separators=(",", ": "))


def trial_rng(seed: int, counter: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, counter]))


def _surface(spec: SurfaceSpec) -> FuchsianGroup:
    return fuchsian.builtin(spec[0], spec[1])


def _label(spec: SurfaceSpec) -> str:
    name, params = spec
    return f"{name}({','.join(f'{p:g}' for p in params)})" if params else name


def _pt(p: HPoint) -> List[float]:
    return [p.x, p.y]


def _short_curves(G: FuchsianGroup) -> List[Tuple[str, hplane.MoebiusElement, float]]:
    out = []
    for name in sorted(G.curves):
        g = G.curve(name)
        L = hplane.translation_length(g)
        if collar.in_regime(L):
            out.append((name, g, L))
    return out


def _collar_point(G: FuchsianGroup, g, L: float, s: float, rng: np.random.Generator) -> HPoint:
    t = rng.uniform(0.0, L)
    side = 1.0 if rng.random() < 0.5 else -1.0
    return loops.point_on_geodesic(G, g, t, side * s)


# ---------------------------------------------------------------------------
# suites

def suite_inj_short(cfg: SuiteConfig = SuiteConfig()) -> VerificationReport:
    """(sqrt2 - 1) inj(p) <= inj(sigma(s)) <= inj(p) along a shortest loop at a thin point p.

    Thin points are placed by inverting the collar formula: a target inj value
    t in (L/2, asinh 1] fixes the distance to the core, the position along
    the core and the side are random.
    """
    cfg = cfg.resolved([("doubled_pants", (0.5, 6.0, 6.0))], 500, 1e-6)
    rep = VerificationReport("inj_short", cfg.seed, config=cfg.to_json())
    pools = []
    for spec in cfg.surfaces:
        G = _surface(spec)
        short = _short_curves(G)
        if not short:
            raise InsufficientThinPoints(f"{_label(spec)} has no curve of length <= 2 asinh(1)")
        pools.append((spec, G, short))
    for k in range(cfg.trials):
        rng = trial_rng(cfg.seed, k)
        spec, G, short = pools[k % len(pools)]
        name, g, L = short[int(rng.integers(len(short)))]
        target = ASINH1 - rng.random() * (ASINH1 - L / 2.0)
        s = math.acosh(max(1.0, math.sinh(target) / math.sinh(L / 2.0)))
        p = _collar_point(G, g, L, s, rng)
        inj, loop = loops.injectivity_radius(G, p)
        if inj > ASINH1:
            rep.skipped += 1
            continue
        prof = loops.inj_profile(G, loop, cfg.profile_points)
        lo, hi = prof.minimum, prof.maximum
        margin = min(lo - SHRINK * inj, inj - hi)
        rep.record({"surface": _label(spec), "curve": name, "trial": k, "point": _pt(p), "inj": inj},
                   {"profile_min": lo, "profile_max": hi}, {"lower": SHRINK * inj, "upper": inj},
                   margin, cfg.tol)
    return rep


def suite_inj_thick(cfg: SuiteConfig = SuiteConfig()) -> VerificationReport:
    """Along a shortest loop at a point with inj > asinh 1, inj stays above DEEP_INJ."""
    cfg = cfg.resolved([("bolza", ()), ("doubled_pants", (0.3, 5.0, 5.0))], 500, 1e-4)
    deep = float(ledger_by_id()["DEEP_INJ"].value)
    rep = VerificationReport("inj_thick", cfg.seed, config=cfg.to_json())
    surfaces = [(spec, _surface(spec)) for spec in cfg.surfaces]
    for k in range(cfg.trials):
        rng = trial_rng(cfg.seed, k)
        spec, G = surfaces[k % len(surfaces)]
        p = None
        for _attempt in range(64):
            z = fuchsian.mc_sample_domain(G, 16, int(rng.integers(2 ** 62)))
            inj = loops.injectivity_radii(G, z)
            thick = np.nonzero(inj > ASINH1)[0]
            if thick.size:
                p = HPoint.from_complex(complex(z[thick[0]]))
                break
        if p is None:
            raise InsufficientThickPoints(f"no point with inj > asinh(1) found on {_label(spec)}")
        inj, loop = loops.injectivity_radius(G, p)
        prof = loops.inj_profile(G, loop, cfg.profile_points)
        rep.record({"surface": _label(spec), "trial": k, "point": _pt(p), "inj": inj},
                   {"profile_min": prof.minimum}, {"lower": deep}, prof.minimum - deep, cfg.tol)
    if rep.trials and rep.worst_margin > 0.1:
        rep.notes.append(f"bound is loose here: worst margin {rep.worst_margin:.4f}")
    return rep


def _neck_fields(loop: loops.GeodesicLoop):
    mid = loops.loop_point(loop, loop.length / 3.0)
    return [loops.ConstantField(1.0),
            loops.RadialField(mid, "bump", width=0.01),
            loops.RadialField(mid, "ball", width=0.2, smoothing=0.05)]


def suite_neck(cfg: SuiteConfig = SuiteConfig()) -> VerificationReport:
    """lhs / rhs of the neck inequality stays below 1 + 3 combined standard errors.

    ``trials`` counts base points per surface; each base point runs every
    (eps0, field) pair and once more with eps0 = inj/4, which forces m <= 5.
    """
    cfg = cfg.resolved([("doubled_pants", (1.2, 1.2, 1.2)), ("bolza", ())], 1, 0.0)
    rep = VerificationReport("neck", cfg.seed, config=cfg.to_json())
    counter = 0
    for spec in cfg.surfaces:
        G = _surface(spec)
        for b in range(cfg.trials):
            rng = trial_rng(cfg.seed, 10_000 + counter)
            counter += 1
            p = HPoint.from_complex(complex(fuchsian.mc_sample_domain(G, 1, int(rng.integers(2 ** 62)))[0]))
            inj, loop = loops.injectivity_radius(G, p)
            eps_list = [(e, False) for e in cfg.eps0s] + [(inj / 4.0, True)]
            for eps0, forced in eps_list:
                for f in _neck_fields(loop):
                    seed = int(rng.integers(2 ** 62))
                    desc = {"surface": _label(spec), "base": b, "point": _pt(p), "inj": inj,
                            "eps0": eps0, "field": f.to_json(), "forced_small_m": forced, "seed": seed}
                    try:
                        res = loops.neck_check(G, loop, eps0, f, n_mc=cfg.n_mc, n_s=cfg.n_s, seed=seed,
                                               profile_points=cfg.profile_points)
                    except HypothesisViolated:
                        rep.skipped += 1
                        continue
                    bound = 1.0 + 3.0 * res.se_ratio
                    desc["m"] = res.m
                    rep.record(desc, res.to_json(), bound, bound - res.ratio, cfg.tol)
    return rep


def suite_collar_cross(cfg: SuiteConfig = SuiteConfig()) -> VerificationReport:
    """Enumerated inj against the collar formula at random points of the collar."""
    cfg = cfg.resolved([("doubled_pants", (0.5, 6.0, 6.0))], 200, 1e-6)
    rep = VerificationReport("collar_cross", cfg.seed, config=cfg.to_json())
    pools = []
    for spec in cfg.surfaces:
        G = _surface(spec)
        short = _short_curves(G)
        if not short:
            raise InsufficientThinPoints(f"{_label(spec)} has no curve of length <= 2 asinh(1)")
        pools.append((spec, G, short))
    for k in range(cfg.trials):
        rng = trial_rng(cfg.seed, k)
        spec, G, short = pools[k % len(pools)]
        name, g, L = short[int(rng.integers(len(short)))]
        s = rng.random() * collar.half_width(L)
        p = _collar_point(G, g, L, s, rng)
        formula = collar.inj_from_core_distance(L, s)
        inj = float(loops.injectivity_radii(G, [p.z])[0])
        err = abs(inj - formula)
        rep.record({"surface": _label(spec), "curve": name, "trial": k, "core_distance": s,
                    "point": _pt(p)}, inj, formula, cfg.tol - err, 0.0)
    return rep


def suite_pants_bound(cfg: SuiteConfig = SuiteConfig()) -> VerificationReport:
    """inj < L/2 + ln 6 at uniformly sampled points of a surface glued from pants with cuffs <= L."""
    cfg = cfg.resolved([("doubled_pants", (6.0, 6.0, 6.0))], 1000, 0.0)
    rep = VerificationReport("pants_bound", cfg.seed, config=cfg.to_json())
    per = [cfg.trials // len(cfg.surfaces) + (i < cfg.trials % len(cfg.surfaces))
           for i in range(len(cfg.surfaces))]
    for i, (spec, n) in enumerate(zip(cfg.surfaces, per)):
        if n == 0 or spec[0] != "doubled_pants":
            if spec[0] != "doubled_pants":
                rep.notes.append(f"{_label(spec)} skipped: not built from pants with known cuffs")
            continue
        G = _surface(spec)
        L = max(spec[1])
        bound = L / 2.0 + math.log(6.0)
        z = fuchsian.mc_sample_domain(G, n, int(trial_rng(cfg.seed, i).integers(2 ** 62)))
        inj = loops.injectivity_radii(G, z)
        for k in range(n):
            # strict inequality: a margin of exactly 0 counts as a failure
            margin = bound - float(inj[k])
            rep.record({"surface": _label(spec), "trial": k, "point": [z[k].real, z[k].imag]},
                       float(inj[k]), bound, margin if margin > 0 else -math.inf, cfg.tol)
    return rep


def suite_riera_properties(cfg: SuiteConfig = SuiteConfig()) -> VerificationReport:
    """Structural checks of the truncated Riera sum."""
    cfg = cfg.resolved([("bolza", ()), ("doubled_pants", (1.2, 1.2, 1.2)),
                        ("doubled_pants", (0.5, 6.0, 6.0))], 1, 0.0)
    rep = VerificationReport("riera_properties", cfg.seed, config=cfg.to_json())

    us = 1.0 + np.logspace(-6, 8, 2001)
    terms = riera.riera_term(us)
    rep.record({"check": "term positivity", "grid": "1 + logspace(-6, 8, 2001)"},
               float(terms.min()), 0.0, float(terms.min()), 0.0)
    steps = np.diff(terms)
    rep.record({"check": "term strictly decreasing", "grid": "1 + logspace(-6, 8, 2001)"},
               float(steps.max()), 0.0, float(-steps.max()), 0.0)
    asym = riera.riera_term(1e6) * 1.5e12
    rep.record({"check": "2/3 asymptotic", "u": 1e6}, asym, 1.0, 1e-6 - abs(asym - 1.0), 0.0)

    cutoffs = sorted(cfg.word_cutoffs)
    for spec in cfg.surfaces:
        G = _surface(spec)
        for name in sorted(G.curves):
            w = G.curves[name]
            values = [riera.gradient_norm_sq(G, w, c) for c in cutoffs]
            ev = values[-1]
            floor = 2.0 / math.pi * ev.curve_length
            rep.record({"check": "value >= (2/pi) l", "surface": _label(spec), "curve": name,
                        "word_cutoff": ev.word_cutoff}, ev.value, floor, ev.value - floor, 0.0)
            vals = [v.value for v in values]
            deltas = np.diff(vals)
            rep.record({"check": "nondecreasing in cutoff", "surface": _label(spec), "curve": name,
                        "cutoffs": cutoffs}, vals, 0.0, float(deltas.min()) if deltas.size else 0.0, 0.0)
            if spec[0] == "bolza" and len(deltas) >= 2:
                shrink = np.diff(deltas)
                rep.record({"check": "Cauchy deltas shrinking", "surface": _label(spec), "curve": name,
                            "cutoffs": cutoffs}, deltas.tolist(), 0.0, float(-shrink.max()), 0.0)
            if ev.intersecting_excluded:
                rep.notes.append(f"{_label(spec)} {name}: {ev.intersecting_excluded} crossing cosets excluded")
    return rep


SUITES: Dict[str, Callable[[SuiteConfig], VerificationReport]] = {
    "inj_short": suite_inj_short,
    "inj_thick": suite_inj_thick,
    "neck": suite_neck,
    "collar_cross": suite_collar_cross,
    "pants_bound": suite_pants_bound,
    "riera_properties": suite_riera_properties,
}


def run_suite(suite_id: str, cfg: SuiteConfig = SuiteConfig()) -> VerificationReport:
    try:
        fn = SUITES[suite_id]
    except KeyError:
        raise ValueError(f"unknown suite {suite_id!r}; choose from {', '.join(SUITES)} or all") from None
    return fn(cfg)


def run_all(cfg: SuiteConfig = SuiteConfig()) -> Dict[str, VerificationReport]:
    """Every suite with its own defaults; only the seed and MC budget are shared."""
    shared = SuiteConfig(seed=cfg.seed, n_mc=cfg.n_mc, n_s=cfg.n_s, profile_points=cfg.profile_points)
    return {sid: fn(shared) for sid, fn in SUITES.items()}
