import math

import numpy as np
import pytest

from hypsurf import collar, fuchsian, hplane, loops
from hypsurf.errors import HypothesisViolated, MCBudget, ParameterOutOfRange
from hypsurf.hplane import HPoint
from oracles import BOLZA_INRADIUS, LN6


def test_inj_on_the_core_is_half_the_length(even_pants):
    p = loops.point_on_geodesic(even_pants, even_pants.curve("gamma1"))
    inj, loop = loops.injectivity_radius(even_pants, p)
    assert inj == pytest.approx(0.6, abs=1e-12)
    assert loop.length == pytest.approx(1.2, abs=1e-12)


def test_inj_at_collar_boundary(thin_pants):
    g = thin_pants.curve("gamma1")
    p = loops.point_on_geodesic(thin_pants, g, 0.3, collar.half_width(0.5))
    inj, _ = loops.injectivity_radius(thin_pants, p)
    # the seam curve is shorter than the cuff, so inj can only be smaller
    assert inj <= collar.inj_from_core_distance(0.5, collar.half_width(0.5)) + 1e-12


def test_inj_at_the_bolza_centre(bolza):
    inj, loop = loops.injectivity_radius(bolza, bolza.basepoint)
    assert inj == pytest.approx(BOLZA_INRADIUS, abs=1e-10)
    assert loop.end.z == pytest.approx(hplane.apply(loop.element, bolza.basepoint).z)


def test_inj_is_below_the_universal_bound(thin_pants):
    rng = np.random.default_rng(0)
    z = fuchsian.mc_sample_domain(thin_pants, 3000, seed=rng.integers(1 << 32))
    inj = loops.injectivity_radii(thin_pants, z)
    assert inj.max() <= LN6 + 1e-12
    assert inj.min() > 0


def test_inj_agrees_with_a_wider_search(bolza, thin_pants):
    for G in (bolza, thin_pants):
        z = fuchsian.mc_sample_domain(G, 500, seed=11)
        reach = 1.1 * 2.0 * math.log(4 * G.genus - 2)
        mats, _ = fuchsian.neighborhood_table(G, reach)
        d = hplane.dist_arr(hplane.apply_arr(mats[None], z[:, None]), z[:, None]).min(axis=1)
        assert np.allclose(loops.injectivity_radii(G, z), d / 2, atol=1e-10)


def test_inj_is_invariant_under_the_group(thin_pants):
    p = HPoint(0.13, 1.4)
    g = thin_pants.word_element((1, 2, -1))
    a, _ = loops.injectivity_radius(thin_pants, p)
    b, _ = loops.injectivity_radius(thin_pants, hplane.apply(g, p))
    assert a == pytest.approx(b, abs=1e-10)


def test_loop_parametrization(thin_pants):
    p = HPoint(0.2, 1.1)
    _, loop = loops.injectivity_radius(thin_pants, p)
    assert hplane.dist(loops.loop_point(loop, 0.0), p) < 1e-10
    assert hplane.dist(loops.loop_point(loop, loop.length), loop.end) < 1e-9
    s = 0.37 * loop.length
    assert hplane.dist(p, loops.loop_point(loop, s)) == pytest.approx(s, abs=1e-10)
    with pytest.raises(ParameterOutOfRange):
        loops.loop_point(loop, loop.length + 1.0)


def test_profile_starts_and_ends_at_inj(thin_pants):
    p = HPoint(-0.05, 0.9)
    inj, loop = loops.injectivity_radius(thin_pants, p)
    prof = loops.inj_profile(thin_pants, loop, 33)
    assert prof.values[0] == pytest.approx(inj, abs=1e-10)
    assert prof.values[-1] == pytest.approx(inj, abs=1e-10)
    assert prof.maximum <= inj + 1e-10
    with pytest.raises(ParameterOutOfRange):
        loops.inj_profile(thin_pants, loop, 1)


def test_distance_to_loop(even_pants):
    g = even_pants.curve("gamma2")
    p = loops.point_on_geodesic(even_pants, g, 0.4)
    _, loop = loops.injectivity_radius(even_pants, p)
    assert loops.dist_to_loop(even_pants, loops.loop_point(loop, 0.8), loop) < 1e-10
    # the loop is the closed geodesic, so a short perpendicular is a shortest path
    q = loops.point_on_geodesic(even_pants, g, 0.4, 0.07)
    assert loops.dist_to_loop(even_pants, q, loop) == pytest.approx(0.07, abs=1e-10)
    assert loops.dist_to_closed_geodesic(even_pants, g, np.array([q.z]))[0] == pytest.approx(0.07, abs=1e-10)


def test_nearest_parameter_is_monotone_along_the_loop(even_pants):
    p = loops.point_on_geodesic(even_pants, even_pants.curve("gamma1"))
    _, loop = loops.injectivity_radius(even_pants, p)
    s = np.linspace(0, loop.length, 20)
    t = loops.nearest_parameter(loop, loops.loop_points(loop, s))
    assert np.allclose(t, s, atol=1e-10)


def _tube_ratio(eps0):
    # closed geodesic: tube area 2 l sinh(eps0), ball area 2 pi (cosh(eps0) - 1)
    return math.pi * (math.cosh(eps0) - 1) / (12 * eps0 * math.sinh(eps0))


def test_neck_constant_field_matches_the_tube_formula(even_pants):
    p = loops.point_on_geodesic(even_pants, even_pants.curve("gamma1"))
    _, loop = loops.injectivity_radius(even_pants, p)
    res = loops.neck_check(even_pants, loop, 0.1, loops.ConstantField(), n_mc=100_000, seed=4)
    assert res.ratio == pytest.approx(_tube_ratio(0.1), abs=4 * res.se_ratio + 1e-3)
    assert res.ratio == pytest.approx(math.pi / 24, rel=0.05)
    assert res.m == 6 and res.passed


def test_neck_zero_field(even_pants):
    _, loop = loops.injectivity_radius(even_pants, even_pants.basepoint)
    res = loops.neck_check(even_pants, loop, 0.05, loops.ConstantField(0.0), n_mc=1000)
    assert res.lhs == 0 and res.rhs == 0 and res.passed


def test_neck_is_deterministic(bolza):
    _, loop = loops.injectivity_radius(bolza, HPoint(0.1, 1.2))
    f = loops.RadialField(loops.loop_point(loop, loop.length / 3), "ball", 0.2)
    a = loops.neck_check(bolza, loop, 0.05, f, n_mc=5000, n_s=16, seed=9)
    b = loops.neck_check(bolza, loop, 0.05, f, n_mc=5000, n_s=16, seed=9)
    assert a == b


def test_neck_preconditions(thin_pants):
    p = loops.point_on_geodesic(thin_pants, thin_pants.curve("gamma1"))
    _, loop = loops.injectivity_radius(thin_pants, p)
    with pytest.raises(HypothesisViolated):
        loops.neck_check(thin_pants, loop, 0.2, loops.ConstantField(), n_mc=100)
    with pytest.raises(ParameterOutOfRange):
        loops.neck_check(thin_pants, loop, 0.0, loops.ConstantField(), n_mc=100)
    with pytest.raises(MCBudget):
        loops.neck_check(thin_pants, loop, 0.01, loops.ConstantField(), n_mc=1)


def test_radial_field_profiles():
    c = HPoint(0, 1)
    bump = loops.RadialField(c, "bump", 0.01)
    ball = loops.RadialField(c, "ball", 0.2, 0.05)
    d = np.array([0.0, 0.1, 0.2, 0.225, 0.25, 1.0])
    assert bump.profile(d)[0] == 1.0 and bump.profile(d)[-1] == 0.0
    assert np.allclose(ball.profile(d), [1, 1, 1, 0.5, 0, 0])
