import math

import numpy as np
import pytest

from hypsurf import fuchsian, hplane, riera
from hypsurf.errors import DomainError, OutOfRegime, ParameterOutOfRange
from hypsurf.hplane import Geodesic, MoebiusElement
from oracles import RIERA_TERM_COSH2, UP_EFF_L8_C1, WOLPERT_GENUS2_SYSTOLE_BOUND


@pytest.fixture(scope="module")
def bolza_axis(bolza):
    return riera.conjugate_to_axis(bolza, (1,))


def test_term_oracle():
    assert riera.riera_term(math.cosh(2.0)) == pytest.approx(RIERA_TERM_COSH2, abs=1e-14)


def test_term_is_positive_and_decreasing():
    u = np.concatenate([1 + np.logspace(-12, 0, 200), np.linspace(2.01, 1e4, 2000)])
    t = riera.riera_term(u)
    assert (t > 0).all()
    assert (np.diff(t) < 0).all()


def test_series_branch_is_continuous():
    below, above = riera.riera_term(np.nextafter(4.0, 0.0)), riera.riera_term(4.0)
    assert abs(below - above) < 1e-15


@pytest.mark.parametrize("u", [1e3, 1e5, 1e8])
def test_term_asymptotic(u):
    assert riera.riera_term(u) * u * u == pytest.approx(2 / 3, rel=1e-5)


def test_term_domain():
    for u in (1.0, 0.5, float("nan")):
        with pytest.raises(DomainError):
            riera.riera_term(u)


def test_wolpert_and_effective_bounds():
    L = 2 * math.log(6)
    assert riera.wolpert_distance_bound(L) == pytest.approx(WOLPERT_GENUS2_SYSTOLE_BOUND, abs=1e-13)
    assert riera.up_eff_rhs(8.0, 1.0) == pytest.approx(UP_EFF_L8_C1, abs=1e-13)
    with pytest.raises(OutOfRegime):
        riera.up_eff_rhs(7.0, 1.0)
    with pytest.raises(DomainError):
        riera.up_eff_rhs(9.0, 0.0)


def test_axis_normalization(bolza, bolza_axis):
    Gp, A = bolza_axis
    assert abs(A.b) < 1e-12 and abs(A.c) < 1e-12
    ell = 2 * math.log(A.a)
    assert ell == pytest.approx(fuchsian.systole(bolza)[0], abs=1e-10)
    assert A.is_close(Gp.word_element(A.word), 1e-8)


def test_conjugating_a_vertical_axis_is_a_no_op():
    G = fuchsian.doubled_pants(1.0, 2.0, 3.0)
    h = hplane.diagonalizer(G.curve("gamma1"))
    Gv = G.conjugate(h)
    Gp, _ = riera.conjugate_to_axis(Gv, (1,))
    assert Gp is Gv


def test_word_cutoff_range(bolza_axis):
    Gp, A = bolza_axis
    for k in (0, riera.MAX_WORD_CUTOFF + 1):
        with pytest.raises(ParameterOutOfRange):
            riera.enumerate_cosets(Gp, A, k)


def test_coset_representatives(bolza_axis):
    Gp, A = bolza_axis
    ell = 2 * math.log(A.a)
    reps = riera.double_cosets(Gp, A, 8)
    assert reps
    axis = Geodesic.vertical(0.0)
    for rep in reps:
        r, theta = rep.nearest_point_polar
        assert 1 - 1e-9 <= r < math.exp(ell) + 1e-9
        assert rep.u > 1 and rep.distance <= riera.tube_radius(8) + 1e-9
        assert math.sin(theta) == pytest.approx(1 / rep.u, rel=1e-9)
        d = hplane.dist_geodesics(axis, axis.image(rep.element)).distance
        assert math.cosh(d) == pytest.approx(rep.u, rel=1e-9)
        assert rep.element.is_close(Gp.word_element(rep.element.word), 1e-6)
    us = [rep.u for rep in reps]
    assert all(b >= a * (1 - 1e-12) for a, b in zip(us, us[1:]))


def test_recanonicalization(bolza_axis):
    Gp, A = bolza_axis
    for rep in riera.double_cosets(Gp, A, 8)[:10]:
        again = riera.recanonicalize(rep, A)
        assert again.u == pytest.approx(rep.u, rel=1e-12)
        assert np.allclose(again.nearest_point_polar, rep.nearest_point_polar, atol=1e-10)
        # multiplying by A on the left moves the coset along the axis; the canonical rep is unchanged
        shifted = riera.CosetRep(A @ A @ rep.element, rep.u, rep.nearest_point_polar)
        moved = riera.recanonicalize(shifted, A)
        assert moved.nearest_point_polar[0] == pytest.approx(rep.nearest_point_polar[0], rel=1e-9)


def test_counts_grow_with_the_cutoff(bolza_axis):
    Gp, A = bolza_axis
    counts = [len(riera.double_cosets(Gp, A, k)) for k in (6, 8, 10)]
    assert counts == sorted(counts) and counts[0] > 0


def test_value_is_above_the_length_term(bolza):
    ev = riera.gradient_norm_sq(bolza, (1,), 8)
    assert ev.value >= 2 / math.pi * ev.curve_length
    assert ev.value == pytest.approx(2 / math.pi * (ev.curve_length + ev.truncated_sum))
    assert ev.tail_bound > 0
    assert set(ev.to_json()) >= {"value", "coset_count", "tail_bound_heuristic"}


def test_value_is_nondecreasing_in_the_cutoff(thin_pants):
    vals = [riera.gradient_norm_sq(thin_pants, (1,), k).value for k in (4, 6, 8)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_conjugation_invariance(bolza):
    h = MoebiusElement(1.3, 0.4, -0.2, (1 - 0.08) / 1.3)
    a = riera.gradient_norm_sq(bolza, (1,), 8)
    b = riera.gradient_norm_sq(bolza.conjugate(h), (1,), 8)
    assert a.value == pytest.approx(b.value, abs=1e-10)
    assert a.coset_count == b.coset_count


def test_orbit_ball_report(bolza_axis):
    Gp, A = bolza_axis
    reps = riera.double_cosets(Gp, A, 6)
    report = riera.orbit_ball_checks(Gp, A, reps)
    assert not report.hypothesis_met and report.passed is None
    assert report.coset_count == len(reps)
    assert report.min_pairwise_distance > 0
    twice = riera.orbit_ball_checks(Gp, A, reps + reps[:1])
    assert twice.min_pairwise_distance == 0.0
