import json
import math

import numpy as np
import pytest

from hypsurf import collar, fuchsian, hplane
from hypsurf.errors import (AreaMismatch, DegenerateLength, DiscretenessSuspect, InconclusiveCutoff,
                            NotHyperbolicGenerator)
from hypsurf.hplane import MoebiusElement
from oracles import BOLZA_CIRCUMRADIUS, BOLZA_INRADIUS, BOLZA_SYSTOLE


def test_bolza_domain_is_the_regular_octagon(bolza):
    assert len(bolza.side_pairings) == 8
    assert bolza.domain_radius == pytest.approx(BOLZA_CIRCUMRADIUS, abs=1e-10)
    d = hplane.dist_arr(np.array(bolza.vertices), bolza.basepoint.z)
    assert np.allclose(d, BOLZA_CIRCUMRADIUS, atol=1e-10)
    assert bolza.area_certificate.polygon_area == pytest.approx(4 * math.pi, abs=1e-9)


def test_bolza_side_pairings_move_the_centre_twice_the_inradius(bolza):
    for g in bolza.side_pairings:
        assert hplane.dist(bolza.basepoint, hplane.apply(g, bolza.basepoint)) == pytest.approx(2 * BOLZA_INRADIUS, abs=1e-10)


def test_side_pairings_replay_their_words(thin_pants):
    for g in thin_pants.side_pairings:
        assert g.is_close(thin_pants.word_element(g.word), 1e-7)


@pytest.mark.parametrize("lengths", [(0.5, 6, 6), (1.2, 1.2, 1.2), (6, 6, 6), (0.3, 5, 5)])
def test_doubled_pants_polygon_area_and_curves(lengths):
    G = fuchsian.doubled_pants(*lengths)
    assert G.area_certificate.polygon_area == pytest.approx(4 * math.pi, abs=1e-8)
    got = sorted(hplane.translation_length(G.curve(n)) for n in ("gamma1", "gamma2", "gamma3"))
    assert np.allclose(got, sorted(lengths), atol=1e-9)


def test_hexagon_closes():
    for a in [(0.5, 6, 6), (1, 2, 3), (0.01, 0.01, 0.01)]:
        assert fuchsian._hexagon_closure_error(a) < 1e-9


def test_degenerate_lengths():
    with pytest.raises(DegenerateLength):
        fuchsian.doubled_pants(0.0, 1.0, 1.0)
    with pytest.raises(DegenerateLength):
        fuchsian.doubled_pants(1.0, 1.0, 50.0)


def test_generator_validation():
    t = MoebiusElement.translation(2.0)
    with pytest.raises(NotHyperbolicGenerator):
        fuchsian.from_generators([MoebiusElement(1, 1, 0, 1), t], 2)
    with pytest.raises(ValueError):
        fuchsian.from_generators([np.diag([2.0, 2.0])], 2)
    with pytest.raises(DiscretenessSuspect):
        fuchsian.from_generators([t, t.conjugate_by(MoebiusElement.rotation(1e-6))], 2)


def test_non_cocompact_generators_are_rejected():
    # two far-apart translations generate a Schottky group: infinite area
    g1 = MoebiusElement.translation(6.0)
    g2 = g1.conjugate_by(MoebiusElement.rotation(math.pi / 2))
    with pytest.raises(AreaMismatch):
        fuchsian.from_generators([g1, g2], 2)


def test_bolza_systole(bolza):
    length, g = fuchsian.systole(bolza)
    assert length == pytest.approx(BOLZA_SYSTOLE, abs=1e-10)
    assert hplane.translation_length(bolza.word_element(g.word)) == pytest.approx(length, abs=1e-9)


def test_systole_needs_a_useful_cutoff(bolza):
    with pytest.raises(InconclusiveCutoff):
        fuchsian.systole(bolza, cutoff=2 * bolza.diameter_bound)


def test_short_curve_systoles(even_pants):
    assert fuchsian.systole(even_pants)[0] == pytest.approx(1.2, abs=1e-9)
    assert fuchsian.systole(fuchsian.doubled_pants(0.3, 5, 5))[0] == pytest.approx(0.3, abs=1e-9)


def test_thin_pants_has_a_seam_curve_shorter_than_its_cuff(thin_pants):
    # twice the seam between the two long cuffs is a closed geodesic of the double
    b1, _, _ = fuchsian.hexagon_seams(0.25, 3.0, 3.0)
    length, _ = fuchsian.systole(thin_pants)
    assert length == pytest.approx(2 * b1, abs=1e-9)
    assert length < 0.5


def test_equilateral_four_has_no_short_curve():
    length, _ = fuchsian.systole(fuchsian.doubled_pants(4, 4, 4))
    assert length > collar.SHORT_CURVE * 0.9
    assert all(not collar.in_regime(hplane.translation_length(G_c))
               for G_c in (fuchsian.doubled_pants(4, 4, 4).curve(n) for n in ("gamma1", "gamma2", "gamma3")))


def test_orbit_enumeration_is_sorted_and_complete(bolza):
    orbit = fuchsian.enumerate_orbit(bolza, 6.0)
    disp = [e.displacement for e in orbit]
    assert all(b >= a - 1e-12 for a, b in zip(disp, disp[1:]))
    assert disp[0] == pytest.approx(2 * BOLZA_INRADIUS, abs=1e-9)
    # brute force over all words of length <= 3 in the side pairings
    words = fuchsian._words_closure(list(bolza.side_pairings), 3)
    p = bolza.basepoint
    brute = sorted(hplane.dist(p, hplane.apply(g, p)) for g in words if not g.is_identity(1e-9))
    brute = [d for d in brute if d <= 6.0]
    found = np.array(disp)
    for d in brute:
        assert np.min(np.abs(found - d)) < 1e-8
    for e in orbit[:20]:
        assert e.element.is_close(bolza.word_element(e.element.word), 1e-7)


def test_reduction_lands_in_the_domain(thin_pants):
    rng = np.random.default_rng(3)
    z = hplane.sample_disk(thin_pants.basepoint, 6.0, 300, rng)
    zr, h = fuchsian.reduce_points(thin_pants, z)
    assert fuchsian.in_domain(thin_pants, zr, slack=1e-9).all()
    assert np.allclose(hplane.apply_arr(h, z), zr)


def test_mc_area_matches_gauss_bonnet(even_pants):
    area, se = fuchsian.area_estimate(even_pants, 100_000, seed=5)
    assert abs(area - 4 * math.pi) < 4 * se


def test_mc_samples_lie_in_domain(bolza):
    z = fuchsian.mc_sample_domain(bolza, 2000, seed=1)
    assert fuchsian.in_domain(bolza, z, slack=1e-12).all()


def test_json_round_trip(thin_pants):
    text = json.dumps(thin_pants.to_json())
    G2 = fuchsian.from_json(text)
    assert fuchsian.systole(G2)[0] == fuchsian.systole(thin_pants)[0]
    assert len(G2.side_pairings) == len(thin_pants.side_pairings)


def test_builtin_lookup():
    assert fuchsian.builtin("bolza") is fuchsian.bolza()
    with pytest.raises(ValueError):
        fuchsian.builtin("doubled_pants", (1.0, 2.0))
    with pytest.raises(ValueError):
        fuchsian.builtin("torus")


def test_conjugation_keeps_the_geometry(bolza):
    h = MoebiusElement(1.5, 0.2, 0.1, (1 + 0.02) / 1.5)
    G2 = bolza.conjugate(h)
    assert fuchsian.systole(G2)[0] == pytest.approx(BOLZA_SYSTOLE, abs=1e-9)
    assert fuchsian.in_domain(G2, np.array([G2.basepoint.z])).all()
