import math
import warnings

import numpy as np
import pytest

import oracle
from electpol.errors import SingleUnit
from electpol.metrics import (
    EstebanRayParams,
    between_antagonism,
    comparison_report,
    dispersion,
    effective_number_of_candidates,
    esteban_ray,
    margin_of_victory,
    polarization_report,
    reynal_querol,
    warn_if_incomparable,
    within_antagonism,
)

from conftest import make_matrix

TOL = 1e-9

SEGREGATED = [[100, 0], [0, 100]]
UNIFORM = [[50, 50], [50, 50]]
MIXED = [[75, 25], [25, 75]]
UNANIMOUS = [[100, 0], [100, 0]]


class TestWithin:
    def test_segregated(self):
        assert within_antagonism(make_matrix(SEGREGATED), 0) == pytest.approx(0.5, abs=TOL)

    def test_constant_share_is_zero(self):
        m = make_matrix([[30, 70], [60, 140], [3, 7]])
        assert within_antagonism(m, 0) == pytest.approx(0.0, abs=1e-15)

    def test_mixed(self):
        assert within_antagonism(make_matrix(MIXED), 0) == pytest.approx(0.25, abs=TOL)


class TestBetween:
    def test_tied_uniform(self):
        m = make_matrix(UNIFORM)
        assert between_antagonism(m, 0) == pytest.approx(0.5, abs=TOL)
        assert polarization_report(m).ec == pytest.approx(1.0, abs=TOL)

    def test_unanimous(self):
        m = make_matrix(UNANIMOUS)
        assert between_antagonism(m, 0) == 0
        assert between_antagonism(m, 1) == 0

    def test_three_way_split(self):
        m = make_matrix([[33, 33, 33]])
        for i in range(3):
            assert between_antagonism(m, i) == pytest.approx(1 / 3, abs=TOL)
        assert polarization_report(m).ec == pytest.approx(1.0, abs=TOL)

    def test_self_term_excluded(self):
        # with the j == i term a 50-50 tie would score 1 per candidate, outside [0, 1/N]
        assert between_antagonism(make_matrix(UNIFORM), 1) <= 0.5 + 1e-12


@pytest.mark.parametrize("votes, ep, ec", [
    (SEGREGATED, 1.0, 0.0),
    (UNIFORM, 0.0, 1.0),
    (MIXED, 0.5, 0.5),
    (UNANIMOUS, 0.0, 0.0),
])
def test_report_edge_cases(votes, ep, ec):
    rep = polarization_report(make_matrix(votes))
    assert rep.ep == pytest.approx(ep, abs=1e-12)
    assert rep.ec == pytest.approx(ec, abs=1e-12)
    assert rep.ep == pytest.approx(sum(c.within_a for c in rep.per_candidate), abs=1e-12)
    assert rep.ec == pytest.approx(sum(c.between_a for c in rep.per_candidate), abs=1e-12)


def test_zero_vote_candidate_flagged():
    rep = polarization_report(make_matrix(UNANIMOUS))
    assert rep.zero_vote_candidates == ("B",)
    b = rep.candidate("B")
    assert (b.within_a, b.between_a, b.total_a) == (0.0, 0.0, 0.0)


def test_zero_vote_units_do_not_contribute():
    with_zero = make_matrix([[75, 25], [0, 0], [25, 75]])
    without = make_matrix(MIXED)
    a, b = polarization_report(with_zero), polarization_report(without)
    assert a.zero_vote_units == 1
    assert a.ep == pytest.approx(b.ep, abs=1e-15) and a.ec == pytest.approx(b.ec, abs=1e-15)
    assert dispersion(with_zero, 0) == pytest.approx(dispersion(without, 0), abs=1e-15)


class TestEstebanRay:
    def test_unanimous_zero(self):
        er = esteban_ray(make_matrix(UNANIMOUS), EstebanRayParams(1.0))
        assert er.per_candidate == (0.0, 0.0)
        assert er.zero_vote_candidates == ("B",)

    def test_hand_value(self):
        # frozen from tests/oracle.py: (60^2*40*0.2 + 40^2*60*0.2) * 1e-6
        m = make_matrix([[60, 40], [40, 60]])
        assert esteban_ray(m, 1.0).per_candidate[0] == pytest.approx(0.048, abs=1e-12)

    def test_scale_invariant(self):
        m = make_matrix([[60, 40], [40, 60]])
        for a in (0.25, 1.0):
            assert esteban_ray(m.scaled(3), a).per_candidate[0] == pytest.approx(
                esteban_ray(m, a).per_candidate[0], rel=1e-12)

    def test_alpha_must_be_positive(self):
        with pytest.raises(ValueError):
            EstebanRayParams(0)


class TestDispersion:
    def test_constant(self):
        assert dispersion(make_matrix([[30, 70], [60, 140]]), 0) == pytest.approx(0, abs=1e-15)

    def test_hand_value(self):
        assert dispersion(make_matrix([[60, 40], [40, 60]]), 0) == pytest.approx(math.sqrt(0.02), abs=1e-12)

    def test_mean_is_vote_weighted(self):
        # unweighted mean of unit shares is 0.633; the national share is 5/6
        m = make_matrix([[90, 10], [10, 90], [900, 100]])
        assert m.overall_share[0] == pytest.approx(5 / 6, abs=1e-15)
        mu = m.overall_share[0]
        s = m.shares[:, 0]
        assert dispersion(m, 0) == pytest.approx(math.sqrt(((s - mu) ** 2).sum() / 2), abs=1e-12)

    def test_single_unit(self):
        with pytest.raises(SingleUnit):
            dispersion(make_matrix([[1, 2]]), 0)


@pytest.mark.parametrize("votes, expected", [([[50, 50]], 0.0), ([[100, 0]], 1.0), ([[50, 30, 20]], 0.2)])
def test_margin_of_victory(votes, expected):
    assert margin_of_victory(make_matrix(votes)) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("votes, expected", [([[50, 50]], 1.0), ([[100, 0]], 0.0), ([[1, 1, 1]], 8 / 9)])
def test_reynal_querol(votes, expected):
    assert reynal_querol(make_matrix(votes)) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("votes, expected", [([[50, 50]], 2.0), ([[100, 0]], 1.0), ([[40, 40, 20]], 1 / 0.36)])
def test_enp(votes, expected):
    assert effective_number_of_candidates(make_matrix(votes)) == pytest.approx(expected, abs=1e-12)


def test_comparison_report_bounds():
    rng = np.random.default_rng(11)
    for _ in range(20):
        m = make_matrix(rng.integers(1, 200, size=(5, 4)))
        c = comparison_report(m)
        assert 0 <= c.margin_of_victory <= 1
        assert 1 - 1e-12 <= c.enp <= m.n_candidates + 1e-12
        assert all(d >= 0 for d in c.dispersion)
        assert c.er(0.25).aggregate == pytest.approx(sum(c.er(0.25).per_candidate))


def test_comparison_report_single_unit_has_no_dispersion():
    c = comparison_report(make_matrix([[3, 1]]))
    assert c.dispersion is None and c.dispersion_aggregate is None


def test_matches_oracle_on_city_districts():
    # two districts of three precincts; shows a dispersed district scores higher
    alpha = [[30, 20, 50], [29, 19, 52], [31, 21, 48]]
    beta = [[5, 5, 90], [0, 40, 60], [85, 15, 0]]
    ep_alpha = polarization_report(make_matrix(alpha)).ep
    ep_beta = polarization_report(make_matrix(beta)).ep
    assert ep_beta > ep_alpha
    assert ep_alpha == pytest.approx(sum(oracle.within(alpha, i) for i in range(3)), abs=1e-12)
    assert ep_beta == pytest.approx(sum(oracle.within(beta, i) for i in range(3)), abs=1e-12)


def test_incomparable_warning():
    a = polarization_report(make_matrix(UNIFORM))
    b = polarization_report(make_matrix([[1, 1, 1]]))
    with pytest.warns(UserWarning, match="different candidate counts"):
        assert not warn_if_incomparable([a, b])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert warn_if_incomparable([a, a])
