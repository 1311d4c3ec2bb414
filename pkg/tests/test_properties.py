"""Hypothesis property checks on the metric kernels."""

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

import oracle
from electpol.analysis import (
    DEM,
    REP,
    MassPolarizationInput,
    Response,
    mass_polarization,
    pearson,
)
from electpol.metrics import (
    between_antagonism_all,
    effective_number_of_candidates,
    esteban_ray,
    margin_of_victory,
    polarization_report,
    reynal_querol,
    within_antagonism_all,
)

from conftest import make_matrix, vote_tables

PROPS = settings(max_examples=80, deadline=None)


def _metrics(m):
    rep = polarization_report(m)
    return np.array([
        *within_antagonism_all(m), *between_antagonism_all(m), rep.ep, rep.ec,
        margin_of_victory(m), reynal_querol(m), effective_number_of_candidates(m),
    ])


def _halved(votes):
    v = np.asarray(votes, dtype=float) / 2
    return np.repeat(v, 2, axis=0)


@PROPS
@given(vote_tables(max_units=5, max_candidates=4))
def test_matches_oracle(votes):
    m = make_matrix(votes)
    rows = votes.tolist()
    for i in range(m.n_candidates):
        assert within_antagonism_all(m)[i] == pytest.approx(oracle.within(rows, i), abs=1e-12)
        assert between_antagonism_all(m)[i] == pytest.approx(oracle.between(rows, i), abs=1e-12)
        for a in (0.25, 1.0):
            assert esteban_ray(m, a).per_candidate[i] == pytest.approx(
                oracle.esteban_ray(rows, i, a), abs=1e-12)


@PROPS
@given(vote_tables())
def test_scale_invariance(votes):
    m = make_matrix(votes)
    np.testing.assert_allclose(_metrics(m.scaled(7)), _metrics(m), atol=1e-9)
    for a in (0.25, 1.0):
        np.testing.assert_allclose(esteban_ray(m.scaled(7), a).per_candidate,
                                   esteban_ray(m, a).per_candidate, atol=1e-9)


@PROPS
@given(vote_tables())
def test_subdivision_invariance(votes):
    np.testing.assert_allclose(_metrics(make_matrix(_halved(votes))),
                               _metrics(make_matrix(votes)), atol=1e-9)


@PROPS
@given(vote_tables(), st.sampled_from([0.25, 1.0]))
def test_esteban_ray_halving_factor(votes, alpha):
    # ER is not subdivision-invariant: each unit term shrinks by 2^-(1+alpha)
    a = esteban_ray(make_matrix(votes), alpha).per_candidate
    b = esteban_ray(make_matrix(_halved(votes)), alpha).per_candidate
    np.testing.assert_allclose(b, np.asarray(a) * 2.0 ** -(1 + alpha), atol=1e-12)


@PROPS
@given(vote_tables(), st.randoms(use_true_random=False))
def test_permutation_invariance(votes, rnd):
    m = make_matrix(votes)
    units = list(range(m.n_units))
    cands = list(range(m.n_candidates))
    rnd.shuffle(units)
    rnd.shuffle(cands)
    p = make_matrix(votes[units][:, cands])
    a, b = polarization_report(m), polarization_report(p)
    assert b.ep == pytest.approx(a.ep, abs=1e-9)
    assert b.ec == pytest.approx(a.ec, abs=1e-9)
    np.testing.assert_allclose(within_antagonism_all(p), within_antagonism_all(m)[cands], atol=1e-9)
    np.testing.assert_allclose(between_antagonism_all(p), between_antagonism_all(m)[cands], atol=1e-9)


@PROPS
@given(st.lists(st.integers(0, 200), min_size=1, max_size=8))
def test_two_candidate_tie_identity(a_votes):
    # mirror every unit so national shares are exactly 50-50
    assume(sum(a_votes) > 0)
    rows = [[a, 200 - a] for a in a_votes] + [[200 - a, a] for a in a_votes]
    rep = polarization_report(make_matrix(rows))
    for c in rep.per_candidate:
        assert c.total_a == pytest.approx(0.5, abs=1e-9)
    assert rep.ep + rep.ec == pytest.approx(1.0, abs=1e-9)


@PROPS
@given(st.lists(st.integers(1, 1000), min_size=1, max_size=10), st.integers(2, 5))
def test_unanimity_is_zero(totals, n):
    votes = np.zeros((len(totals), n))
    votes[:, 0] = totals
    rep = polarization_report(make_matrix(votes))
    assert rep.ep == 0 and rep.ec == 0


@PROPS
@given(vote_tables())
def test_between_bounds(votes):
    m = make_matrix(votes)
    b = between_antagonism_all(m)
    assert np.all(b >= -1e-12) and np.all(b <= 1 / m.n_candidates + 1e-12)
    assert 0 <= polarization_report(m).ec <= 1 + 1e-12


@PROPS
@given(
    st.lists(st.floats(0.0, 1.0), min_size=2, max_size=12),
    st.floats(0.0, 1.0),
    st.floats(0.0, 1.0),
)
def test_mean_preserving_spread_raises_ep(shares, lam1, lam2):
    # equal-size units; pull shares toward their mean by lam, EP is monotone in lam
    x = np.asarray(shares)
    lo, hi = sorted((lam1, lam2))
    mean = x.mean()

    def ep(lam):
        s = mean + lam * (x - mean)
        return polarization_report(make_matrix(np.column_stack([s, 1 - s]) * 1000)).ep

    assume(0 < mean < 1)
    assert ep(lo) <= ep(hi) + 1e-12


@PROPS
@given(
    st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=20),
    st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=20),
    st.floats(0.1, 10),
    st.floats(-100, 100),
)
def test_pearson_symmetry_and_affine(xs, ys, a, b):
    n = min(len(xs), len(ys))
    x, y = np.asarray(xs[:n]), np.asarray(ys[:n])
    assume(np.ptp(x) > 1e-3 and np.ptp(y) > 1e-3)
    r = pearson(x, y)
    assert -1 <= r <= 1
    assert pearson(y, x) == pytest.approx(r, abs=1e-9)
    assert pearson(a * x + b, y) == pytest.approx(r, abs=1e-6)


@PROPS
@given(
    st.lists(st.tuples(st.sampled_from([DEM, REP]), st.integers(1, 3), st.floats(0.01, 10)),
             min_size=1, max_size=30),
    st.floats(0.01, 100),
)
def test_mass_polarization_weight_scale(rows, c):
    rows = rows + [(DEM, 1, 1.0), (REP, 3, 1.0)]
    base = MassPolarizationInput([Response("G", 2020, p, s, w) for p, s, w in rows])
    scaled = MassPolarizationInput([Response("G", 2020, p, s, w * c) for p, s, w in rows])
    a, b = mass_polarization(base, "G", 2020), mass_polarization(scaled, "G", 2020)
    assert b.pp == pytest.approx(a.pp, abs=1e-9)
    assert 0 <= a.pp <= 2 + 1e-12
